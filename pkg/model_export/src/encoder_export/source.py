"""Source model loading and probe batch generation.

The source of truth for parity is a torch CLIPModel: either a local
checkpoint directory (``--weights``) or, when no weights are available, a
deterministically seeded randomly initialized model with the exact ViT-B/32
architecture. Either way the exported graphs must match its forward pass.
"""

from __future__ import annotations

import numpy as np

from .errors import ExportError

EXPECTED = {
    "vision_hidden": 768,
    "vision_layers": 12,
    "vision_heads": 12,
    "patch": 32,
    "image_size": 224,
    "text_hidden": 512,
    "text_layers": 12,
    "text_heads": 8,
    "vocab": 49408,
    "context": 77,
    "projection": 512,
}

START_ID = 49406
END_ID = 49407


def validate_architecture(model) -> None:
    """Reject any model whose dimensions differ from the ViT-B/32 contract."""
    cfg = model.config
    actual = {
        "vision_hidden": cfg.vision_config.hidden_size,
        "vision_layers": cfg.vision_config.num_hidden_layers,
        "vision_heads": cfg.vision_config.num_attention_heads,
        "patch": cfg.vision_config.patch_size,
        "image_size": cfg.vision_config.image_size,
        "text_hidden": cfg.text_config.hidden_size,
        "text_layers": cfg.text_config.num_hidden_layers,
        "text_heads": cfg.text_config.num_attention_heads,
        "vocab": cfg.text_config.vocab_size,
        "context": cfg.text_config.max_position_embeddings,
        "projection": cfg.projection_dim,
    }
    if actual != EXPECTED:
        diffs = {k: (actual[k], EXPECTED[k]) for k in EXPECTED if actual[k] != EXPECTED[k]}
        raise ExportError(f"model is not ViT-B/32 shaped: {diffs}")


def load_source_model(weights_path=None, seed: int = 0):
    """Returns (torch CLIPModel in eval mode, model_id string)."""
    import torch
    from transformers import CLIPConfig, CLIPModel

    if weights_path is not None:
        try:
            model = CLIPModel.from_pretrained(str(weights_path))
        except Exception as exc:
            raise ExportError(f"cannot load weights from {weights_path}: {exc}") from exc
        model_id = "clip-vit-b32"
    else:
        torch.manual_seed(seed)
        model = CLIPModel(CLIPConfig())
        model_id = f"clip-vit-b32-random-s{seed}"
    validate_architecture(model)
    return model.eval(), model_id


def state_arrays(model) -> dict[str, np.ndarray]:
    """State dict as float32 numpy arrays."""
    return {
        name: tensor.detach().cpu().numpy().astype(np.float32, copy=False)
        for name, tensor in model.state_dict().items()
    }


def make_probe_batches(seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic probe inputs: a standardized-image batch and a batch of
    valid token sequences with end tokens at varied positions."""
    rng = np.random.default_rng(seed + 7)
    pixels = rng.standard_normal((4, 3, 224, 224)).astype(np.float32)
    ids = np.zeros((6, 77), dtype=np.int64)
    for row in range(6):
        length = int(rng.integers(3, 60))
        ids[row, 0] = START_ID
        ids[row, 1 : 1 + length] = rng.integers(1, 49000, size=length)
        ids[row, 1 + length] = END_ID
    return pixels, ids


def source_embeddings(model, pixels: np.ndarray, ids: np.ndarray):
    """Forward both towers through torch (the parity oracle)."""
    import torch

    with torch.no_grad():
        vision = model.vision_model(pixel_values=torch.from_numpy(pixels))
        image_embeds = model.visual_projection(vision.pooler_output).numpy()
        text = model.text_model(input_ids=torch.from_numpy(ids))
        text_embeds = model.text_projection(text.pooler_output).numpy()
    return image_embeds, text_embeds
