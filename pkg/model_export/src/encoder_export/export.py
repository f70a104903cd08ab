"""Export orchestration: build graphs, verify parity, emit the asset dir.

The exported directory follows the consumer contract exactly:
image_encoder.onnx, text_encoder.onnx, bpe_vocab.txt.gz, manifest.json.
Graphs are verified against the torch source on deterministic probe batches
before the manifest is written, so a failed export leaves no loadable asset
directory behind. Probe inputs and the source embeddings are stored next to
the assets (probes.npz) for later re-verification.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clip_graph import CONTEXT_LENGTH, EMBED_DIM, build_image_tower, build_text_tower
from .errors import ExportError
from .source import load_source_model, make_probe_batches, source_embeddings, state_arrays
from .vocab import write_vocab

IMAGE_FILE = "image_encoder.onnx"
TEXT_FILE = "text_encoder.onnx"
VOCAB_FILE = "bpe_vocab.txt.gz"
MANIFEST_FILE = "manifest.json"
PROBES_FILE = "probes.npz"

PARITY_TOLERANCE = 1e-4


@dataclass(frozen=True)
class ExportManifest:
    model_id: str
    embedding_dim: int
    context_length: int
    file_hashes: dict[str, str]
    bpe_source: str
    parity: dict[str, float]


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def run_exported(graph_path: Path, input_name: str, batch: np.ndarray) -> np.ndarray:
    """Execute an exported graph through the consuming package's runtime."""
    from ddr.onnx import GraphRunner, load_model

    runner = GraphRunner(load_model(graph_path))
    return runner.run({input_name: batch})["embedding"]


def verify_parity(out_dir: Path, pixels, ids, image_ref, text_ref) -> dict[str, float]:
    image_out = run_exported(out_dir / IMAGE_FILE, "pixel_values", pixels)
    text_out = run_exported(out_dir / TEXT_FILE, "input_ids", ids)
    if image_out.shape != image_ref.shape or text_out.shape != text_ref.shape:
        raise ExportError(
            f"output signature mismatch: image {image_out.shape} vs "
            f"{image_ref.shape}, text {text_out.shape} vs {text_ref.shape}"
        )
    image_diff = float(np.max(np.abs(image_out.astype(np.float64) - image_ref)))
    text_diff = float(np.max(np.abs(text_out.astype(np.float64) - text_ref)))
    if image_diff > PARITY_TOLERANCE or text_diff > PARITY_TOLERANCE:
        raise ExportError(
            f"exported graphs diverge from the source model: image max-abs "
            f"{image_diff:.3e}, text max-abs {text_diff:.3e} "
            f"(tolerance {PARITY_TOLERANCE:g})"
        )
    return {"image_max_abs": image_diff, "text_max_abs": text_diff}


def export_encoders(
    out_dir,
    weights_path=None,
    bpe_path=None,
    seed: int = 0,
) -> ExportManifest:
    """Convert source weights into the serialized asset directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model, model_id = load_source_model(weights_path, seed=seed)
    state = state_arrays(model)
    (out_dir / IMAGE_FILE).write_bytes(build_image_tower(state))
    (out_dir / TEXT_FILE).write_bytes(build_text_tower(state))
    bpe_source = write_vocab(out_dir / VOCAB_FILE, bpe_path)

    pixels, ids = make_probe_batches(seed)
    image_ref, text_ref = source_embeddings(model, pixels, ids)
    parity = verify_parity(out_dir, pixels, ids, image_ref, text_ref)
    np.savez(
        out_dir / PROBES_FILE,
        pixels=pixels,
        input_ids=ids,
        image_embeddings=image_ref,
        text_embeddings=text_ref,
    )

    file_hashes = {
        name: _sha256(out_dir / name)
        for name in (IMAGE_FILE, TEXT_FILE, VOCAB_FILE, PROBES_FILE)
    }
    manifest = ExportManifest(
        model_id=model_id,
        embedding_dim=EMBED_DIM,
        context_length=CONTEXT_LENGTH,
        file_hashes=file_hashes,
        bpe_source=bpe_source,
        parity=parity,
    )
    (out_dir / MANIFEST_FILE).write_text(
        json.dumps(
            {
                "model_id": manifest.model_id,
                "embedding_dim": manifest.embedding_dim,
                "context_length": manifest.context_length,
                "bpe_source": manifest.bpe_source,
                "parity": manifest.parity,
                "files": {
                    name: {"sha256": digest}
                    for name, digest in manifest.file_hashes.items()
                },
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return manifest
