"""Assembles the two CLIP ViT-B/32 towers as ONNX graphs.

Weights come in as a flat name->float32-array mapping using the transformers
naming scheme. The graphs reproduce the source forward pass exactly: patch
embedding + class token + positional embeddings + pre-LN transformer with
quick-GELU MLPs for the image side; token/positional embeddings + causally
masked transformer + end-token pooling for the text side; both followed by
a linear projection to the shared 512-dim space.
"""

from __future__ import annotations

import numpy as np

from .builder import FLOAT, INT64, GraphBuilder

IMAGE_SIZE = 224
PATCH = 32
VISION_HIDDEN = 768
VISION_HEADS = 12
VISION_TOKENS = (IMAGE_SIZE // PATCH) ** 2 + 1  # patches + class token
TEXT_HIDDEN = 512
TEXT_HEADS = 8
CONTEXT_LENGTH = 77
EMBED_DIM = 512
LAYERS = 12
LN_EPS = 1e-5
QUICK_GELU_SLOPE = 1.702


def _linear(b: GraphBuilder, x: str, prefix: str, state: dict, tag: str) -> str:
    weight = b.init(f"{tag}_w", state[f"{prefix}.weight"].T.copy())
    bias = b.init(f"{tag}_b", state[f"{prefix}.bias"])
    return b.node("Add", [b.node("MatMul", [x, weight]), bias])


def _layer_norm(b: GraphBuilder, x: str, prefix: str, state: dict, tag: str) -> str:
    scale = b.init(f"{tag}_scale", state[f"{prefix}.weight"])
    bias = b.init(f"{tag}_bias", state[f"{prefix}.bias"])
    return b.node("LayerNormalization", [x, scale, bias], axis=-1, epsilon=LN_EPS)


def _quick_gelu(b: GraphBuilder, x: str, slope_name: str) -> str:
    return b.node("Mul", [x, b.node("Sigmoid", [b.node("Mul", [x, slope_name])])])


def _attention(
    b: GraphBuilder,
    x: str,
    prefix: str,
    state: dict,
    tag: str,
    seq: int,
    hidden: int,
    heads: int,
    mask: str | None,
) -> str:
    head_dim = hidden // heads
    q = _linear(b, x, f"{prefix}.q_proj", state, f"{tag}_q")
    k = _linear(b, x, f"{prefix}.k_proj", state, f"{tag}_k")
    v = _linear(b, x, f"{prefix}.v_proj", state, f"{tag}_v")
    scale = b.init(f"{tag}_scale_qk", np.array(head_dim**-0.5, dtype=np.float32))
    q = b.node("Mul", [q, scale])

    split = b.init(f"{tag}_split", np.array([0, seq, heads, head_dim], dtype=np.int64))

    def heads_first(t: str) -> str:
        return b.node("Transpose", [b.node("Reshape", [t, split])], perm=[0, 2, 1, 3])

    q_heads = heads_first(q)
    v_heads = heads_first(v)
    k_t = b.node("Transpose", [b.node("Reshape", [k, split])], perm=[0, 2, 3, 1])
    scores = b.node("MatMul", [q_heads, k_t])
    if mask is not None:
        scores = b.node("Add", [scores, mask])
    attn = b.node("Softmax", [scores], axis=-1)
    context = b.node("MatMul", [attn, v_heads])
    merged = b.node("Transpose", [context], perm=[0, 2, 1, 3])
    merge_shape = b.init(f"{tag}_merge", np.array([0, seq, hidden], dtype=np.int64))
    merged = b.node("Reshape", [merged, merge_shape])
    return _linear(b, merged, f"{prefix}.out_proj", state, f"{tag}_o")


def _encoder_stack(
    b: GraphBuilder,
    x: str,
    state: dict,
    prefix: str,
    seq: int,
    hidden: int,
    heads: int,
    mask: str | None,
    slope: str,
) -> str:
    for i in range(LAYERS):
        layer = f"{prefix}.layers.{i}"
        tag = f"l{i}"
        ln1 = _layer_norm(b, x, f"{layer}.layer_norm1", state, f"{tag}_ln1")
        attn = _attention(
            b, ln1, f"{layer}.self_attn", state, f"{tag}_attn",
            seq, hidden, heads, mask,
        )
        x = b.node("Add", [x, attn])
        ln2 = _layer_norm(b, x, f"{layer}.layer_norm2", state, f"{tag}_ln2")
        h = _linear(b, ln2, f"{layer}.mlp.fc1", state, f"{tag}_fc1")
        h = _quick_gelu(b, h, slope)
        h = _linear(b, h, f"{layer}.mlp.fc2", state, f"{tag}_fc2")
        x = b.node("Add", [x, h])
    return x


def build_image_tower(state: dict[str, np.ndarray]) -> bytes:
    b = GraphBuilder("clip_image_encoder")
    pixels = b.input("pixel_values", FLOAT, ("batch", 3, IMAGE_SIZE, IMAGE_SIZE))
    b.output("embedding", FLOAT, ("batch", EMBED_DIM))
    slope = b.init("gelu_slope", np.array(QUICK_GELU_SLOPE, dtype=np.float32))

    patch_w = b.init("patch_w", state["vision_model.embeddings.patch_embedding.weight"])
    patches = b.node("Conv", [pixels, patch_w], strides=[PATCH, PATCH])
    grid = (IMAGE_SIZE // PATCH) ** 2
    to_tokens = b.init("to_tokens", np.array([0, VISION_HIDDEN, grid], dtype=np.int64))
    tokens = b.node(
        "Transpose", [b.node("Reshape", [patches, to_tokens])], perm=[0, 2, 1]
    )

    cls = b.init(
        "cls_token",
        state["vision_model.embeddings.class_embedding"].reshape(1, 1, VISION_HIDDEN),
    )
    batch_dim = b.node("Shape", [pixels], start=0, end=1)
    tail = b.init("cls_tail", np.array([1, VISION_HIDDEN], dtype=np.int64))
    cls_shape = b.node("Concat", [batch_dim, tail], axis=0)
    cls_batch = b.node("Expand", [cls, cls_shape])
    x = b.node("Concat", [cls_batch, tokens], axis=1)

    pos = b.init("pos_embed", state["vision_model.embeddings.position_embedding.weight"])
    x = b.node("Add", [x, pos])
    x = _layer_norm(b, x, "vision_model.pre_layrnorm", state, "pre_ln")
    x = _encoder_stack(
        b, x, state, "vision_model.encoder",
        VISION_TOKENS, VISION_HIDDEN, VISION_HEADS, mask=None, slope=slope,
    )

    starts = b.init("tok0_start", np.array([0], dtype=np.int64))
    ends = b.init("tok0_end", np.array([1], dtype=np.int64))
    axes = b.init("tok0_axes", np.array([1], dtype=np.int64))
    first = b.node("Slice", [x, starts, ends, axes])
    squeeze_shape = b.init("squeeze_shape", np.array([0, VISION_HIDDEN], dtype=np.int64))
    pooled = b.node("Reshape", [first, squeeze_shape])
    pooled = _layer_norm(b, pooled, "vision_model.post_layernorm", state, "post_ln")
    proj = b.init("visual_proj", state["visual_projection.weight"].T.copy())
    b.node("MatMul", [pooled, proj], outputs=["embedding"])
    return b.build()


def build_text_tower(state: dict[str, np.ndarray]) -> bytes:
    b = GraphBuilder("clip_text_encoder")
    ids = b.input("input_ids", INT64, ("batch", CONTEXT_LENGTH))
    b.output("embedding", FLOAT, ("batch", EMBED_DIM))
    slope = b.init("gelu_slope", np.array(QUICK_GELU_SLOPE, dtype=np.float32))

    table = b.init("token_table", state["text_model.embeddings.token_embedding.weight"])
    x = b.node("Gather", [table, ids], axis=0)
    pos = b.init("pos_embed", state["text_model.embeddings.position_embedding.weight"])
    x = b.node("Add", [x, pos])

    causal = np.triu(
        np.full(
            (CONTEXT_LENGTH, CONTEXT_LENGTH),
            np.finfo(np.float32).min,
            dtype=np.float32,
        ),
        k=1,
    )
    mask = b.init("causal_mask", causal)
    x = _encoder_stack(
        b, x, state, "text_model.encoder",
        CONTEXT_LENGTH, TEXT_HIDDEN, TEXT_HEADS, mask=mask, slope=slope,
    )
    x = _layer_norm(b, x, "text_model.final_layer_norm", state, "final_ln")

    # pool at the end-of-text position: the end token has the largest id
    max_id = b.node("ReduceMax", [ids], axes=[1], keepdims=1)
    onehot = b.node("Cast", [b.node("Equal", [ids, max_id])], to=FLOAT)
    axes1 = b.init("unsq_axes", np.array([1], dtype=np.int64))
    selector = b.node("Unsqueeze", [onehot, axes1])
    pooled = b.node("MatMul", [selector, x])
    squeeze_shape = b.init("squeeze_shape", np.array([0, TEXT_HIDDEN], dtype=np.int64))
    pooled = b.node("Reshape", [pooled, squeeze_shape])
    proj = b.init("text_proj", state["text_projection.weight"].T.copy())
    b.node("MatMul", [pooled, proj], outputs=["embedding"])
    return b.build()
