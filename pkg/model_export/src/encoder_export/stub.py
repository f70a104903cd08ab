"""Tiny random-weight stub assets for test suites.

Same I/O signatures and asset layout as a real export, but the graphs are a
fixed-pooling + two-layer head for images and a scaled-id projection for
text: a few hundred KB total. Golden outputs for fixed probe inputs are
recorded next to the assets so consumers can regression-test their runtime.
Byte-identical for a fixed seed.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .builder import FLOAT, INT64, GraphBuilder
from .clip_graph import CONTEXT_LENGTH, EMBED_DIM
from .export import IMAGE_FILE, MANIFEST_FILE, TEXT_FILE, VOCAB_FILE
from .vocab import write_vocab

GOLDEN_FILE = "stub_goldens.npz"
HIDDEN = 64
POOL_GRID = 7
POOL_PATCH = 32


def build_stub_image_graph(rng: np.random.Generator) -> bytes:
    b = GraphBuilder("stub_image_encoder")
    pixels = b.input("pixel_values", FLOAT, ("batch", 3, 224, 224))
    b.output("embedding", FLOAT, ("batch", EMBED_DIM))
    flat_dim = 3 * POOL_GRID * POOL_GRID
    pool_shape = b.init(
        "pool_shape",
        np.array([0, 3, POOL_GRID, POOL_PATCH, POOL_GRID, POOL_PATCH], dtype=np.int64),
    )
    flat_shape = b.init("flat_shape", np.array([0, flat_dim], dtype=np.int64))
    w1 = b.init(
        "w1", (rng.standard_normal((flat_dim, HIDDEN)) / np.sqrt(flat_dim)).astype(np.float32)
    )
    b1 = b.init("b1", (rng.standard_normal(HIDDEN) * 0.05).astype(np.float32))
    w2 = b.init(
        "w2", (rng.standard_normal((HIDDEN, EMBED_DIM)) / np.sqrt(HIDDEN)).astype(np.float32)
    )
    b2 = b.init("b2", (rng.standard_normal(EMBED_DIM) * 0.05).astype(np.float32))

    windows = b.node("Reshape", [pixels, pool_shape])
    pooled = b.node("ReduceMean", [windows], axes=[3, 5], keepdims=0)
    flat = b.node("Reshape", [pooled, flat_shape])
    h = b.node("Tanh", [b.node("Add", [b.node("MatMul", [flat, w1]), b1])])
    b.node("Add", [b.node("MatMul", [h, w2]), b2], outputs=["embedding"])
    return b.build(producer="encoder-export-stub")


def build_stub_text_graph(rng: np.random.Generator) -> bytes:
    b = GraphBuilder("stub_text_encoder")
    ids = b.input("input_ids", INT64, ("batch", CONTEXT_LENGTH))
    b.output("embedding", FLOAT, ("batch", EMBED_DIM))
    scale = b.init("id_scale", np.array(1.0 / 49407.0, dtype=np.float32))
    w1 = b.init(
        "w1",
        (rng.standard_normal((CONTEXT_LENGTH, HIDDEN)) / np.sqrt(CONTEXT_LENGTH)).astype(
            np.float32
        ),
    )
    b1 = b.init("b1", (rng.standard_normal(HIDDEN) * 0.05).astype(np.float32))
    w2 = b.init(
        "w2", (rng.standard_normal((HIDDEN, EMBED_DIM)) / np.sqrt(HIDDEN)).astype(np.float32)
    )
    b2 = b.init("b2", (rng.standard_normal(EMBED_DIM) * 0.05).astype(np.float32))

    scaled = b.node("Mul", [b.node("Cast", [ids], to=FLOAT), scale])
    h = b.node("Tanh", [b.node("Add", [b.node("MatMul", [scaled, w1]), b1])])
    b.node("Add", [b.node("MatMul", [h, w2]), b2], outputs=["embedding"])
    return b.build(producer="encoder-export-stub")


def make_stub_fixtures(out_dir, seed: int = 0) -> dict[str, str]:
    """Emit stub assets plus recorded golden probe outputs; returns hashes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    (out_dir / IMAGE_FILE).write_bytes(build_stub_image_graph(rng))
    (out_dir / TEXT_FILE).write_bytes(build_stub_text_graph(rng))
    write_vocab(out_dir / VOCAB_FILE, None)

    # record goldens for fixed probes through the consuming runtime
    from .export import run_exported

    probe_rng = np.random.default_rng(seed + 1)
    pixels = probe_rng.random((2, 3, 224, 224)).astype(np.float32)
    ids = np.zeros((2, CONTEXT_LENGTH), dtype=np.int64)
    ids[:, 0] = 49406
    ids[0, 1:4] = [320, 1000, 2000]
    ids[0, 4] = 49407
    ids[1, 1] = 49407
    image_golden = run_exported(out_dir / IMAGE_FILE, "pixel_values", pixels)
    text_golden = run_exported(out_dir / TEXT_FILE, "input_ids", ids)
    if not (np.isfinite(image_golden).all() and np.isfinite(text_golden).all()):
        raise AssertionError("stub golden outputs must be finite")
    np.savez(
        out_dir / GOLDEN_FILE,
        pixels=pixels,
        input_ids=ids,
        image_embeddings=image_golden,
        text_embeddings=text_golden,
    )

    hashes = {}
    for name in (IMAGE_FILE, TEXT_FILE, VOCAB_FILE, GOLDEN_FILE):
        hashes[name] = hashlib.sha256((out_dir / name).read_bytes()).hexdigest()
    (out_dir / MANIFEST_FILE).write_text(
        json.dumps(
            {
                "model_id": f"stub-export-s{seed}",
                "embedding_dim": EMBED_DIM,
                "context_length": CONTEXT_LENGTH,
                "bpe_source": "synthetic",
                "files": {name: {"sha256": digest} for name, digest in hashes.items()},
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return hashes
