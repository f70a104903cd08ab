#!/usr/bin/env python3
"""Regenerates everything under tests/fixtures/ deterministically.

Produces:
  stub_assets/   tiny random-weight encoder graphs with the production I/O
                 signature, a synthetic-but-format-identical BPE merges file,
                 and a manifest with sha256 hashes
  images/        seeded synthetic test images plus a labeled manifest.csv
  golden/        frozen oracle outputs: reference tokenizer ids, stub
                 embedding probes, and canonical CLI reports

The tokenizer reference ids are computed here with an independent port of
the published byte-pair encoding algorithm (stdlib-re ASCII splitter,
index-scan merge loop) so the test suite compares the production tokenizer
against genuinely independently produced values. Everything is pure
function-of-seed; rerunning the script must leave git clean.
"""

from __future__ import annotations

import gzip
import io
import json
import re
import sys
from collections import Counter
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "tests" / "fixtures"

sys.path.insert(0, str(REPO / "src"))

from ddr.degrade import DegradationKind, DegradationSpec, apply  # noqa: E402
from ddr.encoders.tokenizer import (  # noqa: E402
    END_OF_TEXT_ID,
    EXPECTED_MERGES,
    START_OF_TEXT_ID,
    CONTEXT_LENGTH,
    byte_to_unicode,
)
from ddr.images import save_image  # noqa: E402
from ddr.onnx import (  # noqa: E402
    Graph,
    Model,
    Node,
    TENSOR_FLOAT,
    TENSOR_INT64,
    ValueInfo,
    save_model,
)
from ddr.prompts import DegradationType, default_prompt_pair  # noqa: E402

SEED = 20240613
MODEL_ID = "stub-encoder-v1"
EMBEDDING_DIM = 512

# ---------------------------------------------------------------------------
# synthetic merges file
# ---------------------------------------------------------------------------

# Deterministic training corpus for the learned portion of the merges.
# Plain English heavy on the vocabulary the default prompts use.
TRAINING_CORPUS = """
a photo with low quality shows blurry content and unnatural color
a photo with high quality shows sharp content and real color
the blurry photo was degraded by noise and bad exposure
the sharp photo stayed clean with natural exposure and clear content
a noisy sensor makes a noise degraded photo look grainy and unclean
a clean capture keeps the image crisp and the colors look real
unnatural exposure makes highlights clip and shadows block up badly
natural exposure keeps highlights and shadows balanced in the photo
bad content looks muddled while clear content reads instantly
color shifts make skin tones look unnatural in many photos
real color rendering keeps the scene believable and pleasant
blur from motion or focus error softens fine detail everywhere
sharp lenses resolve fine detail and keep edges crisp and clean
noise rises in dark scenes and degrades smooth gradients badly
exposure errors waste dynamic range and flatten the tonal curve
quality falls when blur noise and color errors stack together
quality rises when the capture is clean sharp and well exposed
low light photos often show noise blur and unnatural color together
high end cameras keep photos clean and sharp with natural color
a degraded image loses content that a clear image preserves
photos with good quality keep clear content and real color
photos with poor quality show bad content and heavy degradation
the photographer checks exposure color and sharpness before shooting
an image descriptor should react to blur noise exposure and color
degradation of any kind moves the photo away from a clean look
a quality score should rise for clean photos and fall for degraded ones
with practice you can spot unnatural color and bad exposure quickly
clear content with natural exposure and real color reads as high quality
blurry photos with noise degraded texture read as low quality
every photo tells a story when the content is clear and sharp
"""

# Padding merges use byte symbols that never occur in ASCII text, so they
# are inert for the test corpus while keeping the published file structure.


def _train_merges(corpus: str) -> list[tuple[str, str]]:
    """Frequency-based byte-pair merge training, deterministic."""
    words = Counter(corpus.split())
    sequences: dict[tuple[str, ...], int] = {}
    for word, count in sorted(words.items()):
        symbols = tuple(word[:-1]) + (word[-1] + "</w>",)
        sequences[symbols] = sequences.get(symbols, 0) + count

    byte_chars = list(byte_to_unicode().values())
    taken = set(byte_chars) | {c + "</w>" for c in byte_chars}
    merges: list[tuple[str, str]] = []
    while True:
        pair_counts: Counter = Counter()
        for symbols, count in sequences.items():
            for pair in zip(symbols, symbols[1:]):
                pair_counts[pair] += count
        candidates = [
            (count, pair)
            for pair, count in pair_counts.items()
            if count >= 2 and pair[0] + pair[1] not in taken
        ]
        if not candidates:
            break
        # Highest count first; ties resolved lexicographically.
        _, best = min(candidates, key=lambda item: (-item[0], item[1]))
        merges.append(best)
        taken.add(best[0] + best[1])
        merged_token = best[0] + best[1]
        updated: dict[tuple[str, ...], int] = {}
        for symbols, count in sequences.items():
            out = []
            i = 0
            while i < len(symbols):
                if (
                    i + 1 < len(symbols)
                    and symbols[i] == best[0]
                    and symbols[i + 1] == best[1]
                ):
                    out.append(merged_token)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            key = tuple(out)
            updated[key] = updated.get(key, 0) + count
        sequences = updated
    return merges


def _filler_merges(needed: int) -> list[tuple[str, str]]:
    """Inert merges over the non-ASCII byte symbols, unique by construction."""
    mapping = byte_to_unicode()
    exotic = [
        mapping[b]
        for b in range(256)
        if not (33 <= b <= 126 or 161 <= b <= 172 or 174 <= b <= 255)
    ]
    fillers: list[tuple[str, str]] = []
    level1: list[str] = []
    for a in exotic:
        for b in exotic:
            if len(fillers) == needed:
                return fillers
            fillers.append((a, b))
            level1.append(a + b)
    for token in level1:
        for c in exotic:
            if len(fillers) == needed:
                return fillers
            fillers.append((token, c))
    raise RuntimeError("filler space exhausted")


def build_vocab_file(path: Path) -> None:
    trained = _train_merges(TRAINING_CORPUS)
    fillers = _filler_merges(EXPECTED_MERGES - len(trained))
    lines = ["#version: 0.2"]
    lines.extend(f"{a} {b}" for a, b in trained + fillers)
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    buf = io.BytesIO()
    with gzip.GzipFile(fileobj=buf, mode="wb", filename="", mtime=0) as gz:
        gz.write(payload)
    path.write_bytes(buf.getvalue())
    print(f"  vocab: {len(trained)} trained + {len(fillers)} filler merges")


# ---------------------------------------------------------------------------
# independent reference tokenizer (published-algorithm port, ASCII corpus)
# ---------------------------------------------------------------------------

_ASCII_PATTERN = re.compile(
    r"<\|startoftext\|>|<\|endoftext\|>|'s|'t|'re|'ve|'m|'ll|'d|[a-z]+|[0-9]|[^\sa-z0-9]+"
)


def _reference_vocab(merges_path: Path):
    with gzip.open(merges_path, "rt", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    merges = [tuple(line.split()) for line in lines[1 : 1 + EXPECTED_MERGES]]
    byte_chars = list(byte_to_unicode().values())
    vocab = byte_chars + [c + "</w>" for c in byte_chars]
    vocab.extend("".join(m) for m in merges)
    vocab.extend(["<|startoftext|>", "<|endoftext|>"])
    encoder = {tok: i for i, tok in enumerate(vocab)}
    ranks = {pair: i for i, pair in enumerate(merges)}
    return encoder, ranks


def _get_pairs(word: tuple[str, ...]) -> set:
    return {(a, b) for a, b in zip(word, word[1:])}


def _reference_bpe(token: str, ranks) -> tuple[str, ...]:
    word = tuple(token[:-1]) + (token[-1] + "</w>",)
    if len(word) == 1:
        return word
    pairs = _get_pairs(word)
    while True:
        bigram = min(pairs, key=lambda p: ranks.get(p, float("inf")))
        if bigram not in ranks:
            break
        first, second = bigram
        new_word: list[str] = []
        i = 0
        while i < len(word):
            try:
                j = word.index(first, i)
            except ValueError:
                new_word.extend(word[i:])
                break
            new_word.extend(word[i:j])
            i = j
            if word[i] == first and i < len(word) - 1 and word[i + 1] == second:
                new_word.append(first + second)
                i += 2
            else:
                new_word.append(word[i])
                i += 1
        word = tuple(new_word)
        if len(word) == 1:
            break
        pairs = _get_pairs(word)
    return word


def reference_sequence(text: str, encoder, ranks) -> list[int]:
    cleaned = " ".join(text.split()).lower()
    byte_enc = byte_to_unicode()
    ids: list[int] = []
    for word in _ASCII_PATTERN.findall(cleaned):
        if word in ("<|startoftext|>", "<|endoftext|>"):
            ids.append(encoder[word])
            continue
        mapped = "".join(byte_enc[b] for b in word.encode("utf-8"))
        ids.extend(encoder[part] for part in _reference_bpe(mapped, ranks))
    if len(ids) > CONTEXT_LENGTH - 2:
        raise ValueError(f"corpus string too long: {text!r}")
    pad = CONTEXT_LENGTH - 2 - len(ids)
    return [START_OF_TEXT_ID, *ids, END_OF_TEXT_ID, *([0] * pad)]


PARITY_CORPUS = [
    # all default prompt texts, degraded and clean
    *[
        text
        for t in DegradationType
        for text in (
            default_prompt_pair(t).degraded_prompt,
            default_prompt_pair(t).clean_prompt,
        )
    ],
    "a",
    "a photo",
    "an image",
    "hello world",
    "sharp edges everywhere",
    "the quick brown fox jumps over the lazy dog",
    "it's a clean photo",
    "we're testing tokenizers",
    "i'll check you've done it",
    "don't stop",
    "photo, photo; photo!",
    "pixel-perfect photos",
    "low-quality",
    "high-quality",
    "42 megapixels",
    "iso 3200 noise",
    "f/2.8 aperture",
    "100% crop",
    "image #1 of 10",
    "...ellipsis start",
    "trailing spaces   ",
    "   leading whitespace",
    "tabs\tand\nnewlines collapse",
    "MIXED Case PHOTO",
    "bright bright bright",
    "under-exposed shot",
    "over-exposed highlights",
    "color cast correction",
    "natural light portrait",
    "unnatural saturation levels",
    "noise reduction artifacts",
    "sharpening halos visible",
    "banding in the sky",
    "motion blur streaks",
    "out of focus background",
    "crisp foreground detail",
    "washed out colors",
    "deep blacks and bright whites",
    "a a a a a",
    "zzz qqq xxxy",
    "the end.",
    "(parentheses) [brackets] {braces}",
    "quotes 'single' and \"double\"",
    "semi;colon:test",
    "dash-dash--triple---dash",
    "email@example.com",
    "url http://example.com/path",
    "resolution 1920x1080",
    "hdr tone mapping",
    "white balance 5600k",
    "it's sharp; isn't it?",
]


def build_tokenizer_fixture(vocab_path: Path, out_path: Path) -> None:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    encoder, ranks = _reference_vocab(vocab_path)
    entries = [
        {"text": text, "ids": reference_sequence(text, encoder, ranks)}
        for text in PARITY_CORPUS
    ]
    out_path.write_text(
        json.dumps({"corpus": entries}, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"  tokenizer parity corpus: {len(entries)} strings")


# ---------------------------------------------------------------------------
# stub encoder graphs
# ---------------------------------------------------------------------------

def build_image_stub(rng: np.random.Generator) -> Model:
    w1 = (rng.standard_normal((147, 64)) / np.sqrt(147.0)).astype(np.float32)
    b1 = (rng.standard_normal(64) * 0.05).astype(np.float32)
    w2 = (rng.standard_normal((64, EMBEDDING_DIM)) / np.sqrt(64.0)).astype(np.float32)
    b2 = (rng.standard_normal(EMBEDDING_DIM) * 0.05).astype(np.float32)
    graph = Graph(
        name="stub_image_encoder",
        nodes=[
            Node("Reshape", ["pixel_values", "pool_shape"], ["windows"]),
            Node("ReduceMean", ["windows"], ["pooled"], {"axes": [3, 5], "keepdims": 0}),
            Node("Reshape", ["pooled", "flat_shape"], ["flat"]),
            Node("MatMul", ["flat", "w1"], ["h1"]),
            Node("Add", ["h1", "b1"], ["h1b"]),
            Node("Tanh", ["h1b"], ["act"]),
            Node("MatMul", ["act", "w2"], ["h2"]),
            Node("Add", ["h2", "b2"], ["embedding"]),
        ],
        initializers={
            "pool_shape": np.array([0, 3, 7, 32, 7, 32], dtype=np.int64),
            "flat_shape": np.array([0, 147], dtype=np.int64),
            "w1": w1,
            "b1": b1,
            "w2": w2,
            "b2": b2,
        },
        inputs=[ValueInfo("pixel_values", TENSOR_FLOAT, ("batch", 3, 224, 224))],
        outputs=[ValueInfo("embedding", TENSOR_FLOAT, ("batch", EMBEDDING_DIM))],
    )
    return Model(graph=graph, producer_name="ddr-test-fixtures")


def build_text_stub(rng: np.random.Generator) -> Model:
    w1 = (rng.standard_normal((77, 64)) / np.sqrt(77.0)).astype(np.float32)
    b1 = (rng.standard_normal(64) * 0.05).astype(np.float32)
    w2 = (rng.standard_normal((64, EMBEDDING_DIM)) / np.sqrt(64.0)).astype(np.float32)
    b2 = (rng.standard_normal(EMBEDDING_DIM) * 0.05).astype(np.float32)
    graph = Graph(
        name="stub_text_encoder",
        nodes=[
            Node("Cast", ["input_ids"], ["ids_float"], {"to": TENSOR_FLOAT}),
            Node("Mul", ["ids_float", "id_scale"], ["scaled"]),
            Node("MatMul", ["scaled", "w1"], ["h1"]),
            Node("Add", ["h1", "b1"], ["h1b"]),
            Node("Tanh", ["h1b"], ["act"]),
            Node("MatMul", ["act", "w2"], ["h2"]),
            Node("Add", ["h2", "b2"], ["embedding"]),
        ],
        initializers={
            "id_scale": np.array(1.0 / END_OF_TEXT_ID, dtype=np.float32),
            "w1": w1,
            "b1": b1,
            "w2": w2,
            "b2": b2,
        },
        inputs=[ValueInfo("input_ids", TENSOR_INT64, ("batch", 77))],
        outputs=[ValueInfo("embedding", TENSOR_FLOAT, ("batch", EMBEDDING_DIM))],
    )
    return Model(graph=graph, producer_name="ddr-test-fixtures")


def build_stub_assets(assets_dir: Path) -> None:
    from ddr.encoders.assets import sha256_file

    assets_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    save_model(build_image_stub(rng), assets_dir / "image_encoder.onnx")
    save_model(build_text_stub(rng), assets_dir / "text_encoder.onnx")
    build_vocab_file(assets_dir / "bpe_vocab.txt.gz")
    manifest = {
        "model_id": MODEL_ID,
        "embedding_dim": EMBEDDING_DIM,
        "context_length": CONTEXT_LENGTH,
        "files": {
            name: {"sha256": sha256_file(assets_dir / name)}
            for name in ("image_encoder.onnx", "text_encoder.onnx", "bpe_vocab.txt.gz")
        },
    }
    (assets_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"  stub assets in {assets_dir}")


# ---------------------------------------------------------------------------
# fixture images
# ---------------------------------------------------------------------------

def _gradient_disk(h, w, rng):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    r = np.stack(
        [
            xx / w,
            0.3 + 0.4 * yy / h,
            0.8 - 0.5 * xx / w,
        ],
        axis=-1,
    )
    cy, cx = h * 0.45, w * 0.6
    disk = ((yy - cy) ** 2 + (xx - cx) ** 2) < (min(h, w) * 0.22) ** 2
    r[disk] = [0.9, 0.75, 0.2]
    return np.clip(r + rng.random((h, w, 3)) * 0.02, 0, 1)


def _checker_noise(h, w, rng):
    yy, xx = np.mgrid[0:h, 0:w]
    checker = ((xx // 8 + yy // 8) % 2).astype(np.float64)
    img = np.stack([checker * 0.8 + 0.1, 1.0 - checker * 0.7, checker * 0.5 + 0.25], -1)
    return np.clip(img + rng.standard_normal((h, w, 3)) * 0.05, 0, 1)


def _soft_blobs(h, w, rng):
    img = rng.random((h, w, 3)) * 0.4 + 0.3
    return apply(img, DegradationSpec(DegradationKind.GAUSSIAN_BLUR, 4.0))


def _color_bands(h, w, rng):
    xx = np.mgrid[0:h, 0:w][1]
    bands = (xx * 6 // w) % 6
    palette = np.array(
        [
            [0.95, 0.1, 0.1],
            [0.95, 0.7, 0.05],
            [0.1, 0.8, 0.2],
            [0.05, 0.6, 0.9],
            [0.3, 0.15, 0.85],
            [0.9, 0.2, 0.7],
        ]
    )
    img = palette[bands]
    return np.clip(img + rng.random((h, w, 3)) * 0.03, 0, 1)


def _gray_texture(h, w, rng):
    base = rng.random((h, w, 1)) * 0.12 + 0.44
    return np.repeat(base, 3, axis=2) + rng.standard_normal((h, w, 3)) * 0.01


def _natural_mix(h, w, rng):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    sky = np.stack(
        [0.35 + 0.2 * yy / h, 0.5 + 0.25 * yy / h, 0.85 - 0.15 * yy / h], axis=-1
    )
    horizon = int(h * 0.55)
    ground = np.stack(
        [
            0.25 + 0.1 * np.sin(xx / 5.0),
            0.45 + 0.08 * np.sin(xx / 3.0 + yy / 7.0),
            0.2 + 0.05 * np.cos(xx / 9.0),
        ],
        axis=-1,
    )
    img = sky.copy()
    img[horizon:] = ground[horizon:]
    # a few rectangular "buildings" with crisp edges
    for k in range(4):
        x0 = int(w * (0.1 + 0.2 * k))
        bw = int(w * 0.08)
        bh = int(h * (0.25 + 0.07 * k))
        img[horizon - bh : horizon, x0 : x0 + bw] = [
            0.2 + 0.1 * k,
            0.18 + 0.08 * k,
            0.22,
        ]
    img += rng.standard_normal((h, w, 3)) * 0.015
    return np.clip(img, 0, 1)


FIXTURE_IMAGES = {
    "img_01.png": (120, 160, _gradient_disk),
    "img_02.png": (120, 160, _checker_noise),
    "img_03.png": (120, 160, _soft_blobs),
    "img_04.png": (120, 160, _color_bands),
    "img_05.png": (120, 160, _gray_texture),
    "natural_192x256.png": (192, 256, _natural_mix),
    "geometry_336x448.png": (336, 448, _natural_mix),
}

MANIFEST_MOS = {
    "img_01.png": 72.5,
    "img_02.png": 31.0,
    "img_03.png": 55.25,
    "img_04.png": 88.0,
    "img_05.png": 12.75,
}


def build_images(images_dir: Path) -> None:
    images_dir.mkdir(parents=True, exist_ok=True)
    for idx, (name, (h, w, fn)) in enumerate(sorted(FIXTURE_IMAGES.items())):
        rng = np.random.default_rng(SEED + 1000 + idx)
        save_image(fn(h, w, rng), images_dir / name)
    lines = ["path,mos"]
    lines.extend(f"images/{name},{mos}" for name, mos in sorted(MANIFEST_MOS.items()))
    (images_dir.parent / "manifest.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8"
    )
    print(f"  {len(FIXTURE_IMAGES)} images + manifest.csv")


# ---------------------------------------------------------------------------
# golden embeddings and CLI reports
# ---------------------------------------------------------------------------

def build_embedding_goldens(assets_dir: Path, golden_dir: Path) -> None:
    from ddr.encoders.session import encode_image, encode_text, load_assets

    golden_dir.mkdir(parents=True, exist_ok=True)
    bundle = load_assets(assets_dir)
    zero = np.zeros((3, 224, 224), dtype=np.float32)
    np.save(golden_dir / "stub_image_zero.npy", encode_image(bundle.image_session, zero))
    probe_text = "A blurry photo with low-quality."
    tokens = bundle.tokenizer.tokenize(probe_text)
    np.save(golden_dir / "stub_text_probe.npy", encode_text(bundle.text_session, tokens))
    (golden_dir / "stub_text_probe.json").write_text(
        json.dumps({"text": probe_text, "ids": list(tokens.ids)}, indent=1) + "\n",
        encoding="utf-8",
    )
    print("  embedding goldens")


def build_cli_goldens(fixtures_dir: Path) -> None:
    import contextlib
    import os

    from ddr.cli import main as cli_main

    golden = fixtures_dir / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    cwd = os.getcwd()
    try:
        os.chdir(fixtures_dir)
        rc = cli_main(
            [
                "score",
                "images/img_01.png",
                "--assets",
                "stub_assets",
                "--out",
                "golden/score_img_01.json",
                "--no-figures",
            ]
        )
        assert rc == 0, f"score golden run failed with exit {rc}"
        rc = cli_main(
            [
                "eval",
                "manifest.csv",
                "--assets",
                "stub_assets",
                "--out",
                "golden/eval_fixture.json",
                "--no-figures",
            ]
        )
        assert rc == 0, f"eval golden run failed with exit {rc}"
    finally:
        os.chdir(cwd)
    print("  CLI goldens")


def main(argv=None) -> int:
    stages = set((argv or sys.argv[1:]) or ["assets", "goldens"])
    FIXTURES.mkdir(parents=True, exist_ok=True)
    if "assets" in stages:
        build_stub_assets(FIXTURES / "stub_assets")
        build_images(FIXTURES / "images")
        build_tokenizer_fixture(
            FIXTURES / "stub_assets" / "bpe_vocab.txt.gz",
            FIXTURES / "golden" / "tokenizer_parity.json",
        )
    if "goldens" in stages:
        build_embedding_goldens(FIXTURES / "stub_assets", FIXTURES / "golden")
        build_cli_goldens(FIXTURES)
    print("done")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
