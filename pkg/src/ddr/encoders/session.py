"""Encoder sessions: loaded graphs behind a neutral inference interface.

A session wraps one frozen graph (image or text encoder), validates its I/O
signature against the manifest, and exposes pure encode calls that return
float64 feature vectors. Sessions are safe for concurrent read-only use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..core import (
    ADAPTATION_EPSILON,
    DegradationDirection,
    DegradationSet,
    as_feature_vector,
    degradation_direction,
)
from ..exceptions import DegenerateDirectionError, SessionError
from ..onnx import GraphRunner, load_model
from ..prompts import PromptPair
from .assets import (
    IMAGE_GRAPH_FILE,
    TEXT_GRAPH_FILE,
    VOCAB_FILE,
    AssetManifest,
    load_asset_manifest,
)
from .preprocess import TARGET_SIZE
from .tokenizer import CONTEXT_LENGTH, ClipTokenizer, TokenSequence

IMAGE_KIND = "image"
TEXT_KIND = "text"


@dataclass(frozen=True)
class EncoderSession:
    """One loaded encoder graph plus its identity and dimensions."""

    kind: str
    model_id: str
    embedding_dim: int
    runner: GraphRunner
    input_name: str
    output_name: str

    @classmethod
    def load(cls, manifest: AssetManifest, kind: str) -> "EncoderSession":
        if kind not in (IMAGE_KIND, TEXT_KIND):
            raise SessionError(f"unknown session kind {kind!r}")
        filename = IMAGE_GRAPH_FILE if kind == IMAGE_KIND else TEXT_GRAPH_FILE
        model = load_model(manifest.path(filename))
        runner = GraphRunner(model)
        if len(runner.inputs) != 1 or len(runner.outputs) != 1:
            raise SessionError(
                f"{filename} must have exactly one input and one output"
            )
        inp, out = runner.inputs[0], runner.outputs[0]
        want_shape = (
            (3, TARGET_SIZE, TARGET_SIZE) if kind == IMAGE_KIND else (CONTEXT_LENGTH,)
        )
        fixed = tuple(d for d in inp.shape[1:])
        if fixed != want_shape:
            raise SessionError(
                f"{filename}: input shape {inp.shape} does not match the "
                f"(batch, {', '.join(map(str, want_shape))}) contract"
            )
        out_dim = out.shape[-1] if out.shape else None
        if out_dim != manifest.embedding_dim:
            raise SessionError(
                f"{filename}: output dimension {out_dim} does not match "
                f"manifest embedding_dim {manifest.embedding_dim}"
            )
        return cls(
            kind=kind,
            model_id=manifest.model_id,
            embedding_dim=manifest.embedding_dim,
            runner=runner,
            input_name=inp.name,
            output_name=out.name,
        )


@dataclass(frozen=True)
class AssetBundle:
    """Everything loaded from one assets directory."""

    manifest: AssetManifest
    image_session: EncoderSession
    text_session: EncoderSession
    tokenizer: ClipTokenizer


def load_assets(assets_dir, verify_hashes: bool = True) -> AssetBundle:
    manifest = load_asset_manifest(assets_dir, verify_hashes=verify_hashes)
    return AssetBundle(
        manifest=manifest,
        image_session=EncoderSession.load(manifest, IMAGE_KIND),
        text_session=EncoderSession.load(manifest, TEXT_KIND),
        tokenizer=ClipTokenizer(manifest.path(VOCAB_FILE)),
    )


def _run_batch(session: EncoderSession, batch: np.ndarray) -> np.ndarray:
    out = session.runner.run({session.input_name: batch})[session.output_name]
    if out.shape != (batch.shape[0], session.embedding_dim):
        raise SessionError(
            f"encoder returned shape {out.shape}, expected "
            f"({batch.shape[0]}, {session.embedding_dim})"
        )
    return out


def encode_image_batch(session: EncoderSession, tensors: np.ndarray) -> np.ndarray:
    """Encode an (N, 3, 224, 224) float32 batch to (N, D) float64 features."""
    if session.kind != IMAGE_KIND:
        raise SessionError("encode_image requires an image-encoder session")
    batch = np.asarray(tensors, dtype=np.float32)
    if batch.ndim != 4:
        raise SessionError(f"image batch must be rank 4, got shape {batch.shape}")
    out = _run_batch(session, batch)
    return out.astype(np.float64)


def encode_image(session: EncoderSession, tensor: np.ndarray) -> np.ndarray:
    """Encode one preprocessed (3, 224, 224) tensor to a feature vector."""
    batch = np.asarray(tensor, dtype=np.float32)[None, ...]
    feat = encode_image_batch(session, batch)[0]
    return as_feature_vector(feat, expected_dim=session.embedding_dim)


def encode_text_batch(
    session: EncoderSession, token_sequences: Sequence[TokenSequence]
) -> np.ndarray:
    """Encode token sequences to (N, D) float64 features."""
    if session.kind != TEXT_KIND:
        raise SessionError("encode_text requires a text-encoder session")
    batch = np.stack([seq.to_array() for seq in token_sequences], axis=0)
    out = _run_batch(session, batch)
    return out.astype(np.float64)


def encode_text(session: EncoderSession, tokens: TokenSequence) -> np.ndarray:
    """Encode one token sequence to a feature vector."""
    feat = encode_text_batch(session, [tokens])[0]
    return as_feature_vector(feat, expected_dim=session.embedding_dim)


def build_degradation_set(
    prompt_pairs: Iterable[PromptPair],
    text_session: EncoderSession,
    tokenizer: ClipTokenizer,
) -> DegradationSet:
    """Encode prompt pairs into reusable degradation directions.

    Directions depend only on prompt text and model assets, never on any
    image: build once and reuse for every image scored.
    """
    pairs = list(prompt_pairs)
    if not pairs:
        raise DegenerateDirectionError("no prompt pairs given")
    sequences: list[TokenSequence] = []
    for pair in pairs:
        sequences.append(tokenizer.tokenize(pair.degraded_prompt))
        sequences.append(tokenizer.tokenize(pair.clean_prompt))
    features = encode_text_batch(text_session, sequences)
    directions = []
    for idx, pair in enumerate(pairs):
        direction = degradation_direction(features[2 * idx], features[2 * idx + 1])
        if float(direction.std()) <= ADAPTATION_EPSILON:
            raise DegenerateDirectionError(
                f"degradation {pair.degradation.value!r}: prompt pair produces a "
                "(near-)constant direction"
            )
        directions.append(
            DegradationDirection(degradation=pair.degradation, direction=direction)
        )
    return DegradationSet.from_directions(directions)
