"""Image/text encoding: preprocessing, tokenization, and graph sessions."""

from .assets import (
    IMAGE_GRAPH_FILE,
    MANIFEST_FILE,
    REQUIRED_FILES,
    TEXT_GRAPH_FILE,
    VOCAB_FILE,
    AssetManifest,
    load_asset_manifest,
    sha256_file,
)
from .preprocess import CHANNEL_MEAN, CHANNEL_STD, TARGET_SIZE, preprocess, preprocess_batch
from .session import (
    AssetBundle,
    EncoderSession,
    build_degradation_set,
    encode_image,
    encode_image_batch,
    encode_text,
    encode_text_batch,
    load_assets,
)
from .tokenizer import (
    CONTEXT_LENGTH,
    END_OF_TEXT_ID,
    MAX_PROMPT_TOKENS,
    START_OF_TEXT_ID,
    VOCAB_SIZE,
    ClipTokenizer,
    TokenSequence,
)

__all__ = [
    "AssetBundle",
    "AssetManifest",
    "CHANNEL_MEAN",
    "CHANNEL_STD",
    "CONTEXT_LENGTH",
    "ClipTokenizer",
    "EncoderSession",
    "END_OF_TEXT_ID",
    "IMAGE_GRAPH_FILE",
    "MANIFEST_FILE",
    "MAX_PROMPT_TOKENS",
    "REQUIRED_FILES",
    "START_OF_TEXT_ID",
    "TARGET_SIZE",
    "TEXT_GRAPH_FILE",
    "TokenSequence",
    "VOCAB_FILE",
    "VOCAB_SIZE",
    "build_degradation_set",
    "encode_image",
    "encode_image_batch",
    "encode_text",
    "encode_text_batch",
    "load_asset_manifest",
    "load_assets",
    "preprocess",
    "preprocess_batch",
    "sha256_file",
]
