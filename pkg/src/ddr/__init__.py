"""Zero-shot image descriptor toolkit.

Measures how strongly an image's deep features react when degradation is
injected — either by degrading pixels and re-encoding, or by fusing a
text-derived degradation direction directly into the feature — and turns the
mean response over several degradation types into a no-reference quality
score. Ships with degradation synthesis, reference fidelity metrics, and a
rank-correlation evaluation harness.
"""

from .core import (
    ADAPTATION_EPSILON,
    DegradationDirection,
    DegradationSet,
    adapt_direction,
    as_feature_vector,
    cosine_disparity,
    ddr_text,
    degradation_direction,
    fuse,
    quality_score,
    vector_stats,
)
from .prompts import (
    BIQA_TYPES,
    RESTORATION_TYPES,
    DegradationType,
    PromptPair,
    default_prompt_pair,
    default_prompt_pairs,
)

__version__ = "0.1.0"

__all__ = [
    "ADAPTATION_EPSILON",
    "BIQA_TYPES",
    "RESTORATION_TYPES",
    "DegradationDirection",
    "DegradationSet",
    "DegradationType",
    "PromptPair",
    "adapt_direction",
    "as_feature_vector",
    "cosine_disparity",
    "ddr_text",
    "default_prompt_pair",
    "default_prompt_pairs",
    "degradation_direction",
    "fuse",
    "quality_score",
    "vector_stats",
    "__version__",
]
