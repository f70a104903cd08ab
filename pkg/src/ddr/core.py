"""Feature-space math for degradation response scoring.

Every operation here is a pure function on 1-D float64 vectors: building a
degradation direction from two text embeddings, adapting it onto an image
feature's statistics, fusing, measuring cosine disparity, and averaging the
per-degradation responses into a single quality score. Nothing holds state,
so everything is safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .exceptions import (
    DegenerateDirectionError,
    DegenerateInputError,
    DimensionMismatchError,
    UndefinedDisparityError,
)
from .prompts import DegradationType

# Directions whose entries spread less than this cannot be rescaled onto an
# image feature without dividing by (near-)zero.
ADAPTATION_EPSILON = 1e-8


def as_feature_vector(values, expected_dim: int | None = None) -> np.ndarray:
    """Coerce ``values`` to a finite 1-D float64 vector.

    Raises DimensionMismatchError for wrong rank/length and
    DegenerateInputError for non-finite entries.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(
            f"feature vector must be 1-D and non-empty, got shape {v.shape}"
        )
    if expected_dim is not None and v.size != expected_dim:
        raise DimensionMismatchError(
            f"feature vector has length {v.size}, expected {expected_dim}"
        )
    if not np.isfinite(v).all():
        raise DegenerateInputError("feature vector contains non-finite entries")
    return v


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    a = as_feature_vector(x)
    b = as_feature_vector(y)
    if a.size != b.size:
        raise DimensionMismatchError(
            f"vector lengths differ: {a.size} vs {b.size}"
        )
    return a, b


def degradation_direction(t_minus, t_plus) -> np.ndarray:
    """Feature-space degradation direction: degraded-text embedding minus
    clean-text embedding, elementwise."""
    a, b = _pair(t_minus, t_plus)
    return a - b


def vector_stats(v) -> tuple[float, float]:
    """Mean and population standard deviation (divide by N) of the entries."""
    a = as_feature_vector(v)
    if a.size < 2:
        raise DegenerateInputError(
            f"statistics need at least 2 entries, got {a.size}"
        )
    return float(a.mean()), float(a.std())


def adapt_direction(t_d, f) -> np.ndarray:
    """Rescale direction ``t_d`` so its entry statistics match those of ``f``.

    Instance-normalization-style transfer: normalize ``t_d`` to zero mean and
    unit spread, then scale and shift onto ``f``'s mean and spread. Invariant
    to positive rescaling of ``t_d``.
    """
    a, b = _pair(t_d, f)
    mu_t, sd_t = vector_stats(a)
    mu_f, sd_f = vector_stats(b)
    if sd_t <= ADAPTATION_EPSILON:
        raise DegenerateDirectionError(
            f"direction spread {sd_t:.3g} is below {ADAPTATION_EPSILON:g}; "
            "a (near-)constant direction cannot be adapted"
        )
    return sd_f * ((a - mu_t) / sd_t) + mu_f


def fuse(f, t_hat) -> np.ndarray:
    """Inject an adapted degradation direction into an image feature
    (elementwise sum)."""
    a, b = _pair(f, t_hat)
    return a + b


def cosine_disparity(x, y) -> float:
    """One minus cosine similarity: 0 for aligned vectors, 2 for opposite.

    Identical inputs short-circuit to exactly 0; otherwise the cosine is
    clamped to [-1, 1] so the result is always inside [0, 2].
    """
    a, b = _pair(x, y)
    norm_a = math.sqrt(float(np.dot(a, a)))
    norm_b = math.sqrt(float(np.dot(b, b)))
    if norm_a == 0.0 or norm_b == 0.0:
        raise UndefinedDisparityError(
            "cosine disparity is undefined for zero-norm vectors"
        )
    if np.array_equal(a, b):
        return 0.0
    cos = float(np.dot(a, b)) / (norm_a * norm_b)
    cos = min(1.0, max(-1.0, cos))
    return 1.0 - cos


@dataclass(frozen=True)
class DegradationDirection:
    """A feature-space degradation direction tagged with its type."""

    degradation: DegradationType
    direction: np.ndarray

    def __post_init__(self) -> None:
        vec = as_feature_vector(self.direction)
        vec.setflags(write=False)
        object.__setattr__(self, "direction", vec)


@dataclass(frozen=True)
class DegradationSet:
    """An ordered collection of directions, one per degradation type."""

    members: tuple[DegradationDirection, ...]

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise DegenerateInputError("degradation set must not be empty")
        seen: set[DegradationType] = set()
        for m in members:
            if m.degradation in seen:
                raise DegenerateInputError(
                    f"duplicate degradation type {m.degradation.value!r} in set"
                )
            seen.add(m.degradation)
        object.__setattr__(self, "members", members)

    @property
    def types(self) -> tuple[DegradationType, ...]:
        return tuple(m.degradation for m in self.members)

    def __iter__(self) -> Iterator[DegradationDirection]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @classmethod
    def from_directions(
        cls, directions: Iterable[DegradationDirection]
    ) -> "DegradationSet":
        return cls(members=tuple(directions))


def ddr_text(f, direction) -> float:
    """Degradation response of feature ``f`` to one text-derived direction.

    The direction is adapted onto ``f``'s statistics, fused into ``f``, and
    the cosine disparity between original and fused features is returned.
    Accepts a DegradationDirection or a bare vector.
    """
    vec = getattr(direction, "direction", direction)
    f = as_feature_vector(f)
    adapted = adapt_direction(vec, f)
    return cosine_disparity(f, fuse(f, adapted))


def quality_score(f, degradation_set: DegradationSet) -> float:
    """Mean degradation response over a set of directions.

    This is the no-reference quality score: higher values mean the feature
    reacts more strongly to injected degradation, which correlates with
    cleaner images.
    """
    if len(degradation_set) == 0:
        raise DegenerateInputError("degradation set must not be empty")
    scores = []
    for member in degradation_set:
        try:
            scores.append(ddr_text(f, member))
        except DegenerateDirectionError as exc:
            raise DegenerateDirectionError(
                f"degradation {member.degradation.value!r}: {exc}"
            ) from exc
    return float(np.mean(scores))
