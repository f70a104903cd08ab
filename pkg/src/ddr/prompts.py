"""Degradation categories and the text prompt pairs that describe them.

Each degradation type is described by two sentences built from one shared
template: one wording for a degraded photo ("low-quality") and one for a
clean photo ("high-quality"). Encoding both and subtracting gives the
feature-space direction for that degradation (see :mod:`ddr.core`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .exceptions import ConfigurationError


class DegradationType(str, Enum):
    """The five supported degradation categories."""

    COLOR = "color"
    NOISE = "noise"
    BLUR = "blur"
    EXPOSURE = "exposure"
    CONTENT = "content"

    @classmethod
    def parse(cls, name: str) -> "DegradationType":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(t.value for t in cls)
            raise ConfigurationError(
                f"unknown degradation type {name!r} (expected one of: {valid})"
            ) from None


DEGRADED_TEMPLATE = "A {} photo with low-quality."
CLEAN_TEMPLATE = "A {} photo with high-quality."

# Degraded / clean wording substituted into the templates, per type.
_PROMPT_WORDS: dict[DegradationType, tuple[str, str]] = {
    DegradationType.COLOR: ("unnatural color", "real color"),
    DegradationType.NOISE: ("noise degraded", "clean"),
    DegradationType.BLUR: ("blurry", "sharp"),
    DegradationType.EXPOSURE: ("unnatural exposure", "natural exposure"),
    DegradationType.CONTENT: ("bad content", "clear content"),
}

# Default type sets: quality scoring mixes four degradations; restoration
# objectives use three.
BIQA_TYPES: tuple[DegradationType, ...] = (
    DegradationType.COLOR,
    DegradationType.NOISE,
    DegradationType.BLUR,
    DegradationType.EXPOSURE,
)
RESTORATION_TYPES: tuple[DegradationType, ...] = (
    DegradationType.COLOR,
    DegradationType.CONTENT,
    DegradationType.BLUR,
)


@dataclass(frozen=True)
class PromptPair:
    """Degraded and clean prompt texts for one degradation type."""

    degradation: DegradationType
    degraded_prompt: str
    clean_prompt: str

    def __post_init__(self) -> None:
        if not self.degraded_prompt.strip() or not self.clean_prompt.strip():
            raise ConfigurationError(
                f"prompt pair for {self.degradation.value!r} has an empty prompt"
            )
        if self.degraded_prompt == self.clean_prompt:
            raise ConfigurationError(
                f"prompt pair for {self.degradation.value!r} must use two "
                f"different prompts (got {self.degraded_prompt!r} twice)"
            )


def default_prompt_pair(degradation: DegradationType) -> PromptPair:
    """The stock prompt pair for one degradation type."""
    degraded_word, clean_word = _PROMPT_WORDS[degradation]
    return PromptPair(
        degradation=degradation,
        degraded_prompt=DEGRADED_TEMPLATE.format(degraded_word),
        clean_prompt=CLEAN_TEMPLATE.format(clean_word),
    )


def default_prompt_pairs(
    types: Iterable[DegradationType] = BIQA_TYPES,
) -> tuple[PromptPair, ...]:
    """Stock prompt pairs for an iterable of degradation types."""
    return tuple(default_prompt_pair(t) for t in types)
