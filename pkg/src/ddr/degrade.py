"""Pixel-domain degradation synthesis.

Four handcrafted degradations with a scalar strength knob: separable
Gaussian blur, seeded i.i.d. Gaussian noise, exposure gain in stops, and
desaturation toward luma. Strength 0 is an exact identity for every kind.
Ladders produce one output per strength for monotonicity and distribution
sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .exceptions import ConfigurationError
from .images import luma, validate_image


class DegradationKind(str, Enum):
    GAUSSIAN_BLUR = "gaussian_blur"
    GAUSSIAN_NOISE = "gaussian_noise"
    EXPOSURE = "exposure"
    DESATURATE = "desaturate"

    @classmethod
    def parse(cls, name: str) -> "DegradationKind":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ConfigurationError(
                f"unknown degradation kind {name!r} (expected one of: {valid})"
            ) from None


@dataclass(frozen=True)
class DegradationSpec:
    """One degradation kind plus its strength (and seed, for noise).

    Strength must be non-negative except for exposure, where negative values
    mean under-exposure. The seed applies to Gaussian noise only.
    """

    kind: DegradationKind
    level: float
    seed: int | None = None

    def __post_init__(self) -> None:
        kind = (
            self.kind
            if isinstance(self.kind, DegradationKind)
            else DegradationKind.parse(self.kind)
        )
        object.__setattr__(self, "kind", kind)
        level = float(self.level)
        if not math.isfinite(level):
            raise ConfigurationError(f"degradation level must be finite, got {level}")
        if level < 0 and kind is not DegradationKind.EXPOSURE:
            raise ConfigurationError(
                f"{kind.value} level must be >= 0, got {level}"
            )
        object.__setattr__(self, "level", level)
        if self.seed is not None and kind is not DegradationKind.GAUSSIAN_NOISE:
            raise ConfigurationError(
                f"seed only applies to gaussian_noise, not {kind.value}"
            )
        if kind is DegradationKind.GAUSSIAN_NOISE and self.seed is None:
            object.__setattr__(self, "seed", 0)

    def as_string(self) -> str:
        text = f"{self.kind.value}:{self.level:g}"
        if self.kind is DegradationKind.GAUSSIAN_NOISE:
            text += f":{self.seed}"
        return text


def spec_from_config(obj) -> DegradationSpec:
    """Build a spec from either a ``kind:level[:seed]`` string or a mapping
    with ``kind``/``level`` (and optional ``seed``) keys."""
    if isinstance(obj, DegradationSpec):
        return obj
    if isinstance(obj, str):
        return parse_spec(obj)
    if isinstance(obj, dict):
        unknown = set(obj) - {"kind", "level", "seed"}
        if unknown:
            raise ConfigurationError(
                f"unknown degradation spec keys: {sorted(unknown)}"
            )
        if "kind" not in obj or "level" not in obj:
            raise ConfigurationError(
                f"degradation spec mapping needs 'kind' and 'level', got {obj!r}"
            )
        try:
            level = float(obj["level"])
        except (TypeError, ValueError):
            raise ConfigurationError(f"bad degradation level {obj['level']!r}") from None
        seed = obj.get("seed")
        if seed is not None:
            try:
                seed = int(seed)
            except (TypeError, ValueError):
                raise ConfigurationError(f"bad degradation seed {seed!r}") from None
        return DegradationSpec(kind=DegradationKind.parse(obj["kind"]), level=level, seed=seed)
    raise ConfigurationError(f"cannot build a degradation spec from {obj!r}")


def parse_spec(text: str) -> DegradationSpec:
    """Parse a ``kind:level[:seed]`` spec string."""
    parts = str(text).split(":")
    if len(parts) not in (2, 3):
        raise ConfigurationError(
            f"degradation spec must be kind:level[:seed], got {text!r}"
        )
    kind = DegradationKind.parse(parts[0])
    try:
        level = float(parts[1])
    except ValueError:
        raise ConfigurationError(f"bad degradation level {parts[1]!r}") from None
    seed: int | None = None
    if len(parts) == 3:
        try:
            seed = int(parts[2])
        except ValueError:
            raise ConfigurationError(f"bad degradation seed {parts[2]!r}") from None
    return DegradationSpec(kind=kind, level=level, seed=seed)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps with radius ceil(3*sigma), normalized to sum 1."""
    if sigma <= 0:
        raise ConfigurationError(f"blur sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    return kernel / kernel.sum()


def _blur(img: np.ndarray, sigma: float) -> np.ndarray:
    kernel = gaussian_kernel(sigma)
    out = ndimage.convolve1d(img, kernel, axis=0, mode="reflect")
    out = ndimage.convolve1d(out, kernel, axis=1, mode="reflect")
    return out


def apply(img, spec: DegradationSpec) -> np.ndarray:
    """Degrade an image; same shape out, values clamped to [0, 1].

    Strength 0 returns the input unchanged (exact copy) for every kind.
    """
    arr = validate_image(img)
    if spec.level == 0.0:
        return arr.copy()
    if spec.kind is DegradationKind.GAUSSIAN_BLUR:
        out = _blur(arr, spec.level)
    elif spec.kind is DegradationKind.GAUSSIAN_NOISE:
        rng = np.random.default_rng(spec.seed)
        out = arr + rng.standard_normal(arr.shape) * spec.level
    elif spec.kind is DegradationKind.EXPOSURE:
        out = arr * 2.0 ** spec.level
    elif spec.kind is DegradationKind.DESATURATE:
        amount = min(spec.level, 1.0)
        out = arr + amount * (luma(arr)[..., None] - arr)
    else:  # pragma: no cover - enum is closed
        raise ConfigurationError(f"unknown degradation kind {spec.kind!r}")
    return np.clip(out, 0.0, 1.0)


def ladder(
    img,
    kind: DegradationKind | str,
    levels: Sequence[float],
    seed: int = 0,
) -> list[np.ndarray]:
    """One degraded image per strength, strengths strictly ascending.

    Noise rungs share the given seed so only the strength varies.
    """
    kind = kind if isinstance(kind, DegradationKind) else DegradationKind.parse(kind)
    levels = [float(v) for v in levels]
    if not levels:
        raise ConfigurationError("ladder needs at least one level")
    if levels[0] < 0:
        raise ConfigurationError(f"first ladder level must be >= 0, got {levels[0]}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ConfigurationError(f"ladder levels must be strictly ascending: {levels}")
    rung_seed = seed if kind is DegradationKind.GAUSSIAN_NOISE else None
    return [
        apply(img, DegradationSpec(kind=kind, level=level, seed=rung_seed))
        for level in levels
    ]


def ddr_pixel(img, spec: DegradationSpec, session, metric: Callable | None = None) -> float:
    """Degradation response measured by actually degrading the pixels.

    Encodes the image and its degraded version and returns the disparity
    between the two features (cosine disparity unless another metric is
    given). Strength 0 gives exactly 0.
    """
    from .core import cosine_disparity
    from .encoders.preprocess import preprocess
    from .encoders.session import encode_image

    if metric is None:
        metric = cosine_disparity
    arr = validate_image(img)
    feat = encode_image(session, preprocess(arr))
    feat_degraded = encode_image(session, preprocess(apply(arr, spec)))
    return float(metric(feat, feat_degraded))
