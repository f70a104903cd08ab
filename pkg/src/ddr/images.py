"""Image representation and file ingestion.

An image is an H x W x 3 float64 array in [0, 1], RGB channel order. PNG and
JPEG files are decoded through Pillow; anything Pillow cannot open raises
DataError.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .exceptions import DataError, DimensionMismatchError

# Rec.601 luma weights.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def validate_image(img) -> np.ndarray:
    """Coerce to a float64 H x W x 3 array and check the [0, 1] range."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionMismatchError(
            f"image must be H x W x 3, got shape {arr.shape}"
        )
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatchError("image must have positive height and width")
    if not np.isfinite(arr).all():
        raise DataError("image contains non-finite pixel values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DataError(
            f"pixel values must lie in [0, 1], got range "
            f"[{arr.min():.4g}, {arr.max():.4g}]"
        )
    return arr


def load_image(path) -> np.ndarray:
    """Decode an image file to RGB floats in [0, 1]."""
    path = Path(path)
    try:
        with PILImage.open(path) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float64) / 255.0
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    return arr


def save_image(img, path) -> None:
    """Write an image as 8-bit PNG/JPEG (by extension)."""
    arr = validate_image(img)
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    try:
        PILImage.fromarray(data, mode="RGB").save(Path(path))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot write image {path}: {exc}") from exc


def luma(img) -> np.ndarray:
    """Rec.601 luma channel of an RGB image, shape H x W."""
    arr = validate_image(img)
    return arr @ _LUMA_WEIGHTS
