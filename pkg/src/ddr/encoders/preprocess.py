"""Deterministic image preprocessing for the image encoder.

Bicubic resize so the shorter side is 224, center crop to 224 x 224, then
per-channel standardization with the published constants. Resampling runs on
float32 channels and the result is clamped back to [0, 1] before
standardization, mirroring the saturation of the reference uint8 pipeline.
"""

from __future__ import annotations

import numpy as np
from PIL import Image as PILImage

from ..images import validate_image

TARGET_SIZE = 224
CHANNEL_MEAN = np.array([0.48145466, 0.4578275, 0.40821073], dtype=np.float64)
CHANNEL_STD = np.array([0.26862954, 0.26130258, 0.27577711], dtype=np.float64)


def _resize_shorter_side(arr: np.ndarray, target: int) -> np.ndarray:
    h, w = arr.shape[:2]
    if h <= w:
        new_h, new_w = target, int(target * w / h)
    else:
        new_h, new_w = int(target * h / w), target
    channels = []
    for c in range(3):
        im = PILImage.fromarray(arr[:, :, c].astype(np.float32), mode="F")
        im = im.resize((new_w, new_h), PILImage.Resampling.BICUBIC)
        channels.append(np.asarray(im, dtype=np.float64))
    out = np.stack(channels, axis=-1)
    # Bicubic overshoot is clamped, like saturating uint8 resampling.
    return np.clip(out, 0.0, 1.0)


def _center_crop(arr: np.ndarray, size: int) -> np.ndarray:
    h, w = arr.shape[:2]
    top = int(round((h - size) / 2.0))
    left = int(round((w - size) / 2.0))
    return arr[top : top + size, left : left + size]


def preprocess(img) -> np.ndarray:
    """Image -> standardized float32 tensor of shape (3, 224, 224)."""
    arr = validate_image(img)
    if min(arr.shape[0], arr.shape[1]) != TARGET_SIZE:
        arr = _resize_shorter_side(arr, TARGET_SIZE)
    if arr.shape[:2] != (TARGET_SIZE, TARGET_SIZE):
        arr = _center_crop(arr, TARGET_SIZE)
    standardized = (arr - CHANNEL_MEAN) / CHANNEL_STD
    return standardized.transpose(2, 0, 1).astype(np.float32)


def preprocess_batch(imgs) -> np.ndarray:
    """Stack preprocessed tensors into an (N, 3, 224, 224) batch."""
    return np.stack([preprocess(img) for img in imgs], axis=0)
