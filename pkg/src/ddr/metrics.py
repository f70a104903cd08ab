"""Reference fidelity metrics and per-image descriptors.

PSNR (peak 1.0) and SSIM (standard constants, 11x11 Gaussian window) for
restoration evaluation, plus two cheap descriptors used by the correlation
study: a colorfulness statistic over opponent channels and a gradient-energy
sharpness proxy.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .exceptions import DegenerateInputError, DimensionMismatchError
from .images import luma, validate_image

SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_WINDOW_SIZE = 11
SSIM_WINDOW_SIGMA = 1.5


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    x = validate_image(a)
    y = validate_image(b)
    if x.shape != y.shape:
        raise DimensionMismatchError(
            f"image shapes differ: {x.shape} vs {y.shape}"
        )
    return x, y


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB with peak value 1.0.

    Identical images return +inf (report layers encode that as a
    distinguished "identical" value).
    """
    x, y = _pair(a, b)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def ssim_window(size: int = SSIM_WINDOW_SIZE, sigma: float = SSIM_WINDOW_SIGMA) -> np.ndarray:
    """Normalized 2-D Gaussian window."""
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-0.5 * (coords / sigma) ** 2)
    window = np.outer(g, g)
    return window / window.sum()


def _windowed(img: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Valid-mode correlation with the window (edges cropped)."""
    pad = window.shape[0] // 2
    full = ndimage.correlate(img, window, mode="constant", cval=0.0)
    return full[pad:-pad, pad:-pad]


def ssim(a, b) -> float:
    """Mean structural similarity over luma.

    Standard form: K1=0.01, K2=0.03, 11x11 Gaussian window with sigma 1.5,
    computed on windows fully inside the image.
    """
    x, y = _pair(a, b)
    if min(x.shape[0], x.shape[1]) < SSIM_WINDOW_SIZE:
        raise DegenerateInputError(
            f"image must be at least {SSIM_WINDOW_SIZE} pixels on each side for SSIM"
        )
    lx = luma(x)
    ly = luma(y)
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    window = ssim_window()
    mu_x = _windowed(lx, window)
    mu_y = _windowed(ly, window)
    var_x = _windowed(lx * lx, window) - mu_x * mu_x
    var_y = _windowed(ly * ly, window) - mu_y * mu_y
    cov = _windowed(lx * ly, window) - mu_x * mu_y
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def colorfulness(img) -> float:
    """Colorfulness from opponent-channel statistics.

    rg = R - G, yb = (R + G) / 2 - B;
    M = sqrt(std(rg)^2 + std(yb)^2) + 0.3 * sqrt(mean(rg)^2 + mean(yb)^2),
    with population standard deviations. Zero exactly for achromatic images.
    """
    arr = validate_image(img)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    rg = r - g
    yb = 0.5 * (r + g) - b
    std_term = math.sqrt(float(np.std(rg)) ** 2 + float(np.std(yb)) ** 2)
    mean_term = math.sqrt(float(np.mean(rg)) ** 2 + float(np.mean(yb)) ** 2)
    return std_term + 0.3 * mean_term


def sharpness_proxy(img) -> float:
    """Mean squared central-difference gradient magnitude of luma.

    Averaged over interior pixels where both gradient components exist.
    Zero exactly for constant images; blurring strictly reduces it on
    non-constant images.
    """
    arr = validate_image(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise DegenerateInputError(
            f"sharpness proxy needs at least 3x3 pixels, got {arr.shape[:2]}"
        )
    y = luma(arr)
    gx = (y[:, 2:] - y[:, :-2]) * 0.5
    gy = (y[2:, :] - y[:-2, :]) * 0.5
    mag_sq = gx[1:-1, :] ** 2 + gy[:, 1:-1] ** 2
    return float(mag_sq.mean())
