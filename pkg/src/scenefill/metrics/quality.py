"""Full-reference image quality on [0, 1] intensities, optionally restricted to a region."""

from __future__ import annotations

import math

import numpy as np
from skimage.metrics import structural_similarity

from scenefill.core.types import Frame, Mask
from scenefill.errors import InputError


PSNR_CAP_DB = 99.0
SSIM_SIGMA = 1.5
SSIM_WINDOW = 11
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _region(a: Frame, b: Frame, region: Mask | None) -> np.ndarray:
    if a.data.shape != b.data.shape:
        raise InputError(f"frames differ in shape: {a.data.shape} vs {b.data.shape}")
    if region is None:
        return np.ones(a.shape, dtype=bool)
    region.check_matches(a)
    if not region.any():
        raise InputError("metric region is empty")
    return region.data


def psnr(a: Frame, b: Frame, region: Mask | None = None) -> float:
    """10 log10(1 / MSE) over the region; identical inputs give +inf."""
    use = _region(a, b, region)
    mse = float(np.mean((a.data[use] - b.data[use]) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def ssim_map(a: Frame, b: Frame) -> np.ndarray:
    """Per-pixel SSIM with an 11x11 Gaussian window (sigma 1.5), averaged over channels."""
    if a.data.shape != b.data.shape:
        raise InputError(f"frames differ in shape: {a.data.shape} vs {b.data.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise InputError(f"frames of {a.width}x{a.height} are smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    _, full = structural_similarity(
        a.data,
        b.data,
        data_range=1.0,
        channel_axis=2,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        K1=SSIM_K1,
        K2=SSIM_K2,
        full=True,
    )
    return full.mean(axis=2)


def ssim(a: Frame, b: Frame, region: Mask | None = None) -> float:
    """Mean SSIM over the window centres inside the region."""
    use = _region(a, b, region)
    if use.sum() < SSIM_WINDOW * SSIM_WINDOW:
        raise InputError(f"SSIM region has {int(use.sum())} pixels, fewer than one {SSIM_WINDOW}x{SSIM_WINDOW} window")
    return float(np.clip(ssim_map(a, b)[use].mean(), -1.0, 1.0))


def mean_db(values: list[float]) -> float | None:
    """Average of dB values; all-infinite stays infinite, otherwise infinities count as PSNR_CAP_DB."""
    if not values:
        return None
    if all(math.isinf(v) for v in values):
        return math.inf
    return float(np.mean([min(v, PSNR_CAP_DB) for v in values]))


__all__ = ["PSNR_CAP_DB", "mean_db", "psnr", "ssim", "ssim_map"]
