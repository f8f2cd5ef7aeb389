"""Coarse-to-fine variational flow with a masked quadratic data term.

Each pyramid level linearizes brightness constancy around the current flow a few times
(incremental warping) and relaxes the resulting Euler-Lagrange system with pointwise Jacobi
updates. The data term is off on a band around masked pixels, where the smoothness term
alone drives the flow.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from scenefill.core.sampling import remap_bilinear, remap_nearest
from scenefill.flow.backends import FlowParams, exclusion_band, register_backend
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

PRESMOOTH_SIGMA = 0.5
DECIMATION_SIGMA = 1.0
MIN_LEVEL_SIZE = 8


def _downsample(image: np.ndarray) -> np.ndarray:
    sigma = (DECIMATION_SIGMA, DECIMATION_SIGMA) + (0,) * (image.ndim - 2)
    return ndimage.gaussian_filter(image, sigma=sigma, mode="nearest")[::2, ::2]


def _downsample_mask(mask: np.ndarray) -> np.ndarray:
    return ndimage.binary_dilation(mask, structure=np.ones((3, 3), dtype=bool))[::2, ::2]


def _upsample_flow(flow: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    ys, xs = np.mgrid[0 : shape[0], 0 : shape[1]].astype(np.float64)
    coords = np.stack([xs / 2.0, ys / 2.0], axis=-1)
    values, _ = remap_bilinear(flow, coords)
    return 2.0 * values


def _neighbour_mean(field: np.ndarray) -> np.ndarray:
    padded = np.pad(field, 1, mode="edge")
    return 0.25 * (padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:])


def _build_pyramid(
    src: np.ndarray, dst: np.ndarray, src_mask: np.ndarray, dst_mask: np.ndarray, levels: int
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    pyramid = [(src, dst, src_mask, dst_mask)]
    for _ in range(levels - 1):
        s, d, sm, dm = pyramid[-1]
        if min(s.shape[:2]) < 2 * MIN_LEVEL_SIZE:
            break
        pyramid.append((_downsample(s), _downsample(d), _downsample_mask(sm), _downsample_mask(dm)))
    return pyramid


def _solve_level(
    src: np.ndarray,
    dst: np.ndarray,
    src_mask: np.ndarray,
    dst_mask: np.ndarray,
    flow: np.ndarray,
    params: FlowParams,
) -> np.ndarray:
    height, width = src.shape[:2]
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    grid = np.stack([xs, ys], axis=-1)
    lam = params.smoothness_weight
    src_band = exclusion_band(src_mask)
    dst_band = exclusion_band(dst_mask)

    sigma = (PRESMOOTH_SIGMA, PRESMOOTH_SIGMA, 0)
    src = ndimage.gaussian_filter(src, sigma=sigma, mode="nearest")
    dst = ndimage.gaussian_filter(dst, sigma=sigma, mode="nearest")
    src_gy, src_gx = np.gradient(src, axis=(0, 1))

    u0 = flow[..., 0].copy()
    v0 = flow[..., 1].copy()
    for _ in range(params.warps_per_level):
        coords = grid + np.stack([u0, v0], axis=-1)
        warped, inside = remap_bilinear(dst, coords)
        landed_masked, _ = remap_nearest(dst_band, coords)
        rho = (~src_band & inside & ~landed_masked).astype(np.float64)

        warped_gy, warped_gx = np.gradient(warped, axis=(0, 1))
        ix = 0.5 * (src_gx + warped_gx)
        iy = 0.5 * (src_gy + warped_gy)
        it = warped - src

        sxx = rho * np.sum(ix * ix, axis=-1) + lam
        syy = rho * np.sum(iy * iy, axis=-1) + lam
        sxy = rho * np.sum(ix * iy, axis=-1)
        sxt = rho * np.sum(ix * it, axis=-1)
        syt = rho * np.sum(iy * it, axis=-1)
        det = sxx * syy - sxy * sxy

        du = np.zeros_like(u0)
        dv = np.zeros_like(v0)
        for iteration in range(params.iterations_per_level):
            ubar = _neighbour_mean(u0 + du) - u0
            vbar = _neighbour_mean(v0 + dv) - v0
            bx = lam * ubar - sxt
            by = lam * vbar - syt
            du_new = (syy * bx - sxy * by) / det
            dv_new = (sxx * by - sxy * bx) / det
            change = float(np.mean(np.hypot(du_new - du, dv_new - dv)))
            du, dv = du_new, dv_new
            if change < params.convergence_tol:
                break
        logger.debug("level %dx%d: %d iterations, last update %.2e px", width, height, iteration + 1, change)
        u0 = u0 + du
        v0 = v0 + dv
    return np.stack([u0, v0], axis=-1)


def variational_flow(
    src: np.ndarray,
    dst: np.ndarray,
    src_mask: np.ndarray,
    dst_mask: np.ndarray,
    params: FlowParams,
    init: np.ndarray | None = None,
) -> np.ndarray:
    pyramid = _build_pyramid(src, dst, src_mask, dst_mask, params.pyramid_levels)
    coarsest = pyramid[-1][0].shape[:2]
    if init is None:
        flow = np.zeros(coarsest + (2,))
    else:
        scale = 2 ** (len(pyramid) - 1)
        flow = init[::scale, ::scale] / scale
        flow = flow[: coarsest[0], : coarsest[1]]

    for level, (s, d, sm, dm) in enumerate(reversed(pyramid)):
        if level > 0:
            flow = _upsample_flow(flow, s.shape[:2])
        flow = _solve_level(s, d, sm, dm, flow, params)
    return flow


register_backend("variational", lambda: variational_flow)


__all__ = ["variational_flow"]
