from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from scenefill.core.geometry import bounding_rect, rect_union
from scenefill.core.laplace import solve_laplace
from scenefill.core.sampling import remap_bilinear
from scenefill.core.types import DomainRect, Mask, WarpField
from scenefill.errors import GeometryError


VALIDITY_EPS = 1e-9


def identity_warp(src: DomainRect, dst: DomainRect | None = None) -> WarpField:
    dst = dst or src
    return WarpField(src, dst, src.grid() + src.offset_to(dst))


def from_displacement(displacement: np.ndarray, src: DomainRect, dst: DomainRect | None = None) -> WarpField:
    dst = dst or src
    return WarpField(src, dst, src.grid() + src.offset_to(dst) + np.asarray(displacement, dtype=np.float64))


def compose(w_ab: WarpField, w_bc: WarpField) -> WarpField:
    """p -> w_bc(w_ab(p)); w_bc's map and validity are interpolated bilinearly."""
    if w_ab.dst != w_bc.src:
        raise GeometryError(f"cannot compose: {w_ab.dst} does not match {w_bc.src}")
    mapped, inside = remap_bilinear(w_bc.map, w_ab.map)
    validity, _ = remap_bilinear(w_bc.valid.astype(np.float64), w_ab.map)
    valid = w_ab.valid & inside & (validity >= 1.0 - VALIDITY_EPS)
    return WarpField(w_ab.src, w_bc.dst, mapped, valid)


def chain(warps: Sequence[WarpField]) -> WarpField:
    """Compose left to right: chain([w_ab, w_bc, w_cd]) maps a -> d."""
    if not warps:
        raise GeometryError("chain needs at least one warp")
    return reduce(compose, warps)


def compose_extended(w_ab: WarpField, w_bc: WarpField) -> WarpField:
    """compose, except that points w_ab carries outside w_bc's source follow the
    affine-plus-harmonic continuation of w_bc and keep their validity.
    """
    if w_ab.dst != w_bc.src:
        raise GeometryError(f"cannot compose: {w_ab.dst} does not match {w_bc.src}")
    reach = bounding_rect(w_ab.map, origin=w_ab.dst.origin)
    wide = rect_union([w_bc.src, reach]) if reach is not None else w_bc.src
    extended = extrapolate_warp(w_bc, wide)
    coords = w_ab.map + w_bc.src.offset_to(wide)
    mapped, inside = remap_bilinear(extended.map, coords)
    validity, _ = remap_bilinear(extended.valid.astype(np.float64), coords)
    usable = w_ab.valid | ~w_ab.dst.contains(w_ab.map)
    valid = usable & inside & (validity >= 1.0 - VALIDITY_EPS)
    return WarpField(w_ab.src, w_bc.dst, mapped, valid)


def check_fb_consistency(w_fwd: WarpField, w_bwd: WarpField, tol_px: float) -> Mask:
    """Flag pixels whose forward-backward round trip misses the start point by more than tol_px."""
    if w_fwd.dst != w_bwd.src or w_bwd.dst != w_fwd.src:
        raise GeometryError("forward/backward warps do not map between the same two domains")
    round_trip = compose(w_fwd, w_bwd)
    error = np.linalg.norm(round_trip.map - w_fwd.src.grid(), axis=-1)
    return Mask(round_trip.valid & (error > tol_px))


def rebase_dst(w: WarpField, new_dst: DomainRect) -> WarpField:
    """Express the same map in coordinates local to another destination rectangle."""
    return WarpField(w.src, new_dst, w.map + w.dst.offset_to(new_dst), w.valid)


def _affine_fit(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    design = np.column_stack([points, np.ones(len(points))])
    coeffs, *_ = np.linalg.lstsq(design, targets, rcond=None)
    return coeffs


def extrapolate_warp(w: WarpField, new_src: DomainRect) -> WarpField:
    """Extend w to a larger source rectangle.

    The map outside the old source is an affine fit of the known map plus the harmonic
    extension of the fit residual, so affine motion is continued exactly.
    """
    offset = w.src.offset_to(new_src).astype(int)
    x0, y0 = int(offset[0]), int(offset[1])
    if x0 < 0 or y0 < 0 or x0 + w.src.width > new_src.width or y0 + w.src.height > new_src.height:
        raise GeometryError(f"{new_src} does not contain {w.src}")
    if new_src == w.src:
        return w

    old = np.zeros(new_src.shape, dtype=bool)
    old[y0 : y0 + w.src.height, x0 : x0 + w.src.width] = True
    grid = new_src.grid()

    fit_on = w.valid if w.valid.sum() >= 3 else np.ones(w.src.shape, dtype=bool)
    coeffs = _affine_fit(grid[old].reshape(-1, 2)[fit_on.ravel()], w.map[fit_on])
    affine = np.einsum("hwk,kc->hwc", np.concatenate([grid, np.ones(new_src.shape + (1,))], axis=-1), coeffs)

    residual = np.zeros(new_src.shape + (2,))
    residual[old] = (w.map - affine[old].reshape(w.map.shape)).reshape(-1, 2)
    residual = solve_laplace(residual, ~old)

    valid = np.ones(new_src.shape, dtype=bool)
    valid[old] = w.valid.ravel()
    return WarpField(new_src, w.dst, affine + residual, valid)


def perturb_warp(w: WarpField, sigma: float, rng: np.random.Generator) -> WarpField:
    noise = rng.normal(0.0, sigma, size=w.map.shape)
    return WarpField(w.src, w.dst, w.map + noise, w.valid)


__all__ = [
    "chain",
    "check_fb_consistency",
    "compose",
    "compose_extended",
    "extrapolate_warp",
    "from_displacement",
    "identity_warp",
    "perturb_warp",
    "rebase_dst",
]
