from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy import ndimage

from scenefill.core.sampling import remap_bilinear, remap_nearest
from scenefill.core.types import Frame, Mask, WarpField
from scenefill.errors import GeometryError, InputError

if TYPE_CHECKING:
    from scenefill.template.scene import SceneTemplate


MIN_COMPONENT_PX = 16


def clean_mask(raw: np.ndarray, min_size: int = MIN_COMPONENT_PX) -> np.ndarray:
    """Drop connected components smaller than min_size, then close with a 3x3 square."""
    labels, count = ndimage.label(raw, structure=np.ones((3, 3), dtype=bool))
    if count == 0:
        return np.zeros_like(raw, dtype=bool)
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_size
    keep[0] = False
    kept = keep[labels]
    padded = np.pad(kept, 1)
    closed = ndimage.binary_closing(padded, structure=np.ones((3, 3), dtype=bool))
    return closed[1:-1, 1:-1]


def residual_map(frame: Frame, template: SceneTemplate, inv_warp: WarpField) -> tuple[np.ndarray, np.ndarray]:
    """Squared colour distance between the frame and the template pulled into it, plus where it is known."""
    if inv_warp.src.shape != frame.shape:
        raise GeometryError(f"inverse warp covers {inv_warp.src.shape}, frame is {frame.shape}")
    if inv_warp.dst != template.domain:
        raise GeometryError("inverse warp does not land on the template domain")
    if template.channels != frame.channels:
        raise InputError("template and frame channel counts differ")
    predicted, inside = remap_bilinear(template.radiance, inv_warp.map)
    covered, _ = remap_nearest(template.defined, inv_warp.map)
    known = inv_warp.valid & inside & covered
    return np.sum((frame.data - predicted) ** 2, axis=-1), known


def estimate_mask(frame: Frame, template: SceneTemplate, inv_warp: WarpField, alpha: float = 0.1) -> Mask:
    """Pixels whose squared residual against the template strictly exceeds alpha, cleaned up."""
    if alpha <= 0:
        raise InputError("alpha must be > 0")
    residual, known = residual_map(frame, template, inv_warp)
    return Mask(clean_mask(known & (residual > alpha)))


__all__ = ["MIN_COMPONENT_PX", "clean_mask", "estimate_mask", "residual_map"]
