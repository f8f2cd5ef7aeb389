from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import ndimage

from scenefill.core.types import SAMPLING_MARGIN, Frame
from scenefill.errors import SamplingError


def _inside(shape: tuple[int, int], coords: np.ndarray) -> np.ndarray:
    height, width = shape
    x = coords[..., 0]
    y = coords[..., 1]
    return (
        (x >= -SAMPLING_MARGIN)
        & (x <= width - 1 + SAMPLING_MARGIN)
        & (y >= -SAMPLING_MARGIN)
        & (y <= height - 1 + SAMPLING_MARGIN)
    )


def remap_bilinear(data: np.ndarray, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear lookup of an (H, W[, C]) array at (..., 2) (x, y) coordinates.

    Coordinates are clamped to the pixel-centre rectangle, which is exactly the border
    behaviour on the 0.5 px margin. Returns values shaped (..., C) (or (...) for 2-D input)
    and a flag telling which coordinates were inside the sampling rectangle.
    """
    data = np.asarray(data, dtype=np.float64)
    squeeze = data.ndim == 2
    planes = data[:, :, None] if squeeze else data
    coords = np.asarray(coords, dtype=np.float64)
    lead = coords.shape[:-1]
    rows = coords[..., 1].ravel()
    cols = coords[..., 0].ravel()
    out = np.empty((rows.size, planes.shape[2]), dtype=np.float64)
    for c in range(planes.shape[2]):
        out[:, c] = ndimage.map_coordinates(
            planes[:, :, c], [rows, cols], order=1, mode="nearest", prefilter=False
        )
    out = out.reshape(lead + (planes.shape[2],))
    if squeeze:
        out = out[..., 0]
    return out, _inside(planes.shape[:2], coords)


def nearest_indices(shape: tuple[int, int], coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row/column of the nearest pixel centre, rounding halves toward the smaller index."""
    height, width = shape
    ix = np.clip(np.ceil(coords[..., 0] - 0.5), 0, width - 1).astype(np.intp)
    iy = np.clip(np.ceil(coords[..., 1] - 0.5), 0, height - 1).astype(np.intp)
    return iy, ix


def remap_nearest(data: np.ndarray, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    data = np.asarray(data)
    coords = np.asarray(coords, dtype=np.float64)
    iy, ix = nearest_indices(data.shape[:2], coords)
    return data[iy, ix], _inside(data.shape[:2], coords)


def _point(frame: Frame, p: Sequence[float]) -> np.ndarray:
    point = np.asarray(p, dtype=np.float64).reshape(1, 2)
    if not _inside(frame.shape, point)[0]:
        raise SamplingError(
            f"point ({point[0, 0]:.3f}, {point[0, 1]:.3f}) lies outside the "
            f"{frame.width}x{frame.height} frame and its {SAMPLING_MARGIN}px margin"
        )
    return point


def sample_bilinear(frame: Frame, p: Sequence[float]) -> np.ndarray:
    values, _ = remap_bilinear(frame.data, _point(frame, p))
    return values[0]


def sample_nearest(frame: Frame, p: Sequence[float]) -> np.ndarray:
    values, _ = remap_nearest(frame.data, _point(frame, p))
    return values[0]


__all__ = [
    "nearest_indices",
    "remap_bilinear",
    "remap_nearest",
    "sample_bilinear",
    "sample_nearest",
]
