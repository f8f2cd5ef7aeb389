"""Interpolation strategies for propagating an image through many small warps.

Resampling the image at every step either keeps it binary but lets edges wander (nearest) or
blurs it (bilinear). Composing the warps bilinearly and reading the image once with nearest
neighbour avoids both.
"""

from __future__ import annotations

from typing import Literal

import numpy as np

from scenefill.core.sampling import remap_bilinear, remap_nearest
from scenefill.core.types import DomainRect, Frame, WarpField
from scenefill.errors import InputError
from scenefill.flow.fields import chain


Strategy = Literal["nearest", "bilinear", "combined"]
STRATEGIES: tuple[Strategy, ...] = ("nearest", "bilinear", "combined")
NON_BINARY_BAND = (0.1, 0.9)


def rotation_map(rect: DomainRect, angle_rad: float) -> np.ndarray:
    """c + R(angle) (p - c) for every pixel p, rotating about the pixel-grid centre."""
    centre = np.array([(rect.width - 1) / 2.0, (rect.height - 1) / 2.0])
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    rot = np.array([[c, -s], [s, c]])
    return centre + (rect.grid() - centre) @ rot.T


def rotation_warp(rect: DomainRect, angle_deg: float) -> WarpField:
    return WarpField(rect, rect, rotation_map(rect, np.deg2rad(angle_deg)))


def propagate_rotation(template: Frame, steps: int, angle_deg: float, strategy: Strategy) -> Frame:
    """Apply `steps` rotations of `angle_deg` to the template with the given strategy."""
    if steps < 0:
        raise InputError("steps must be >= 0")
    if strategy not in STRATEGIES:
        raise InputError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    if steps == 0:
        return template
    rect = template.rect
    step_map = rotation_map(rect, np.deg2rad(angle_deg))

    if strategy == "combined":
        accumulated = chain([rotation_warp(rect, angle_deg)] * steps)
        values, _ = remap_nearest(template.data, accumulated.map)
        return Frame(values)

    image = template.data
    for _ in range(steps):
        if strategy == "nearest":
            image, _ = remap_nearest(image, step_map)
        else:
            image, _ = remap_bilinear(image, step_map)
    return Frame(np.clip(image, 0.0, 1.0))


def rotated_reference(template: Frame, angle_deg: float) -> Frame:
    """The template rotated by the total angle in a single nearest-neighbour readout."""
    values, _ = remap_nearest(template.data, rotation_map(template.rect, np.deg2rad(angle_deg)))
    return Frame(values)


def evaluation_disk(shape: tuple[int, int], fraction: float = 0.4) -> np.ndarray:
    """Central disk whose content never rotated in from outside the frame."""
    height, width = shape
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    radius = fraction * min(height, width)
    return (xs - (width - 1) / 2.0) ** 2 + (ys - (height - 1) / 2.0) ** 2 <= radius**2


def non_binary_fraction(frame: Frame, region: np.ndarray | None = None, band: tuple[float, float] = NON_BINARY_BAND) -> float:
    """Share of region pixels with some channel strictly inside `band`."""
    region = np.ones(frame.shape, dtype=bool) if region is None else region
    lo, hi = band
    between = np.any((frame.data > lo) & (frame.data < hi), axis=2)
    return float(between[region].mean())


def edge_pixels(reference: Frame) -> np.ndarray:
    """Pixels with a 4-neighbour of different value in the reference."""
    data = reference.data
    edges = np.zeros(reference.shape, dtype=bool)
    dx = np.any(data[:, 1:] != data[:, :-1], axis=2)
    dy = np.any(data[1:, :] != data[:-1, :], axis=2)
    edges[:, 1:] |= dx
    edges[:, :-1] |= dx
    edges[1:, :] |= dy
    edges[:-1, :] |= dy
    return edges


def edge_disagreement(result: Frame, reference: Frame, region: np.ndarray | None = None) -> float:
    """Fraction of reference edge pixels (inside region) where result and reference differ by more than 0.5."""
    if result.data.shape != reference.data.shape:
        raise InputError("result and reference differ in shape")
    use = edge_pixels(reference)
    if region is not None:
        use &= region
    if not use.any():
        return 0.0
    wrong = np.any(np.abs(result.data - reference.data) > 0.5, axis=2)
    return float(wrong[use].mean())


__all__ = [
    "NON_BINARY_BAND",
    "STRATEGIES",
    "edge_disagreement",
    "edge_pixels",
    "evaluation_disk",
    "non_binary_fraction",
    "propagate_rotation",
    "rotated_reference",
    "rotation_map",
    "rotation_warp",
]
