from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from scenefill.core.sampling import remap_bilinear, remap_nearest
from scenefill.core.types import DomainRect, Frame, Mask, WarpField
from scenefill.errors import GeometryError, InputError


WEIGHT_EPS = 1e-6
UNDEFINED_COLOR = (1.0, 0.0, 1.0)


@dataclass(frozen=True)
class SceneTemplate:
    """Radiance over the template domain with the accumulators it was averaged from."""

    domain: DomainRect
    radiance: np.ndarray
    weight: np.ndarray
    numerator: np.ndarray
    weight_eps: float = WEIGHT_EPS

    @property
    def defined(self) -> np.ndarray:
        return self.weight > self.weight_eps

    @property
    def channels(self) -> int:
        return int(self.radiance.shape[2])

    @property
    def coverage(self) -> float:
        return float(self.defined.mean())

    @classmethod
    def from_accumulators(
        cls, domain: DomainRect, numerator: np.ndarray, weight: np.ndarray, weight_eps: float = WEIGHT_EPS
    ) -> "SceneTemplate":
        defined = weight > weight_eps
        safe = np.where(defined, weight, 1.0)[:, :, None]
        radiance = np.where(defined[:, :, None], numerator / safe, 0.0)
        return cls(domain, np.clip(radiance, 0.0, 1.0), weight, numerator, weight_eps)

    def as_frame(self) -> Frame:
        """Radiance as an image; undefined pixels read as 0 and must be masked by the caller."""
        return Frame(self.radiance)

    def undefined_mask(self) -> Mask:
        return Mask(~self.defined)

    def to_frame(self, undefined_color: tuple[float, ...] = UNDEFINED_COLOR) -> Frame:
        """Displayable radiance, undefined pixels painted `undefined_color` (RGB)."""
        rgb = self.radiance if self.channels == 3 else np.repeat(self.radiance, 3, axis=2)
        return Frame(np.where(self.defined[:, :, None], rgb, np.asarray(undefined_color)[None, None, :]))


def jacobian_field(w: WarpField) -> np.ndarray:
    """det of the warp gradient at every source pixel, clamped at 0.

    Central differences inside, one-sided on the border.
    """
    dmx_dy, dmx_dx = _gradients(w, 0)
    dmy_dy, dmy_dx = _gradients(w, 1)
    return np.maximum(dmx_dx * dmy_dy - dmx_dy * dmy_dx, 0.0)


def _gradients(w: WarpField, channel: int) -> tuple[np.ndarray, np.ndarray]:
    # a single-row or single-column domain has no extent along that axis: treat it as identity
    height, width = w.src.shape
    values = w.map[..., channel]
    dy = np.gradient(values, axis=0) if height > 1 else np.full(values.shape, float(channel == 1))
    dx = np.gradient(values, axis=1) if width > 1 else np.full(values.shape, float(channel == 0))
    return dy, dx


def jacobian_det(w: WarpField, p: tuple[int, int]) -> float:
    x, y = int(p[0]), int(p[1])
    if not (0 <= x < w.src.width and 0 <= y < w.src.height):
        raise InputError(f"pixel {p} is outside the warp source {w.src.width}x{w.src.height}")
    return float(jacobian_field(w)[y, x])


def frame_contribution(frame: Frame, mask: Mask, warp: WarpField) -> tuple[np.ndarray, np.ndarray]:
    """Numerator and weight one frame adds to every template pixel."""
    values, inside = remap_bilinear(frame.data, warp.map)
    masked, _ = remap_nearest(mask.data, warp.map)
    weight = (warp.valid & inside & ~masked) * jacobian_field(warp)
    return values * weight[:, :, None], weight


def accumulate_template(
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    warps: Sequence[WarpField],
    inv_warps: Sequence[WarpField] | None = None,
    executor: Executor | None = None,
    weight_eps: float = WEIGHT_EPS,
) -> SceneTemplate:
    """Jacobian-weighted average of every unmasked observation of each template pixel.

    Per-pixel contributions are sorted before summation, so the result does not depend on
    frame order or on how the per-frame work was scheduled.
    """
    if not (len(frames) == len(masks) == len(warps)) or not frames:
        raise InputError("frames, masks and warps must be non-empty and of equal length")
    domain = warps[0].src
    for i, (frame, mask, warp) in enumerate(zip(frames, masks, warps)):
        mask.check_matches(frame)
        if warp.src != domain:
            raise GeometryError(f"warp {i} starts on {warp.src}, expected {domain}")
        if warp.dst.shape != frame.shape:
            raise GeometryError(f"warp {i} lands on {warp.dst}, frame is {frame.shape}")
        if inv_warps is not None and inv_warps[i].dst != domain:
            raise GeometryError(f"inverse warp {i} lands on {inv_warps[i].dst}, expected {domain}")

    if executor is None:
        parts = [frame_contribution(f, m, w) for f, m, w in zip(frames, masks, warps)]
    else:
        parts = list(executor.map(frame_contribution, frames, masks, warps))

    numerators = np.sort(np.stack([p[0] for p in parts]), axis=0)
    weights = np.sort(np.stack([p[1] for p in parts]), axis=0)
    return SceneTemplate.from_accumulators(domain, numerators.sum(axis=0), weights.sum(axis=0), weight_eps)


__all__ = [
    "SceneTemplate",
    "UNDEFINED_COLOR",
    "WEIGHT_EPS",
    "accumulate_template",
    "frame_contribution",
    "jacobian_det",
    "jacobian_field",
]
