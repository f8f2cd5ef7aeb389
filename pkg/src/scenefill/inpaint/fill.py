from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from scenefill.config import settings
from scenefill.core.laplace import solve_laplace
from scenefill.core.sampling import remap_bilinear, remap_nearest
from scenefill.core.types import Frame, Mask
from scenefill.errors import InputError
from scenefill.inpaint.median import median_inpaint
from scenefill.utils.logging import get_logger

if TYPE_CHECKING:
    from scenefill.template.joint import InferenceState


logger = get_logger(__name__)

VALIDITY_EPS = 1e-9


@dataclass(frozen=True)
class InpaintParams:
    beta: float = 0.05
    alpha: float = 0.1
    max_sample_frames: int = 20
    use_samples: bool = True

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise InputError("beta must be >= 0")
        if self.alpha <= 0:
            raise InputError("alpha must be > 0")
        if self.max_sample_frames < 0:
            raise InputError("max_sample_frames must be >= 0")

    @classmethod
    def from_settings(cls) -> "InpaintParams":
        return cls(beta=settings.INPAINT_BETA, alpha=settings.MASK_ALPHA, max_sample_frames=settings.MAX_SAMPLE_FRAMES)


@dataclass(frozen=True)
class InpaintResult:
    """Inpainted frame (never-revealed pixels already diffusion-filled) and per-pixel bookkeeping."""

    frame: Frame
    unfilled: Mask
    sample_count: np.ndarray


def sample_order(t: int, n: int) -> list[int]:
    """Other frames, temporally nearest first; earlier frame first on ties."""
    return sorted((i for i in range(n) if i != t), key=lambda i: (abs(i - t), i))


def gather_sample_stack(
    state: InferenceState, t: int, xs: np.ndarray, ys: np.ndarray, max_sample_frames: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-neighbour samples of every other frame at w_ti(x) = w_i(w_t^-1(x)).

    Returns samples (S, P, k) and presence (S, P); a sample is present when the composed warp
    is valid and lands outside M_i. At most `max_sample_frames` samples per pixel, nearest first.
    """
    order = sample_order(t, len(state))
    inv_t = state.inv_warps[t]
    on_template = inv_t.map[ys, xs]
    on_template_ok = inv_t.valid[ys, xs]
    channels = state.frames[t].channels

    samples = np.zeros((len(order), len(xs), channels))
    present = np.zeros((len(order), len(xs)), dtype=bool)
    for s, i in enumerate(order):
        warp = state.warps[i]
        mapped, inside = remap_bilinear(warp.map, on_template)
        validity, _ = remap_bilinear(warp.valid.astype(np.float64), on_template)
        landed = warp.dst.contains(mapped)
        values, _ = remap_nearest(state.frames[i].data, mapped)
        masked, _ = remap_nearest(state.masks[i].data, mapped)
        samples[s] = values
        present[s] = on_template_ok & inside & (validity >= 1.0 - VALIDITY_EPS) & landed & ~masked

    present &= np.cumsum(present, axis=0) <= max_sample_frames
    return samples, present


def gather_samples(state: InferenceState, t: int, x: tuple[int, int], max_sample_frames: int = 20) -> list[np.ndarray]:
    px, py = int(x[0]), int(x[1])
    if not state.masks[t].data[py, px]:
        raise InputError(f"pixel {x} is not masked in frame {t}")
    samples, present = gather_sample_stack(state, t, np.array([px]), np.array([py]), max_sample_frames)
    return [samples[s, 0].copy() for s in range(samples.shape[0]) if present[s, 0]]


def diffusion_fill(frame: Frame, holes: Mask) -> Frame:
    """Harmonic fill of `holes` from the surrounding pixels, per channel."""
    holes.check_matches(frame)
    if not holes.any():
        return frame
    return Frame(np.clip(solve_laplace(frame.data, holes.data), 0.0, 1.0))


def inpaint_frame(state: InferenceState, t: int, params: InpaintParams | None = None) -> InpaintResult:
    """Median of cross-frame samples and template-anchored values on every masked pixel of frame t."""
    if not 0 <= t < len(state):
        raise InputError(f"frame index {t} out of range for {len(state)} frames")
    params = params or InpaintParams.from_settings()
    frame = state.frames[t]
    mask = state.masks[t]
    sample_count = np.zeros(frame.shape, dtype=np.int32)
    if not mask.any():
        return InpaintResult(frame, Mask.like(frame), sample_count)

    ys, xs = np.nonzero(mask.data)
    template = state.template
    inv_t = state.inv_warps[t]
    on_template = inv_t.map[ys, xs]
    f_vals, inside = remap_nearest(template.radiance, on_template)
    covered, _ = remap_nearest(template.defined, on_template)
    f_defined = inv_t.valid[ys, xs] & inside & covered

    if params.use_samples and len(state) > 1:
        samples, present = gather_sample_stack(state, t, xs, ys, params.max_sample_frames)
    else:
        samples = np.zeros((0, len(xs), frame.channels))
        present = np.zeros((0, len(xs)), dtype=bool)

    out = frame.data.copy()
    filled = np.zeros(len(xs), dtype=bool)
    for c in range(frame.channels):
        values, filled = median_inpaint(samples[:, :, c], present, f_vals[:, c], f_defined, params.beta)
        out[ys[filled], xs[filled], c] = values[filled]
    sample_count[ys, xs] = present.sum(axis=0)

    unfilled = np.zeros(frame.shape, dtype=bool)
    unfilled[ys[~filled], xs[~filled]] = True
    result = Frame(np.clip(out, 0.0, 1.0))
    if unfilled.any():
        if unfilled.all():
            logger.warning("frame %d: nothing observed at all, leaving input values", t)
        else:
            logger.info("frame %d: %d never-revealed pixels diffusion-filled", t, int(unfilled.sum()))
            result = diffusion_fill(result, Mask(unfilled))
    return InpaintResult(result, Mask(unfilled), sample_count)


__all__ = [
    "InpaintParams",
    "InpaintResult",
    "diffusion_fill",
    "gather_sample_stack",
    "gather_samples",
    "inpaint_frame",
    "sample_order",
]
