from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from scenefill.core.sampling import remap_bilinear
from scenefill.core.types import Frame, Mask, WarpField, ensure_same_shape
from scenefill.errors import GeometryError, InputError
from scenefill.metrics.quality import SSIM_WINDOW, mean_db, psnr, ssim_map
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)


@dataclass(frozen=True)
class TemporalScores:
    tpsnr: float
    tssim: float | None
    pairs: int


def warp_back(frame: Frame, flow: WarpField) -> tuple[Frame, np.ndarray]:
    """Pull `frame` (living on flow.dst) back onto flow.src; returns the image and where it is known."""
    if flow.dst.shape != frame.shape:
        raise GeometryError(f"flow lands on {flow.dst}, frame is {frame.shape}")
    values, inside = remap_bilinear(frame.data, flow.map)
    return Frame(np.clip(values, 0.0, 1.0)), inside & flow.valid


def pair_region(mask_t: Mask, known: np.ndarray) -> np.ndarray:
    """Pixels inpainted in frame t that the flow carries to a known pixel of frame t+1."""
    ensure_same_shape(mask_t.shape, known.shape, "pair region")
    return mask_t.data & known


def temporal_consistency(
    inpainted: Sequence[Frame], masks: Sequence[Mask], flows: Sequence[WarpField]
) -> TemporalScores | None:
    """TPSNR/TSSIM between each inpainted frame and its successor warped back onto it.

    `flows[t]` maps frame t to frame t+1. Each pair is compared over the masked pixels of frame t
    that the flow carries inside frame t+1; None when no pair has any such pixel.
    """
    if len(inpainted) != len(masks):
        raise InputError("need one mask per inpainted frame")
    if len(inpainted) < 2:
        return None
    if len(flows) != len(inpainted) - 1:
        raise InputError(f"expected {len(inpainted) - 1} adjacent flows, got {len(flows)}")

    psnrs: list[float] = []
    ssims: list[float] = []
    for t, flow in enumerate(flows):
        warped, known = warp_back(inpainted[t + 1], flow)
        region = pair_region(masks[t], known)
        if not region.any():
            continue
        # unknown pixels take the values of P_t
        warped = Frame(np.where(known[:, :, None], warped.data, inpainted[t].data))
        psnrs.append(psnr(inpainted[t], warped, Mask(region)))
        if region.sum() >= SSIM_WINDOW * SSIM_WINDOW and min(warped.shape) >= SSIM_WINDOW:
            ssims.append(float(ssim_map(inpainted[t], warped)[region].mean()))
        else:
            logger.debug("pair %d-%d: %d px is too small for SSIM", t, t + 1, int(region.sum()))

    if not psnrs:
        return None
    tssim = float(np.mean(ssims)) if ssims else None
    return TemporalScores(float(mean_db(psnrs)), tssim, len(psnrs))  # type: ignore[arg-type]


__all__ = ["TemporalScores", "pair_region", "temporal_consistency", "warp_back"]
