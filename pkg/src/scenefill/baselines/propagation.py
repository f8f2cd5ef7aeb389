"""Frame-to-frame propagation: follow chained adjacent flows until the point is visible."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from scenefill.core.sampling import remap_bilinear, remap_nearest
from scenefill.core.types import Frame, Mask, WarpField
from scenefill.errors import InputError
from scenefill.inpaint.fill import InpaintResult, diffusion_fill
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

VALIDITY_EPS = 1e-9


def _walk(
    t: int,
    order: Sequence[int],
    flows: Sequence[WarpField],
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    points: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Values and temporal distance of the first frame along `order` where each point is unmasked.

    flows[k] carries positions from order[k-1] (order[-1] being t) to order[k].
    """
    n_pts = len(points)
    values = np.zeros((n_pts, frames[t].channels))
    distance = np.full(n_pts, np.iinfo(np.int32).max, dtype=np.int64)
    alive = np.ones(n_pts, dtype=bool)
    positions = points.astype(np.float64)
    for s, flow in zip(order, flows):
        moved, inside = remap_bilinear(flow.map, positions)
        validity, _ = remap_bilinear(flow.valid.astype(np.float64), positions)
        alive &= inside & (validity >= 1.0 - VALIDITY_EPS) & flow.dst.contains(moved)
        positions = moved
        masked, _ = remap_nearest(masks[s].data, positions)
        found = alive & ~masked
        if found.any():
            sampled, _ = remap_nearest(frames[s].data, positions[found])
            values[found] = sampled
            distance[found] = abs(s - t)
            alive &= ~found
        if not alive.any():
            break
    return values, distance


def propagate_frame_to_frame(
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    forward: Sequence[WarpField],
    backward: Sequence[WarpField],
) -> list[InpaintResult]:
    """Fill each masked pixel from the temporally nearest frame that sees it through chained flows.

    `forward[i]` maps frame i to i+1 and `backward[i]` maps frame i+1 to i. Ties go to the earlier
    frame; pixels no frame reveals are diffusion-filled.
    """
    n = len(frames)
    if n != len(masks) or len(forward) != n - 1 or len(backward) != n - 1:
        raise InputError("need one mask per frame and n - 1 adjacent flows per direction")

    results: list[InpaintResult] = []
    for t in range(n):
        frame, mask = frames[t], masks[t]
        sample_count = np.zeros(frame.shape, dtype=np.int32)
        if not mask.any():
            results.append(InpaintResult(frame, Mask.like(frame), sample_count))
            continue
        ys, xs = np.nonzero(mask.data)
        points = np.stack([xs, ys], axis=-1).astype(np.float64)

        later_vals, later_dist = _walk(t, range(t + 1, n), forward[t:], frames, masks, points)
        earlier_vals, earlier_dist = _walk(t, range(t - 1, -1, -1), backward[:t][::-1], frames, masks, points)
        use_earlier = earlier_dist <= later_dist
        values = np.where(use_earlier[:, None], earlier_vals, later_vals)
        filled = np.minimum(earlier_dist, later_dist) < np.iinfo(np.int32).max

        out = frame.data.copy()
        out[ys[filled], xs[filled]] = values[filled]
        sample_count[ys[filled], xs[filled]] = 1
        unfilled = np.zeros(frame.shape, dtype=bool)
        unfilled[ys[~filled], xs[~filled]] = True
        result = Frame(out)
        if unfilled.any() and not unfilled.all():
            result = diffusion_fill(result, Mask(unfilled))
        logger.debug("frame %d: %d/%d masked pixels propagated", t, int(filled.sum()), len(xs))
        results.append(InpaintResult(result, Mask(unfilled), sample_count))
    return results


__all__ = ["propagate_frame_to_frame"]
