"""Streaming variant: the template is kept aligned with the newest frame of a short window."""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from scenefill.core.types import Frame, Mask, WarpField
from scenefill.errors import InputError
from scenefill.flow import FlowParams, compose, identity_warp
from scenefill.inpaint.fill import InpaintParams, InpaintResult, diffusion_fill, inpaint_frame
from scenefill.io.flow_cache import FlowCache
from scenefill.template.joint import (
    InferenceState,
    compute_adjacent_flows,
    data_energy,
    refine_warp,
    refinement_helps,
)
from scenefill.template.scene import SceneTemplate, accumulate_template
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)


@dataclass
class SlidingWindowOutcome:
    results: list[InpaintResult]
    template: SceneTemplate
    forward: list[InpaintResult]
    backward: list[InpaintResult]

    @property
    def frames(self) -> list[Frame]:
        return [r.frame for r in self.results]


@dataclass
class _Window:
    indices: list[int]
    warps: dict[int, WarpField]
    inv_warps: dict[int, WarpField]


def _pair_flow(a: int, b: int, forward: Sequence[WarpField], backward: Sequence[WarpField]) -> WarpField:
    """w_ab for temporally adjacent frames a and b."""
    return forward[a] if b == a + 1 else backward[b]


def _state(window: _Window, frames: Sequence[Frame], masks: Sequence[Mask], template: SceneTemplate) -> InferenceState:
    idx = window.indices
    return InferenceState(
        [frames[i] for i in idx],
        [masks[i] for i in idx],
        [window.warps[i] for i in idx],
        [window.inv_warps[i] for i in idx],
        template,
        key_frame=len(idx) - 1,
    )


def _accumulate(window: _Window, frames: Sequence[Frame], masks: Sequence[Mask], executor: Executor | None) -> SceneTemplate:
    idx = window.indices
    return accumulate_template(
        [frames[i] for i in idx],
        [masks[i] for i in idx],
        [window.warps[i] for i in idx],
        [window.inv_warps[i] for i in idx],
        executor,
    )


def _sweep(
    order: Sequence[int],
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    forward: Sequence[WarpField],
    backward: Sequence[WarpField],
    window_size: int,
    params: FlowParams,
    inpaint_params: InpaintParams,
    max_outer: int,
    executor: Executor | None,
) -> tuple[dict[int, InpaintResult], SceneTemplate]:
    rect = frames[order[0]].rect
    first = order[0]
    window = _Window([first], {first: identity_warp(rect)}, {first: identity_warp(rect)})
    template = _accumulate(window, frames, masks, executor)
    results = {first: inpaint_frame(_state(window, frames, masks, template), 0, inpaint_params)}

    for prev, cur in zip(order[:-1], order[1:]):
        to_prev = _pair_flow(cur, prev, forward, backward)
        from_prev = _pair_flow(prev, cur, forward, backward)
        for i in window.indices:
            window.warps[i] = compose(to_prev, window.warps[i])
            window.inv_warps[i] = compose(window.inv_warps[i], from_prev)
        window.indices.append(cur)
        window.warps[cur] = identity_warp(rect)
        window.inv_warps[cur] = identity_warp(rect)
        if len(window.indices) > window_size:
            dropped = window.indices.pop(0)
            del window.warps[dropped], window.inv_warps[dropped]

        template = _accumulate(window, frames, masks, executor)
        for _ in range(max_outer):
            snapshot = template

            def run(i: int, snapshot: SceneTemplate = snapshot):
                return refine_warp(snapshot, frames[i], masks[i], window.warps[i], params, window.inv_warps[i])

            refined = list(executor.map(run, window.indices)) if executor else [run(i) for i in window.indices]
            kept = [
                i
                for i, r in zip(window.indices, refined)
                if refinement_helps(snapshot, frames[i], masks[i], window.inv_warps[i], r)
            ]
            if not kept:
                break
            for i, r in zip(window.indices, refined):
                if i in kept:
                    window.warps[i], window.inv_warps[i] = r.warp, r.inverse
            template = _accumulate(window, frames, masks, executor)

        state = _state(window, frames, masks, template)
        results[cur] = inpaint_frame(state, len(window.indices) - 1, inpaint_params)
        logger.debug("frame %d: window %s, data energy %.4f", cur, window.indices, data_energy(state))
    return results, template


def merge_sweeps(fwd: InpaintResult, bwd: InpaintResult) -> InpaintResult:
    """Per pixel, keep the sweep backed by more samples; unfilled pixels lose, ties keep forward."""
    score_f = np.where(fwd.unfilled.data, -1, fwd.sample_count)
    score_b = np.where(bwd.unfilled.data, -1, bwd.sample_count)
    take_b = score_b > score_f
    data = np.where(take_b[:, :, None], bwd.frame.data, fwd.frame.data)
    unfilled = np.where(take_b, bwd.unfilled.data, fwd.unfilled.data)
    counts = np.where(take_b, bwd.sample_count, fwd.sample_count)
    frame = Frame(data)
    if unfilled.any() and not unfilled.all():
        frame = diffusion_fill(frame, Mask(unfilled))
    return InpaintResult(frame, Mask(unfilled), counts)


def sliding_window_run(
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    window: int = 7,
    params: FlowParams | None = None,
    inpaint_params: InpaintParams | None = None,
    max_outer: int = 1,
    executor: Executor | None = None,
    cache: FlowCache | None = None,
    adjacent: tuple[Sequence[WarpField], Sequence[WarpField]] | None = None,
) -> SlidingWindowOutcome:
    """Forward then backward sweep over the sequence; each frame is inpainted from its window."""
    frames = list(frames)
    masks = list(masks)
    if not frames or len(frames) != len(masks):
        raise InputError("need at least one frame and one mask per frame")
    if window < 2:
        raise InputError("window must be >= 2")
    window = min(window, len(frames))
    params = params or FlowParams.from_settings()
    inpaint_params = inpaint_params or InpaintParams.from_settings()
    refine_params = params.refinement()

    if adjacent is None:
        forward, backward = compute_adjacent_flows(frames, masks, params, executor, cache) if len(frames) > 1 else ([], [])
    else:
        forward, backward = list(adjacent[0]), list(adjacent[1])
        if len(forward) != len(frames) - 1 or len(backward) != len(frames) - 1:
            raise InputError(f"expected {len(frames) - 1} adjacent flows per direction")

    n = len(frames)
    logger.info("forward sweep over %d frames (window %d)", n, window)
    fwd, template = _sweep(range(n), frames, masks, forward, backward, window, refine_params, inpaint_params, max_outer, executor)
    logger.info("backward sweep over %d frames (window %d)", n, window)
    bwd, _ = _sweep(range(n - 1, -1, -1), frames, masks, forward, backward, window, refine_params, inpaint_params, max_outer, executor)

    merged = [merge_sweeps(fwd[t], bwd[t]) for t in range(n)]
    return SlidingWindowOutcome(merged, template, [fwd[t] for t in range(n)], [bwd[t] for t in range(n)])


__all__ = ["SlidingWindowOutcome", "merge_sweeps", "sliding_window_run"]
