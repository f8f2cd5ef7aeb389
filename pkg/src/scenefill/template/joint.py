from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from scenefill.config import settings
from scenefill.core.geometry import bounding_rect, rect_union
from scenefill.core.sampling import remap_bilinear, remap_nearest
from scenefill.core.types import DomainRect, Frame, Mask, WarpField
from scenefill.errors import InputError
from scenefill.flow import (
    FlowParams,
    check_fb_consistency,
    compose,
    compose_extended,
    compute_flow,
    extrapolate_warp,
    identity_warp,
    rebase_dst,
)
from scenefill.io.flow_cache import FlowCache
from scenefill.template.scene import SceneTemplate, accumulate_template
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

MIN_REFINE_COVERAGE = 0.05
CONVERGENCE_TOL = 1e-3


@dataclass
class InferenceState:
    """Frames, masks, warps w_i (template -> frame i) and inverses for one optimization run."""

    frames: list[Frame]
    masks: list[Mask]
    warps: list[WarpField]
    inv_warps: list[WarpField]
    template: SceneTemplate
    key_frame: int
    forward: list[WarpField] = field(default_factory=list)
    backward: list[WarpField] = field(default_factory=list)
    energy_trace: list[float] = field(default_factory=list)
    outer_iterations: int = 0
    refine_skipped: set[int] = field(default_factory=set)

    def __post_init__(self) -> None:
        n = len(self.frames)
        if not (len(self.masks) == len(self.warps) == len(self.inv_warps) == n):
            raise InputError("state lists must have equal length")
        for i in range(n):
            if self.warps[i].src != self.template.domain or self.inv_warps[i].dst != self.template.domain:
                raise InputError(f"warp {i} is not anchored on the template domain")

    @property
    def domain(self) -> DomainRect:
        return self.template.domain

    def __len__(self) -> int:
        return len(self.frames)


class RefinedWarp(NamedTuple):
    warp: WarpField
    inverse: WarpField
    skipped: bool


def _quantized(w: WarpField) -> WarpField:
    # flows round-trip through float32 .flo files; keep cached and fresh runs identical
    return w.with_map(w.map.astype(np.float32).astype(np.float64), w.valid)


def _adjacent_pair(
    i: int, frames: Sequence[Frame], masks: Sequence[Mask], params: FlowParams, cache: FlowCache | None
) -> tuple[WarpField, WarpField]:
    rect = frames[i].rect
    fwd = cache.get(i, i + 1, rect) if cache else None
    bwd = cache.get(i + 1, i, rect) if cache else None
    if fwd is None:
        fwd = _quantized(compute_flow(frames[i], frames[i + 1], masks[i], masks[i + 1], params))
    if bwd is None:
        bwd = _quantized(compute_flow(frames[i + 1], frames[i], masks[i + 1], masks[i], params))
    if cache:
        cache.put(i, i + 1, fwd)
        cache.put(i + 1, i, bwd)
    return fwd, bwd


def compute_adjacent_flows(
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    params: FlowParams,
    executor: Executor | None = None,
    cache: FlowCache | None = None,
    fb_tolerance: float | None = None,
) -> tuple[list[WarpField], list[WarpField]]:
    """Forward w_{i,i+1} and backward w_{i+1,i} flows; inconsistent pixels lose validity."""
    fb_tolerance = settings.FB_TOLERANCE_PX if fb_tolerance is None else fb_tolerance
    indices = range(len(frames) - 1)
    if executor is None:
        pairs = [_adjacent_pair(i, frames, masks, params, cache) for i in indices]
    else:
        pairs = list(executor.map(lambda i: _adjacent_pair(i, frames, masks, params, cache), indices))

    forward: list[WarpField] = []
    backward: list[WarpField] = []
    for i, (fwd, bwd) in enumerate(pairs):
        fwd_flags = check_fb_consistency(fwd, bwd, fb_tolerance)
        bwd_flags = check_fb_consistency(bwd, fwd, fb_tolerance)
        if fwd_flags.any() or bwd_flags.any():
            logger.debug("pair %d-%d: %d/%d inconsistent pixels", i, i + 1, fwd_flags.count, bwd_flags.count)
        forward.append(fwd.with_valid(~fwd_flags.data))
        backward.append(bwd.with_valid(~bwd_flags.data))
    return forward, backward


def growth_canvas(rect: DomainRect) -> DomainRect:
    """rect padded by one full extent on every side: the largest template domain allowed."""
    return DomainRect((rect.origin[0] - rect.width, rect.origin[1] - rect.height), 3 * rect.width, 3 * rect.height)


def initial_warps(
    forward: Sequence[WarpField], backward: Sequence[WarpField], key_frame: int, rect: DomainRect
) -> tuple[list[WarpField], list[WarpField]]:
    """w_i = w_{k,i} and w_i^-1 = w_{i,k} by recursive composition of adjacent flows.

    The inverses land on `growth_canvas(rect)`, so frame pixels the key frame never sees still
    get template coordinates.
    """
    n = len(forward) + 1
    canvas = growth_canvas(rect)
    warps: list[WarpField | None] = [None] * n
    inverse: list[WarpField | None] = [None] * n
    warps[key_frame] = identity_warp(rect)
    inverse[key_frame] = identity_warp(rect, canvas)
    for i in range(key_frame + 1, n):
        warps[i] = compose(warps[i - 1], forward[i - 1])
        inverse[i] = compose_extended(backward[i - 1], inverse[i - 1])
    for i in range(key_frame - 1, -1, -1):
        warps[i] = compose(warps[i + 1], backward[i])
        inverse[i] = compose_extended(forward[i], inverse[i + 1])
    return list(warps), list(inverse)  # type: ignore[arg-type]


def omega_from(inv_warps: Sequence[WarpField], base: DomainRect) -> DomainRect:
    """Bounding rectangle of the back-warped frame domains, clipped to `growth_canvas(base)`."""
    rects = [base]
    for inv in inv_warps:
        points = inv.map[inv.valid]
        found = bounding_rect(points, origin=inv.dst.origin)
        if found is not None:
            rects.append(found)
    omega = rect_union(rects)
    canvas = growth_canvas(base)
    x0 = max(omega.origin[0], canvas.origin[0])
    y0 = max(omega.origin[1], canvas.origin[1])
    x1 = min(omega.x1, canvas.x1)
    y1 = min(omega.y1, canvas.y1)
    return DomainRect((x0, y0), x1 - x0, y1 - y0)


def _regrid(
    warps: Sequence[WarpField], inv_warps: Sequence[WarpField], omega: DomainRect
) -> tuple[list[WarpField], list[WarpField]]:
    return (
        [extrapolate_warp(w, omega) for w in warps],
        [rebase_dst(w, omega) for w in inv_warps],
    )


def refine_warp(
    template: SceneTemplate,
    frame: Frame,
    mask: Mask,
    w_init: WarpField,
    params: FlowParams,
    inv_init: WarpField | None = None,
) -> RefinedWarp:
    """Re-fit w_i (template -> frame) and its inverse by masked flow against the template.

    Undefined template pixels count as masked on the template side. When the template covers
    less than 5% of the frame the initialization is returned with `skipped=True`.
    """
    omega = template.domain
    rect = frame.rect
    if inv_init is None:
        inv_init = identity_warp(rect, omega)

    landed_defined, _ = remap_nearest(template.defined, inv_init.map)
    coverage = float(np.mean(inv_init.valid & landed_defined))
    if coverage < MIN_REFINE_COVERAGE:
        logger.warning("template covers %.1f%% of the frame; refinement skipped", 100 * coverage)
        return RefinedWarp(w_init, inv_init, True)

    # solved from the current warps, so the smoothness term sees the whole displacement
    undefined = template.undefined_mask()
    forward = compute_flow(
        template.as_frame(), frame, undefined, mask, params, init=w_init, domain=omega, dst_domain=rect
    )
    backward = compute_flow(
        frame, template.as_frame(), mask, undefined, params, init=inv_init, domain=rect, dst_domain=omega
    )
    return RefinedWarp(forward.with_valid(w_init.valid), backward.with_valid(inv_init.valid), False)


def _frame_fit(template: SceneTemplate, frame: Frame, mask: Mask, inv: WarpField) -> tuple[float, int]:
    predicted, inside = remap_bilinear(template.radiance, inv.map)
    covered, _ = remap_nearest(template.defined, inv.map)
    use = ~mask.data & inv.valid & inside & covered
    return float(np.sum(((frame.data - predicted) ** 2)[use])), int(use.sum())


def data_energy(state: InferenceState) -> float:
    """Sum over frames of |I_i(x) - f(w_i^-1(x))|^2 on visible, template-covered pixels."""
    return sum(
        _frame_fit(state.template, frame, mask, inv)[0]
        for frame, mask, inv in zip(state.frames, state.masks, state.inv_warps)
    )


def refinement_helps(
    template: SceneTemplate, frame: Frame, mask: Mask, current: WarpField, candidate: RefinedWarp
) -> bool:
    """True when the candidate inverse fits the frame to `template` no worse per pixel than `current`."""
    if candidate.skipped:
        return False
    old_sum, old_count = _frame_fit(template, frame, mask, current)
    new_sum, new_count = _frame_fit(template, frame, mask, candidate.inverse)
    if new_count == 0:
        return False
    if old_count == 0:
        return True
    return new_sum / new_count <= old_sum / old_count


def _relative_change(previous: SceneTemplate | None, current: SceneTemplate) -> float:
    if previous is None or previous.domain != current.domain:
        return float("inf")
    both = previous.defined & current.defined
    reference = np.linalg.norm(previous.radiance[both])
    if reference == 0:
        return float("inf")
    return float(np.linalg.norm(current.radiance[both] - previous.radiance[both]) / reference)


def _refine_all(
    state: InferenceState, params: FlowParams, executor: Executor | None
) -> list[RefinedWarp]:
    template = state.template

    def run(i: int) -> RefinedWarp:
        return refine_warp(template, state.frames[i], state.masks[i], state.warps[i], params, state.inv_warps[i])

    indices = range(len(state))
    if executor is None:
        return [run(i) for i in indices]
    return list(executor.map(run, indices))


def run_joint_optimization(
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    key_frame: int | None = None,
    params: FlowParams | None = None,
    max_outer: int | None = None,
    refine: bool = True,
    adjacent: tuple[Sequence[WarpField], Sequence[WarpField]] | None = None,
    executor: Executor | None = None,
    cache: FlowCache | None = None,
    tol: float = CONVERGENCE_TOL,
) -> InferenceState:
    """Alternate template accumulation and warp refinement starting from composed adjacent flows."""
    frames = list(frames)
    masks = list(masks)
    if not frames or len(frames) != len(masks):
        raise InputError("need at least one frame and one mask per frame")
    for frame, mask in zip(frames, masks):
        mask.check_matches(frame)
        if frame.shape != frames[0].shape or frame.channels != frames[0].channels:
            raise InputError("all frames must share size and channel count")
    params = params or FlowParams.from_settings()
    max_outer = settings.MAX_OUTER if max_outer is None else max_outer
    n = len(frames)
    key_frame = n // 2 if key_frame is None else key_frame
    if not 0 <= key_frame < n:
        raise InputError(f"key frame {key_frame} out of range for {n} frames")
    rect = frames[0].rect

    if n == 1:
        warps, inverse = [identity_warp(rect)], [identity_warp(rect)]
        template = accumulate_template(frames, masks, warps, inverse)
        return InferenceState(frames, masks, warps, inverse, template, 0)

    if adjacent is None:
        logger.info("computing %d adjacent flow pairs", n - 1)
        forward, backward = compute_adjacent_flows(frames, masks, params, executor, cache)
    else:
        forward, backward = list(adjacent[0]), list(adjacent[1])
        if len(forward) != n - 1 or len(backward) != n - 1:
            raise InputError(f"expected {n - 1} adjacent flows per direction")

    warps, inverse = initial_warps(forward, backward, key_frame, rect)
    omega = omega_from(inverse, rect)
    warps, inverse = _regrid(warps, inverse, omega)
    logger.info("key frame %d, template domain %dx%d at %s", key_frame, omega.width, omega.height, omega.origin)

    template = accumulate_template(frames, masks, warps, inverse, executor)
    state = InferenceState(frames, masks, warps, inverse, template, key_frame, forward, backward)
    state.energy_trace.append(data_energy(state))
    if not refine:
        return state

    refine_params = params.refinement()
    previous: SceneTemplate | None = None
    for outer in range(max_outer):
        change = _relative_change(previous, state.template)
        if change < tol:
            logger.info("template converged after %d outer iterations (change %.2e)", outer, change)
            break
        previous = state.template
        before = (state.warps, state.inv_warps, state.template, state.refine_skipped)
        results = _refine_all(state, refine_params, executor)
        kept = {
            i
            for i, r in enumerate(results)
            if refinement_helps(state.template, state.frames[i], state.masks[i], state.inv_warps[i], r)
        }
        if not kept:
            logger.info("outer iteration %d: no refined warp improves the fit", outer + 1)
            break
        state.warps = [r.warp if i in kept else state.warps[i] for i, r in enumerate(results)]
        state.inv_warps = [r.inverse if i in kept else state.inv_warps[i] for i, r in enumerate(results)]
        state.refine_skipped = {i for i, r in enumerate(results) if r.skipped}

        grown = omega_from(state.inv_warps, state.domain)
        if grown != state.domain:
            state.warps, state.inv_warps = _regrid(state.warps, state.inv_warps, grown)
        state.template = accumulate_template(frames, masks, state.warps, state.inv_warps, executor)
        energy = data_energy(state)
        if energy > state.energy_trace[-1]:
            logger.info(
                "outer iteration %d raised the data energy to %.4f; keeping iteration %d",
                outer + 1,
                energy,
                outer,
            )
            state.warps, state.inv_warps, state.template, state.refine_skipped = before
            break
        state.outer_iterations = outer + 1
        state.energy_trace.append(energy)
        logger.info(
            "outer iteration %d: data energy %.4f, %d/%d warps refined", outer + 1, energy, len(kept), len(results)
        )
    return state


__all__ = [
    "InferenceState",
    "RefinedWarp",
    "compute_adjacent_flows",
    "data_energy",
    "growth_canvas",
    "initial_warps",
    "omega_from",
    "refine_warp",
    "refinement_helps",
    "run_joint_optimization",
]
