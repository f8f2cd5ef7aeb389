from __future__ import annotations

import numpy as np
import pytest
from conftest import identity_state

from scenefill.core.types import DomainRect, Frame, Mask, WarpField
from scenefill.errors import GeometryError, InputError
from scenefill.flow import compose_extended, from_displacement, identity_warp, perturb_warp
from scenefill.template import (
    InferenceState,
    SceneTemplate,
    accumulate_template,
    compute_adjacent_flows,
    data_energy,
    growth_canvas,
    initial_warps,
    jacobian_det,
    omega_from,
    refine_warp,
    run_joint_optimization,
)

RECT = DomainRect((0, 0), 16, 12)


def shift(dx: float, dy: float = 0.0, rect: DomainRect = RECT) -> WarpField:
    return from_displacement(np.broadcast_to([dx, dy], rect.shape + (2,)), rect)


def test_jacobian_of_random_affine_warps(rng):
    src = DomainRect((0, 0), 20, 20)
    dst = DomainRect((-100, -100), 300, 300)
    for _ in range(20):
        a = rng.normal(size=(2, 2))
        if np.linalg.det(a) < 0:
            a[:, 0] *= -1
        target = rng.uniform(0.5, 2.0)
        a *= np.sqrt(target / np.linalg.det(a))
        coords = src.grid() @ a.T + rng.uniform(-5, 5, size=2) + 100.0
        warp = WarpField(src, dst, coords)
        x, y = rng.integers(0, 20, size=2)
        assert jacobian_det(warp, (x, y)) == pytest.approx(target, abs=1e-3)


def test_jacobian_det_rejects_outside_pixel():
    with pytest.raises(InputError):
        jacobian_det(identity_warp(RECT), (16, 0))


def test_accumulate_averages_unmasked_observations():
    frames = [Frame.constant(12, 16, v) for v in (0.2, 0.4, 0.9)]
    left = np.zeros(RECT.shape, dtype=bool)
    left[:, :8] = True
    masks = [Mask.empty(12, 16), Mask.empty(12, 16), Mask(left)]
    warps = [identity_warp(RECT) for _ in frames]
    template = accumulate_template(frames, masks, warps)
    assert np.allclose(template.radiance[:, :8, 0], 0.3)
    assert np.allclose(template.radiance[:, 8:, 0], 0.5)
    assert np.array_equal(template.weight[:, :8], np.full((12, 8), 2.0))
    assert template.coverage == 1.0


def test_accumulate_is_order_independent(rng):
    frames = [Frame(rng.random((12, 16, 3))) for _ in range(5)]
    masks = [Mask(rng.random((12, 16)) < 0.2) for _ in range(5)]
    warps = [shift(*rng.uniform(-1.5, 1.5, size=2)) for _ in range(5)]
    baseline = accumulate_template(frames, masks, warps)
    perm = rng.permutation(5)
    shuffled = accumulate_template([frames[i] for i in perm], [masks[i] for i in perm], [warps[i] for i in perm])
    assert np.array_equal(baseline.radiance, shuffled.radiance)
    assert np.array_equal(baseline.weight, shuffled.weight)


def test_accumulate_matches_per_pixel_average(rng):
    frames = [Frame(rng.random((12, 16))) for _ in range(4)]
    masks = [Mask(rng.random((12, 16)) < 0.3) for _ in range(4)]
    warps = [shift(i) for i in range(4)]
    template = accumulate_template(frames, masks, warps)
    for y in range(12):
        for x in range(16):
            seen = [frames[i].data[y, x + i, 0] for i in range(4) if x + i < 16 and not masks[i].data[y, x + i]]
            if seen:
                assert template.defined[y, x]
                assert template.radiance[y, x, 0] == pytest.approx(np.mean(seen), abs=1e-12)
            else:
                assert not template.defined[y, x]


def test_accumulate_rejects_misplaced_warps():
    frame = Frame.constant(12, 16, 0.5)
    other = identity_warp(DomainRect((0, 0), 10, 10))
    with pytest.raises(GeometryError):
        accumulate_template([frame, frame], [Mask.like(frame)] * 2, [identity_warp(RECT), other])
    with pytest.raises(InputError):
        accumulate_template([], [], [])


def test_template_display_paints_undefined_pixels():
    frame = Frame.constant(12, 16, 0.5)
    hole = np.zeros(RECT.shape, dtype=bool)
    hole[0, 0] = True
    template = accumulate_template([frame], [Mask(hole)], [identity_warp(RECT)])
    shown = template.to_frame()
    assert np.array_equal(shown.data[0, 0], [1.0, 0.0, 1.0])
    assert np.allclose(shown.data[1, 1], 0.5)


def test_compose_extended_continues_past_the_inner_source():
    canvas = growth_canvas(RECT)
    inverse = identity_warp(RECT, canvas)
    moved = compose_extended(shift(2.0), inverse)
    assert moved.valid.all()
    assert np.allclose(moved.map, RECT.grid() + [2.0 + 16, 12.0])


def test_initial_warps_chain_from_the_key_frame():
    forward = [shift(2.0), shift(2.0)]
    backward = [shift(-2.0), shift(-2.0)]
    warps, inverse = initial_warps(forward, backward, 1, RECT)
    assert np.allclose(warps[2].displacement[warps[2].valid], [2.0, 0.0])
    assert np.allclose(warps[0].displacement[warps[0].valid], [-2.0, 0.0])
    canvas = growth_canvas(RECT)
    assert inverse[0].dst == canvas
    assert np.allclose(inverse[0].map - RECT.grid() - RECT.offset_to(canvas), [2.0, 0.0])
    assert omega_from(inverse, RECT) == DomainRect((-2, 0), 20, 12)


def test_omega_growth_is_capped():
    wide = DomainRect((-100, -100), 300, 300)
    far = [from_displacement(np.broadcast_to([40.0, 0.0], RECT.shape + (2,)), RECT, wide)]
    omega = omega_from(far, RECT)
    assert omega.x1 == RECT.x1 + RECT.width


def test_joint_template_covers_every_panned_frame(rng):
    scene = rng.random((12, 20))
    frames = [Frame(scene[:, 4:20]), Frame(scene[:, 2:18]), Frame(scene[:, 0:16])]
    masks = [Mask.like(f) for f in frames]
    adjacent = ([shift(2.0), shift(2.0)], [shift(-2.0), shift(-2.0)])
    state = run_joint_optimization(frames, masks, key_frame=1, refine=False, adjacent=adjacent)
    assert state.domain == DomainRect((-2, 0), 20, 12)
    assert state.template.defined.all()
    assert np.allclose(state.template.radiance[:, :, 0], scene, atol=1e-9)
    assert state.energy_trace[0] == pytest.approx(0.0, abs=1e-12)


def test_joint_static_sequence_recovers_background(static_sequence):
    frames, masks, background = static_sequence
    rect = frames[0].rect
    adjacent = ([identity_warp(rect)] * 4, [identity_warp(rect)] * 4)
    state = run_joint_optimization(frames, masks, refine=False, adjacent=adjacent)
    assert state.key_frame == 2
    assert state.domain == rect
    assert state.template.defined.all()
    assert np.allclose(state.template.radiance, background.data, atol=1e-12)


def test_joint_single_frame():
    data = np.linspace(0, 1, 12 * 16).reshape(12, 16)
    hole = np.zeros(RECT.shape, dtype=bool)
    hole[4:6, 4:6] = True
    state = run_joint_optimization([Frame(data)], [Mask(hole)])
    assert len(state) == 1
    assert np.array_equal(state.template.defined, ~hole)
    assert np.allclose(state.template.radiance[~hole, 0], data[~hole])


def test_joint_rejects_bad_inputs():
    frame = Frame.constant(12, 16, 0.5)
    with pytest.raises(InputError):
        run_joint_optimization([frame, frame], [Mask.like(frame)])
    with pytest.raises(InputError):
        run_joint_optimization([frame, frame], [Mask.like(frame)] * 2, key_frame=5, refine=False)
    with pytest.raises(InputError):
        run_joint_optimization(
            [frame, frame], [Mask.like(frame)] * 2, refine=False, adjacent=([identity_warp(RECT)] * 2, [])
        )


def test_state_requires_template_anchored_warps(static_sequence):
    frames, masks, _ = static_sequence
    template = accumulate_template(frames[:1], masks[:1], [identity_warp(frames[0].rect)])
    stray = identity_warp(DomainRect((0, 0), 8, 8))
    with pytest.raises(InputError):
        InferenceState(frames[:1], masks[:1], [stray], [stray], template, 0)


def test_adjacent_flows_follow_the_pan(pan_sequence, fast_flow):
    forward, backward = compute_adjacent_flows(pan_sequence.frames, pan_sequence.masks, fast_flow)
    assert len(forward) == len(backward) == len(pan_sequence) - 1
    interior = (slice(6, -6), slice(6, -6))
    for fwd, bwd in zip(forward, backward):
        assert np.abs(fwd.displacement[interior] - [-1.0, 0.0]).mean() < 0.25
        assert np.abs(bwd.displacement[interior] - [1.0, 0.0]).mean() < 0.25
        assert fwd.valid[interior].mean() > 0.8


def test_data_energy_vanishes_on_a_consistent_static_scene(static_sequence):
    frames, masks, background = static_sequence
    state = identity_state(frames, masks)
    assert data_energy(state) == pytest.approx(0.0, abs=1e-20)
    noisy = [frames[0].replace(frames[0].data * 0.5)] + frames[1:]
    assert data_energy(identity_state(noisy, masks)) > 0.0


def texture_template(data: np.ndarray) -> SceneTemplate:
    rect = DomainRect((0, 0), data.shape[1], data.shape[0])
    return SceneTemplate.from_accumulators(rect, data.copy(), np.ones(rect.shape))


def interior_epe(warp: WarpField, expected: list[float], margin: int = 6) -> float:
    error = np.linalg.norm(warp.displacement - np.asarray(expected), axis=-1)
    return float(error[margin:-margin, margin:-margin].mean())


def test_refine_warp_recovers_a_shifted_template(texture, fast_flow):
    # template pixel p shows what the frame shows at p + (2, 0)
    template = texture_template(texture.data[20:84, 20:84])
    frame = Frame(texture.data[20:84, 18:82])
    refined = refine_warp(template, frame, Mask.like(frame), identity_warp(frame.rect), fast_flow)
    assert not refined.skipped
    assert interior_epe(refined.warp, [2.0, 0.0]) < 0.5
    assert interior_epe(refined.inverse, [-2.0, 0.0]) < 0.5


def test_refine_warp_improves_a_noisy_initialization(texture, fast_flow, rng):
    template = texture_template(texture.data[20:84, 20:84])
    frame = Frame(texture.data[20:84, 18:82])
    rect = frame.rect
    w_init = perturb_warp(shift(2.0, 0.0, rect), 0.5, rng)
    inv_init = perturb_warp(shift(-2.0, 0.0, rect), 0.5, rng)
    refined = refine_warp(template, frame, Mask.like(frame), w_init, fast_flow.refinement(), inv_init)
    assert interior_epe(refined.warp, [2.0, 0.0]) < interior_epe(w_init, [2.0, 0.0])
    assert interior_epe(refined.inverse, [-2.0, 0.0]) < interior_epe(inv_init, [-2.0, 0.0])


def test_refine_warp_skips_frames_the_template_does_not_cover(texture, fast_flow):
    data = texture.data[:32, :32]
    empty = SceneTemplate.from_accumulators(DomainRect((0, 0), 32, 32), data.copy(), np.zeros((32, 32)))
    frame = Frame(data)
    refined = refine_warp(empty, frame, Mask.like(frame), identity_warp(frame.rect), fast_flow)
    assert refined.skipped
    assert np.array_equal(refined.warp.map, identity_warp(frame.rect).map)


def test_energy_trace_does_not_rise(pan_sequence, fast_flow):
    state = run_joint_optimization(pan_sequence.frames, pan_sequence.masks, params=fast_flow, max_outer=3)
    trace = state.energy_trace
    assert len(trace) == state.outer_iterations + 1
    assert all(later <= earlier * 1.01 for earlier, later in zip(trace, trace[1:]))
