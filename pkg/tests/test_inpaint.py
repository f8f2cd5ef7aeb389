from __future__ import annotations

import numpy as np
import pytest

from conftest import box_mask, identity_state
from scenefill.core.types import Frame, Mask
from scenefill.errors import InputError
from scenefill.flow import identity_warp
from scenefill.inpaint import (
    InpaintParams,
    clean_mask,
    diffusion_fill,
    estimate_mask,
    gather_samples,
    inpaint_frame,
    median_inpaint,
    median_inpaint_pixel,
)
from scenefill.inpaint.fill import sample_order


def objective(p: np.ndarray, samples: np.ndarray, f_val: float, beta: float) -> np.ndarray:
    return (p - f_val) ** 2 + beta * np.abs(p[:, None] - samples[None, :]).sum(axis=1)


def test_median_minimizes_the_pixel_energy(rng):
    for _ in range(1000):
        m_x = int(rng.integers(0, 10))
        samples = rng.random(m_x)
        f_val = float(rng.random())
        beta = float(rng.choice([0.0, 0.05, 0.2, 1.0]))
        best = median_inpaint_pixel(samples, f_val, m_x, beta)
        # the minimizer lies between the extreme data points
        values = np.concatenate([samples, [f_val]])
        grid = np.arange(values.min(), values.max() + 1e-4, 1e-4)
        energy = objective(grid, samples, f_val, beta)
        assert abs(best - grid[np.argmin(energy)]) <= 1e-4 + 1e-9
        assert objective(np.array([best]), samples, f_val, beta)[0] <= energy.min() + 1e-9


def test_median_without_template_value():
    assert median_inpaint_pixel([0.1, 0.5, 0.3, 0.9], None, 4, 0.05) == 0.3
    assert median_inpaint_pixel([0.7, 0.2, 0.4], None, 3, 0.05) == 0.4
    assert median_inpaint_pixel([], None, 0, 0.05) is None
    assert median_inpaint_pixel([], 0.25, 0, 0.05) == 0.25


def test_median_checks_arguments():
    with pytest.raises(InputError):
        median_inpaint_pixel([0.1], 0.5, 2, 0.05)
    with pytest.raises(InputError):
        median_inpaint_pixel([0.1], 0.5, 1, -1.0)


def test_vectorized_median_matches_per_pixel(rng):
    slots, pixels = 6, 300
    samples = rng.random((slots, pixels))
    present = rng.random((slots, pixels)) < 0.5
    f_vals = rng.random(pixels)
    f_defined = rng.random(pixels) < 0.7
    values, filled = median_inpaint(samples, present, f_vals, f_defined, 0.08)
    for p in range(pixels):
        own = samples[present[:, p], p]
        expected = median_inpaint_pixel(own, f_vals[p] if f_defined[p] else None, len(own), 0.08)
        if expected is None:
            assert not filled[p]
        else:
            assert filled[p]
            assert values[p] == expected


def test_sample_order_is_nearest_first():
    assert sample_order(2, 6) == [1, 3, 0, 4, 5]
    assert sample_order(0, 3) == [1, 2]


def test_inpaint_static_sequence_recovers_background(static_sequence):
    frames, masks, background = static_sequence
    state = identity_state(frames, masks)
    for t in range(len(frames)):
        result = inpaint_frame(state, t, InpaintParams(beta=0.05))
        assert np.allclose(result.frame.data, background.data, atol=1e-12)
        assert not result.unfilled.any()
        assert (result.sample_count[masks[t].data] > 0).all()
        assert (result.sample_count[~masks[t].data] == 0).all()


def test_template_only_fill(static_sequence):
    frames, masks, background = static_sequence
    state = identity_state(frames, masks)
    result = inpaint_frame(state, 1, InpaintParams(use_samples=False))
    assert np.allclose(result.frame.data, background.data, atol=1e-12)
    assert not result.sample_count.any()


def test_gather_samples(static_sequence):
    frames, masks, background = static_sequence
    state = identity_state(frames, masks)
    samples = gather_samples(state, 0, (7, 13))
    assert len(samples) == 4
    for value in samples:
        assert np.array_equal(value, background.data[13, 7])
    assert len(gather_samples(state, 0, (7, 13), max_sample_frames=2)) == 2
    with pytest.raises(InputError):
        gather_samples(state, 0, (0, 0))


def test_never_revealed_pixels_are_diffused(static_sequence):
    frames, masks, background = static_sequence
    common = box_mask(32, 32, 2, 2, 2)
    masks = [m.union(common) for m in masks]
    state = identity_state(frames, masks)
    result = inpaint_frame(state, 3)
    assert result.unfilled.count == 4
    assert np.array_equal(result.unfilled.data, common.data)
    patch = result.frame.data[2:4, 2:4]
    assert patch.min() >= background.data.min() and patch.max() <= background.data.max()


def test_fully_masked_sequence_leaves_input():
    frame = Frame.constant(8, 8, 0.3)
    full = Mask(np.ones((8, 8), dtype=bool))
    state = identity_state([frame, frame], [full, full])
    result = inpaint_frame(state, 0)
    assert result.unfilled.data.all()
    assert np.array_equal(result.frame.data, frame.data)


def test_inpaint_frame_index_checked(static_sequence):
    frames, masks, _ = static_sequence
    with pytest.raises(InputError):
        inpaint_frame(identity_state(frames, masks), 5)


def test_inpaint_params_validation():
    with pytest.raises(InputError):
        InpaintParams(beta=-0.1)
    with pytest.raises(InputError):
        InpaintParams(alpha=0.0)


def test_diffusion_fill_keeps_known_pixels():
    data = np.tile(np.linspace(0.0, 1.0, 10), (10, 1))
    hole = box_mask(10, 10, 3, 3, 4)
    filled = diffusion_fill(Frame(data), hole)
    assert np.array_equal(filled.data[~hole.data, 0], data[~hole.data])
    assert np.allclose(filled.data[:, :, 0], data, atol=1e-6)


def test_estimate_mask_finds_offset_box(static_sequence):
    frames, masks, background = static_sequence
    state = identity_state(frames, masks)
    box = box_mask(32, 32, 10, 4, 8)
    shifted = np.where(background.data < 0.5, background.data + 0.5, background.data - 0.5)
    frame = Frame(np.where(box.data[:, :, None], shifted, background.data))
    found = estimate_mask(frame, state.template, identity_warp(frame.rect), alpha=0.1)
    assert np.array_equal(found.data, box.data)
    with pytest.raises(InputError):
        estimate_mask(frame, state.template, identity_warp(frame.rect), alpha=0.0)


def test_clean_mask_drops_specks_and_closes_holes():
    raw = np.zeros((20, 20), dtype=bool)
    raw[2:10, 2:10] = True
    raw[5, 5] = False
    raw[15, 15] = True
    cleaned = clean_mask(raw)
    assert cleaned[2:10, 2:10].all()
    assert not cleaned[15, 15]
    assert cleaned.sum() == 64
    assert not clean_mask(np.zeros((5, 5), dtype=bool)).any()
