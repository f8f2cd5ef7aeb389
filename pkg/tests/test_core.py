from __future__ import annotations

import numpy as np
import pytest

from scenefill.core import (
    DomainRect,
    Frame,
    Mask,
    WarpField,
    bounding_rect,
    rect_union,
    sample_bilinear,
    sample_nearest,
    solve_laplace,
)
from scenefill.errors import GeometryError, InputError, SamplingError


def test_frame_validates_range_and_channels():
    with pytest.raises(InputError):
        Frame(np.full((4, 4, 3), 1.5))
    with pytest.raises(InputError):
        Frame(np.zeros((4, 4, 2)))
    with pytest.raises(InputError):
        Frame(np.full((4, 4), np.nan))


def test_frame_is_read_only_and_grayscale_gets_channel_axis():
    frame = Frame(np.zeros((3, 5)))
    assert frame.shape == (3, 5)
    assert frame.channels == 1
    with pytest.raises(ValueError):
        frame.data[0, 0, 0] = 1.0


def test_uint8_conversion():
    pixels = np.arange(0, 256, dtype=np.uint8).reshape(16, 16)
    frame = Frame.from_uint8(pixels)
    assert np.array_equal(frame.to_uint8(), pixels)


def test_mask_helpers():
    a = Mask.empty(4, 4)
    assert not a.any()
    data = np.zeros((4, 4), dtype=bool)
    data[1, 2] = True
    b = Mask(data)
    assert a.union(b).count == 1
    with pytest.raises(InputError):
        a.union(Mask.empty(3, 4))


def test_domain_rect_offsets_and_grid():
    a = DomainRect((2, 3), 4, 5)
    b = DomainRect((0, 0), 10, 10)
    assert np.array_equal(a.offset_to(b), [2.0, 3.0])
    grid = a.grid()
    assert grid.shape == (5, 4, 2)
    assert np.array_equal(grid[2, 1], [1.0, 2.0])
    inside = a.contains(np.array([[-0.5, 0.0], [3.5, 4.5], [3.6, 0.0], [0.0, -0.51]]))
    assert inside.tolist() == [True, True, False, False]


def test_warp_validity_is_cleared_outside_destination():
    rect = DomainRect((0, 0), 4, 4)
    coords = rect.grid() + np.array([2.0, 0.0])
    warp = WarpField(rect, rect, coords)
    assert warp.valid[:, :2].all()
    assert not warp.valid[:, 2:].any()
    assert np.allclose(warp.displacement, [2.0, 0.0])


def test_warp_rejects_wrong_shape():
    rect = DomainRect((0, 0), 4, 4)
    with pytest.raises(GeometryError):
        WarpField(rect, rect, np.zeros((3, 4, 2)))


def test_bilinear_and_nearest_sampling():
    frame = Frame(np.array([[0.0, 1.0], [0.5, 0.5]]))
    assert sample_bilinear(frame, (0.5, 0.0))[0] == pytest.approx(0.5)
    assert sample_bilinear(frame, (0.5, 0.5))[0] == pytest.approx(0.5)
    # halves round toward the smaller index
    assert sample_nearest(frame, (0.5, 0.0))[0] == 0.0
    assert sample_nearest(frame, (0.51, 0.0))[0] == 1.0
    # the 0.5 px margin clamps to the border pixel
    assert sample_bilinear(frame, (-0.5, 0.0))[0] == 0.0


def test_sampling_outside_margin_raises():
    frame = Frame(np.zeros((4, 4)))
    with pytest.raises(SamplingError):
        sample_bilinear(frame, (4.0, 0.0))
    with pytest.raises(SamplingError):
        sample_nearest(frame, (0.0, -0.6))


def test_rect_union_and_bounding_rect():
    union = rect_union([DomainRect((0, 0), 4, 4), DomainRect((-2, 3), 2, 6)])
    assert union == DomainRect((-2, 0), 6, 9)
    with pytest.raises(InputError):
        rect_union([])
    points = np.array([[-1.2, 0.4], [3.4, 2.6]])
    assert bounding_rect(points) == DomainRect((-1, 0), 5, 4)
    assert bounding_rect(np.zeros((0, 2))) is None


def test_laplace_reproduces_linear_functions():
    ys, xs = np.mgrid[0:12, 0:12].astype(np.float64)
    values = 2.0 * xs + 3.0 * ys
    hole = np.zeros((12, 12), dtype=bool)
    hole[3:8, 4:9] = True
    damaged = np.where(hole, 0.0, values)
    assert np.allclose(solve_laplace(damaged, hole), values, atol=1e-8)


def test_laplace_hole_at_border_uses_natural_boundary():
    values = np.full((6, 6, 2), 0.25)
    hole = np.zeros((6, 6), dtype=bool)
    hole[:, :3] = True
    filled = solve_laplace(np.where(hole[:, :, None], 0.0, values), hole)
    assert np.allclose(filled, 0.25)


def test_laplace_without_boundary_data_fails():
    with pytest.raises(InputError):
        solve_laplace(np.zeros((3, 3)), np.ones((3, 3), dtype=bool))
