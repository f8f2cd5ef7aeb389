from __future__ import annotations

import numpy as np
import pytest

from scenefill.core.types import Frame, Mask
from scenefill.flow import FlowParams
from scenefill.synth import MaskSpec, WarpSpec, generate, periodic_noise


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def fast_flow() -> FlowParams:
    return FlowParams(pyramid_levels=3, smoothness_weight=0.05, iterations_per_level=150, convergence_tol=1e-4)


@pytest.fixture
def texture(rng: np.random.Generator) -> Frame:
    return periodic_noise(96, 3.0, rng, channels=3)


def box_mask(height: int, width: int, x0: int, y0: int, size: int) -> Mask:
    data = np.zeros((height, width), dtype=bool)
    data[y0 : y0 + size, x0 : x0 + size] = True
    return Mask(data)


@pytest.fixture
def static_sequence(texture: Frame) -> tuple[list[Frame], list[Mask], Frame]:
    """Five identical 32x32 frames with an 8x8 box sliding right by 4 px per frame."""
    background = Frame(texture.data[10:42, 20:52])
    frames = []
    masks = []
    for t in range(5):
        mask = box_mask(32, 32, 6 + 4 * t, 12, 8)
        observed = np.where(mask.data[:, :, None], 1.0 - background.data, background.data)
        frames.append(Frame(observed))
        masks.append(mask)
    return frames, masks, background


@pytest.fixture
def pan_sequence(texture: Frame):
    """Small translation pan (1 px/frame) with a moving box; analytic flows included."""
    return generate(
        texture,
        WarpSpec(kind="translation", velocity=(1.0, 0.0)),
        MaskSpec(start=(14.0, 20.0), velocity=(3.0, 0.0), size=8),
        T=5,
        frame_size=(40, 40),
    )


def identity_state(frames: list[Frame], masks: list[Mask]):
    """Inference state of a static camera: every warp is the identity and the template is accumulated."""
    from scenefill.flow import identity_warp
    from scenefill.template import InferenceState, accumulate_template

    rect = frames[0].rect
    warps = [identity_warp(rect) for _ in frames]
    inverse = [identity_warp(rect) for _ in frames]
    template = accumulate_template(frames, masks, warps, inverse)
    return InferenceState(list(frames), list(masks), warps, inverse, template, key_frame=len(frames) // 2)
