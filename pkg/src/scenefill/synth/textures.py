from __future__ import annotations

import numpy as np

from scenefill.core.types import Frame
from scenefill.errors import InputError
from scenefill.synth.specs import TextureSpec


def periodic_noise(size: int, correlation_px: float, rng: np.random.Generator, channels: int = 3) -> Frame:
    """Tileable smooth noise: white noise low-passed with a Gaussian spectrum, stretched to [0.05, 0.95]."""
    if size < 2:
        raise InputError("texture size must be >= 2")
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.rfftfreq(size)[None, :]
    envelope = np.exp(-2.0 * (np.pi * correlation_px) ** 2 * (fx**2 + fy**2))
    layers = []
    for _ in range(channels):
        white = rng.standard_normal((size, size))
        smooth = np.fft.irfft2(np.fft.rfft2(white) * envelope, s=(size, size))
        lo, hi = smooth.min(), smooth.max()
        layers.append(0.05 + 0.9 * (smooth - lo) / (hi - lo if hi > lo else 1.0))
    return Frame(np.stack(layers, axis=-1))


def checkerboard(height: int, width: int, cell: int, channels: int = 1, phase: tuple[float, float] = (0.0, 0.0)) -> Frame:
    """Binary 0/1 checkerboard with `cell`-pixel squares, shifted by `phase` pixels."""
    if cell < 1:
        raise InputError("checkerboard cell must be >= 1")
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    board = ((np.floor((xs + phase[0]) / cell) + np.floor((ys + phase[1]) / cell)) % 2).astype(np.float64)
    return Frame(np.repeat(board[:, :, None], channels, axis=2))


def make_texture(spec: TextureSpec, rng: np.random.Generator) -> Frame:
    if spec.kind == "checkerboard":
        return checkerboard(spec.size, spec.size, spec.cell, spec.channels)
    return periodic_noise(spec.size, spec.correlation_px, rng, spec.channels)


__all__ = ["checkerboard", "make_texture", "periodic_noise"]
