from __future__ import annotations

from typing import Sequence

import numpy as np

from scenefill.errors import InputError


def auxiliary_values(f_val: float, m_x: int, beta: float) -> np.ndarray:
    """The m_x + 1 template-anchored values f + (2j - m_x) * beta / 2, j = 0..m_x."""
    j = np.arange(m_x + 1, dtype=np.float64)
    return f_val + (2.0 * j - m_x) * beta / 2.0


def median_inpaint_pixel(samples: Sequence[float], f_val: float | None, m_x: int, beta: float) -> float | None:
    """Exact minimizer of (P - f)^2 + beta * sum_i |P - s_i| for one channel of one pixel.

    Returns None when there is neither a template value nor a sample.
    """
    samples = [float(s) for s in samples]
    if len(samples) != m_x:
        raise InputError(f"m_x={m_x} but {len(samples)} samples were given")
    if beta < 0:
        raise InputError("beta must be >= 0")
    if f_val is None:
        if m_x == 0:
            return None
        ordered = sorted(samples)
        return ordered[(m_x - 1) // 2]
    if m_x == 0:
        return float(f_val)
    ordered = np.sort(np.concatenate([samples, auxiliary_values(float(f_val), m_x, beta)]))
    return float(ordered[m_x])


def median_inpaint(
    samples: np.ndarray,
    present: np.ndarray,
    f_vals: np.ndarray,
    f_defined: np.ndarray,
    beta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized median_inpaint_pixel over P pixels of one channel.

    samples and present are (S, P); f_vals and f_defined are (P,). Even-sized multisets
    (no template value) take the lower-middle element. Returns (values, filled).
    """
    samples = np.asarray(samples, dtype=np.float64)
    present = np.asarray(present, dtype=bool)
    f_vals = np.asarray(f_vals, dtype=np.float64)
    f_defined = np.asarray(f_defined, dtype=bool)
    n_slots = samples.shape[0]

    m_x = present.sum(axis=0)
    j = np.arange(n_slots + 1, dtype=np.float64)[:, None]
    aux = f_vals[None, :] + (2.0 * j - m_x[None, :]) * beta / 2.0
    aux_present = (j <= m_x[None, :]) & f_defined[None, :]

    pool = np.concatenate([np.where(present, samples, np.nan), np.where(aux_present, aux, np.nan)], axis=0)
    pool.sort(axis=0)
    count = m_x + (m_x + 1) * f_defined
    filled = count > 0
    index = np.where(filled, (count - 1) // 2, 0)
    values = np.take_along_axis(pool, index[None, :], axis=0)[0]
    return np.where(filled, values, 0.0), filled


__all__ = ["auxiliary_values", "median_inpaint", "median_inpaint_pixel"]
