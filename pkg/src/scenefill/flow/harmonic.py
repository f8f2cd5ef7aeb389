from __future__ import annotations

import numpy as np

from scenefill.core.laplace import solve_laplace
from scenefill.core.types import Mask, WarpField, ensure_same_shape


def harmonic_extend(w: WarpField, hole: Mask) -> WarpField:
    """Replace the map inside `hole` by the Laplace solution matching the surrounding ring."""
    ensure_same_shape(hole.shape, w.src.shape, "harmonic_extend hole")
    if not hole.any():
        return w
    coords = solve_laplace(w.map, hole.data)
    # filled pixels are judged only by where they land
    valid = np.where(hole.data, True, w.valid)
    return WarpField(w.src, w.dst, coords, valid)


__all__ = ["harmonic_extend"]
