from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from scenefill.errors import InputError, NumericalError


RESIDUAL_TOL = 1e-4
_NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def _shifted(index: np.ndarray, dy: int, dx: int) -> tuple[np.ndarray, np.ndarray]:
    """Neighbour index of every pixel in direction (dy, dx) and whether it exists."""
    height, width = index.shape
    ys, xs = np.mgrid[0:height, 0:width]
    ny = ys + dy
    nx = xs + dx
    exists = (ny >= 0) & (ny < height) & (nx >= 0) & (nx < width)
    ny = np.clip(ny, 0, height - 1)
    nx = np.clip(nx, 0, width - 1)
    return np.where(exists, ny * width + nx, -1), exists


def solve_laplace(values: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Replace `values` inside `hole` by the discrete harmonic interpolant of the surrounding ring.

    5-point stencil; pixels outside the hole act as Dirichlet data and the image border is a
    natural (zero-flux) boundary. `values` is (H, W) or (H, W, C); channels are solved together.
    """
    values = np.asarray(values, dtype=np.float64)
    hole = np.asarray(hole, dtype=bool)
    squeeze = values.ndim == 2
    planes = values[:, :, None] if squeeze else values
    if planes.shape[:2] != hole.shape:
        raise InputError(f"hole shape {hole.shape} does not match values {planes.shape[:2]}")
    n = int(hole.sum())
    if n == 0:
        return values.copy()
    if n == hole.size:
        raise InputError("hole covers the entire domain; there is no boundary data to extend")

    height, width = hole.shape
    flat = planes.reshape(-1, planes.shape[2])
    unknown = np.full(hole.size, -1, dtype=np.intp)
    unknown[hole.ravel()] = np.arange(n)
    rows_of_hole = np.flatnonzero(hole.ravel())

    diag = np.zeros(n)
    rhs = np.zeros((n, planes.shape[2]))
    off_rows: list[np.ndarray] = []
    off_cols: list[np.ndarray] = []
    for dy, dx in _NEIGHBOURS:
        neighbour, exists = _shifted(unknown.reshape(height, width), dy, dx)
        nb = neighbour.ravel()[rows_of_hole]
        ok = exists.ravel()[rows_of_hole]
        diag += ok
        inner = ok & hole.ravel()[np.where(ok, nb, 0)]
        ring = ok & ~inner
        off_rows.append(np.flatnonzero(inner))
        off_cols.append(unknown[nb[inner]])
        rhs[ring] += flat[nb[ring]]

    rows = np.concatenate([np.arange(n)] + off_rows)
    cols = np.concatenate([np.arange(n)] + off_cols)
    data = np.concatenate([diag] + [-np.ones(len(r)) for r in off_rows])
    system = sparse.csc_matrix((data, (rows, cols)), shape=(n, n))
    solution = splu(system).solve(rhs)

    residual = np.abs(system @ solution - rhs).max()
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise NumericalError(f"Laplace solve did not converge (residual {residual:.3g})")

    out = flat.copy()
    out[rows_of_hole] = solution
    out = out.reshape(planes.shape)
    return out[:, :, 0] if squeeze else out


__all__ = ["RESIDUAL_TOL", "solve_laplace"]
