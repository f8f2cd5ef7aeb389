from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from scenefill.core.types import DomainRect
from scenefill.errors import InputError


def rect_union(rects: Iterable[DomainRect]) -> DomainRect:
    """Smallest axis-aligned rectangle containing every input rectangle."""
    rects = list(rects)
    if not rects:
        raise InputError("rect_union needs at least one rectangle")
    x0 = min(r.origin[0] for r in rects)
    y0 = min(r.origin[1] for r in rects)
    x1 = max(r.x1 for r in rects)
    y1 = max(r.y1 for r in rects)
    return DomainRect((x0, y0), x1 - x0, y1 - y0)


def bounding_rect(points: np.ndarray, origin: tuple[int, int] = (0, 0)) -> DomainRect | None:
    """Pixel rectangle whose centres cover all (x, y) points, given in coordinates local to `origin`."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if points.size == 0:
        return None
    x0 = math.floor(points[:, 0].min() + 0.5)
    y0 = math.floor(points[:, 1].min() + 0.5)
    x1 = math.ceil(points[:, 0].max() - 0.5)
    y1 = math.ceil(points[:, 1].max() - 0.5)
    return DomainRect((origin[0] + x0, origin[1] + y0), x1 - x0 + 1, y1 - y0 + 1)


__all__ = ["bounding_rect", "rect_union"]
