from scenefill.core.geometry import bounding_rect, rect_union
from scenefill.core.laplace import solve_laplace
from scenefill.core.sampling import remap_bilinear, remap_nearest, sample_bilinear, sample_nearest
from scenefill.core.types import DomainRect, Frame, Mask, WarpField

__all__ = [
    "DomainRect",
    "Frame",
    "Mask",
    "WarpField",
    "bounding_rect",
    "rect_union",
    "remap_bilinear",
    "remap_nearest",
    "sample_bilinear",
    "sample_nearest",
    "solve_laplace",
]
