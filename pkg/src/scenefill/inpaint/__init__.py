from scenefill.inpaint.fill import (
    InpaintParams,
    InpaintResult,
    diffusion_fill,
    gather_sample_stack,
    gather_samples,
    inpaint_frame,
)
from scenefill.inpaint.masks import clean_mask, estimate_mask
from scenefill.inpaint.median import median_inpaint, median_inpaint_pixel

__all__ = [
    "InpaintParams",
    "InpaintResult",
    "clean_mask",
    "diffusion_fill",
    "estimate_mask",
    "gather_sample_stack",
    "gather_samples",
    "inpaint_frame",
    "median_inpaint",
    "median_inpaint_pixel",
]
