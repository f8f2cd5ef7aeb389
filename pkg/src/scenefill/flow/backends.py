from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Protocol

import numpy as np
from scipy import ndimage

from scenefill.config import settings
from scenefill.core.sampling import remap_nearest
from scenefill.core.types import DomainRect, Frame, Mask, WarpField, ensure_same_shape
from scenefill.errors import GeometryError, InputError, NumericalError
from scenefill.flow.harmonic import harmonic_extend
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

# presmoothing plus central differences reach this far from a masked pixel
MASK_BAND_PX = 2


def exclusion_band(mask: np.ndarray, width: int = MASK_BAND_PX) -> np.ndarray:
    """Mask grown by `width` pixels (8-connected)."""
    mask = np.asarray(mask, dtype=bool)
    if width <= 0 or not mask.any():
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=np.ones((3, 3), dtype=bool), iterations=width)


@dataclass(frozen=True)
class FlowParams:
    pyramid_levels: int = 4
    smoothness_weight: float = 0.05
    iterations_per_level: int = 200
    convergence_tol: float = 1e-3
    warps_per_level: int = 3
    backend: str = "variational"

    def __post_init__(self) -> None:
        if self.pyramid_levels < 1:
            raise InputError("pyramid_levels must be >= 1")
        if self.smoothness_weight <= 0:
            raise InputError("smoothness_weight must be > 0")
        if self.iterations_per_level < 1 or self.warps_per_level < 1:
            raise InputError("iterations_per_level and warps_per_level must be >= 1")
        if self.convergence_tol <= 0:
            raise InputError("convergence_tol must be > 0")

    @classmethod
    def from_settings(cls) -> "FlowParams":
        return cls(
            pyramid_levels=settings.FLOW_PYRAMID_LEVELS,
            smoothness_weight=settings.FLOW_SMOOTHNESS,
            iterations_per_level=settings.FLOW_ITERATIONS,
            convergence_tol=settings.FLOW_TOLERANCE,
            warps_per_level=settings.FLOW_WARPS_PER_LEVEL,
            backend=settings.FLOW_BACKEND,
        )

    def refinement(self) -> "FlowParams":
        """Shallower pyramid for updates that start from a close initialization."""
        return replace(self, pyramid_levels=min(self.pyramid_levels, 2))


class FlowBackend(Protocol):
    def __call__(
        self,
        src: np.ndarray,
        dst: np.ndarray,
        src_mask: np.ndarray,
        dst_mask: np.ndarray,
        params: FlowParams,
        init: np.ndarray | None,
    ) -> np.ndarray:
        """Return an (H, W, 2) displacement (dx, dy) taking src pixels onto dst.

        Both arrays are indexed by their own local pixel coordinates and may differ in size.
        """
        ...


_REGISTRY: dict[str, Callable[[], FlowBackend]] = {}


def register_backend(name: str, factory: Callable[[], FlowBackend]) -> None:
    _REGISTRY[name] = factory


def get_backend(name: str) -> FlowBackend:
    if name not in _REGISTRY:
        raise InputError(f"unknown flow backend {name!r}; available: {', '.join(sorted(_REGISTRY))}")
    return _REGISTRY[name]()


def list_backends() -> list[str]:
    return sorted(_REGISTRY)


def compute_flow(
    src: Frame,
    dst: Frame,
    src_mask: Mask,
    dst_mask: Mask,
    params: FlowParams,
    init: WarpField | None = None,
    domain: DomainRect | None = None,
    dst_domain: DomainRect | None = None,
) -> WarpField:
    """Dense flow from src to dst whose data term ignores masked pixels on either side.

    Source pixels within MASK_BAND_PX of the source mask, and those landing within that band
    of the destination mask, take the harmonic extension of the flow around them.
    `domain` places src on the global grid (default: the frame rectangle); `dst_domain` places
    dst and defaults to `domain`, so differently sized images need it spelled out. Without
    `init` the solver starts from the identity between the two rectangles.
    """
    if src.channels != dst.channels:
        raise InputError(f"channel mismatch: {src.channels} vs {dst.channels}")
    src_mask.check_matches(src)
    dst_mask.check_matches(dst)
    domain = domain or src.rect
    dst_domain = dst_domain or domain
    ensure_same_shape(domain.shape, src.shape, "compute_flow source domain")
    ensure_same_shape(dst_domain.shape, dst.shape, "compute_flow destination domain")

    if init is not None:
        if init.src != domain or init.dst != dst_domain:
            raise GeometryError("compute_flow init must map the source domain onto the destination domain")
        init_disp = init.map - domain.grid()
    elif domain != dst_domain:
        init_disp = np.broadcast_to(domain.offset_to(dst_domain), domain.shape + (2,)).copy()
    else:
        init_disp = None

    backend = get_backend(params.backend)
    displacement = backend(src.data, dst.data, src_mask.data, dst_mask.data, params, init_disp)
    if not np.all(np.isfinite(displacement)):
        raise NumericalError(f"flow backend {params.backend!r} produced non-finite displacements")

    field = WarpField(domain, dst_domain, domain.grid() + displacement)
    hole = exclusion_band(src_mask.data)
    if dst_mask.any():
        landed, inside = remap_nearest(exclusion_band(dst_mask.data), field.map)
        hole |= landed & inside
    if hole.any() and not hole.all():
        field = harmonic_extend(field, Mask(hole))
    logger.debug(
        "flow %s: mean |d| %.3f px, %d masked src px",
        params.backend,
        float(np.linalg.norm(field.displacement, axis=-1).mean()),
        src_mask.count,
    )
    return field


__all__ = [
    "MASK_BAND_PX",
    "FlowBackend",
    "FlowParams",
    "compute_flow",
    "exclusion_band",
    "get_backend",
    "list_backends",
    "register_backend",
]
