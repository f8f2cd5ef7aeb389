from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scenefill.errors import GeometryError, InputError


SAMPLING_MARGIN = 0.5
VALUE_TOLERANCE = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Frame:
    """Dense H x W x k image with intensities in [0, 1]; pixel (i, j) is centred at (x=i, y=j)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InputError(f"frame data must be H x W x k, got shape {data.shape}")
        if data.shape[2] not in (1, 3):
            raise InputError(f"frame must have 1 or 3 channels, got {data.shape[2]}")
        if not np.all(np.isfinite(data)):
            raise InputError("frame contains non-finite values")
        if data.min() < -VALUE_TOLERANCE or data.max() > 1.0 + VALUE_TOLERANCE:
            raise InputError(f"frame values must lie in [0, 1], got [{data.min():.4g}, {data.max():.4g}]")
        object.__setattr__(self, "data", _frozen(np.clip(data, 0.0, 1.0)))

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def rect(self) -> "DomainRect":
        return DomainRect((0, 0), self.width, self.height)

    @classmethod
    def from_uint8(cls, pixels: np.ndarray) -> "Frame":
        return cls(np.asarray(pixels, dtype=np.float64) / 255.0)

    @classmethod
    def constant(cls, height: int, width: int, value: float | tuple[float, ...], channels: int = 1) -> "Frame":
        values = np.broadcast_to(np.asarray(value, dtype=np.float64), (channels,))
        return cls(np.broadcast_to(values, (height, width, channels)).copy())

    def to_uint8(self) -> np.ndarray:
        pixels = np.rint(self.data * 255.0).astype(np.uint8)
        return pixels[:, :, 0] if self.channels == 1 else pixels

    def replace(self, data: np.ndarray) -> "Frame":
        return Frame(data)


@dataclass(frozen=True)
class Mask:
    """Binary H x W map; True marks pixels to inpaint."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.ndim == 3 and data.shape[2] == 1:
            data = data[:, :, 0]
        if data.ndim != 2:
            raise InputError(f"mask must be H x W, got shape {data.shape}")
        object.__setattr__(self, "data", _frozen(data.astype(bool)))

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def count(self) -> int:
        return int(self.data.sum())

    def any(self) -> bool:
        return bool(self.data.any())

    @classmethod
    def empty(cls, height: int, width: int) -> "Mask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def like(cls, frame: Frame) -> "Mask":
        return cls.empty(frame.height, frame.width)

    def union(self, other: "Mask") -> "Mask":
        ensure_same_shape(self.shape, other.shape, "mask union")
        return Mask(self.data | other.data)

    def check_matches(self, frame: Frame) -> None:
        ensure_same_shape(self.shape, frame.shape, "mask vs frame")


@dataclass(frozen=True)
class DomainRect:
    """Axis-aligned pixel rectangle placed at `origin` (x, y) of a global pixel grid."""

    origin: tuple[int, int]
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InputError(f"domain must be at least 1x1, got {self.width}x{self.height}")
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def x1(self) -> int:
        return self.origin[0] + self.width

    @property
    def y1(self) -> int:
        return self.origin[1] + self.height

    def offset_to(self, other: "DomainRect") -> np.ndarray:
        """Vector adding which turns coordinates local to self into coordinates local to `other`."""
        return np.array(
            [self.origin[0] - other.origin[0], self.origin[1] - other.origin[1]],
            dtype=np.float64,
        )

    def grid(self) -> np.ndarray:
        ys, xs = np.mgrid[0 : self.height, 0 : self.width].astype(np.float64)
        return np.stack([xs, ys], axis=-1)

    def contains(self, coords: np.ndarray, margin: float = SAMPLING_MARGIN) -> np.ndarray:
        x = coords[..., 0]
        y = coords[..., 1]
        return (
            (x >= -margin)
            & (x <= self.width - 1 + margin)
            & (y >= -margin)
            & (y <= self.height - 1 + margin)
        )


@dataclass(frozen=True)
class WarpField:
    """Dense map from every pixel of `src` to real coordinates local to `dst`.

    `valid` is always cleared where the map leaves dst (plus the sampling margin).
    """

    src: DomainRect
    dst: DomainRect
    map: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        coords = np.asarray(self.map, dtype=np.float64)
        if coords.shape != (self.src.height, self.src.width, 2):
            raise GeometryError(
                f"warp map shape {coords.shape} does not match source domain {self.src.shape}"
            )
        if not np.all(np.isfinite(coords)):
            raise InputError("warp map contains non-finite coordinates")
        valid = np.ones(self.src.shape, dtype=bool) if self.valid is None else np.asarray(self.valid, dtype=bool)
        if valid.shape != self.src.shape:
            raise GeometryError(f"validity shape {valid.shape} does not match source domain {self.src.shape}")
        valid = valid & self.dst.contains(coords)
        object.__setattr__(self, "map", _frozen(coords))
        object.__setattr__(self, "valid", _frozen(valid))

    @property
    def displacement(self) -> np.ndarray:
        """Motion in global pixel units: map minus the identity position of every source pixel."""
        return self.map - (self.src.grid() + self.src.offset_to(self.dst)[None, None, :])

    def with_valid(self, valid: np.ndarray) -> "WarpField":
        return WarpField(self.src, self.dst, self.map, np.asarray(valid, dtype=bool) & self.valid)

    def with_map(self, coords: np.ndarray, valid: np.ndarray | None = None) -> "WarpField":
        return WarpField(self.src, self.dst, coords, valid)


def ensure_same_shape(a: tuple[int, ...], b: tuple[int, ...], what: str) -> None:
    if tuple(a) != tuple(b):
        raise GeometryError(f"{what}: shape {tuple(a)} does not match {tuple(b)}")


__all__ = [
    "DomainRect",
    "Frame",
    "Mask",
    "SAMPLING_MARGIN",
    "WarpField",
    "ensure_same_shape",
]
