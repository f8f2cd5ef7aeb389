from __future__ import annotations

from pathlib import Path

import numpy as np

from scenefill.core.types import DomainRect, WarpField
from scenefill.errors import ImageIOError
from scenefill.flow.fields import from_displacement


MAGIC = np.float32(202021.25)


def read_flo(path: str | Path) -> np.ndarray:
    """Read a Middlebury .flo file into an (H, W, 2) float32 (u, v) array."""
    path = Path(path)
    try:
        with path.open("rb") as f:
            magic = np.fromfile(f, np.float32, count=1)
            if magic.size != 1 or magic[0] != MAGIC:
                raise ImageIOError(f"{path.name}: bad .flo magic number")
            width = int(np.fromfile(f, np.int32, count=1)[0])
            height = int(np.fromfile(f, np.int32, count=1)[0])
            data = np.fromfile(f, np.float32, count=2 * width * height)
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    if data.size != 2 * width * height:
        raise ImageIOError(f"{path.name}: truncated .flo payload")
    return data.reshape(height, width, 2)


def write_flo(path: str | Path, flow: np.ndarray) -> None:
    flow = np.asarray(flow, dtype=np.float32)
    height, width = flow.shape[:2]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open("wb") as f:
            MAGIC.tofile(f)
            np.array([width, height], dtype=np.int32).tofile(f)
            np.ascontiguousarray(flow).tofile(f)
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def write_warp_flo(path: str | Path, warp: WarpField) -> None:
    write_flo(path, warp.displacement)


def read_warp_flo(path: str | Path, src: DomainRect | None = None, dst: DomainRect | None = None) -> WarpField:
    flow = read_flo(path).astype(np.float64)
    src = src or DomainRect((0, 0), flow.shape[1], flow.shape[0])
    return from_displacement(flow, src, dst)


__all__ = ["MAGIC", "read_flo", "read_warp_flo", "write_flo", "write_warp_flo"]
