from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence

import imageio.v3 as iio
import numpy as np

from scenefill.core.types import Frame, Mask
from scenefill.errors import ImageIOError, InputError


FRAME_PATTERN = re.compile(r"^(\d{6})\.png$")
FRAME_NAME = "{:06d}.png"
ESTIMATED_MASK_NAME = "{:06d}_est.png"


def read_frame(path: str | Path) -> Frame:
    path = Path(path)
    try:
        pixels = iio.imread(path)
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"cannot read image {path}: {exc}") from exc
    if pixels.ndim == 3 and pixels.shape[2] == 4:
        pixels = pixels[:, :, :3]
    if pixels.ndim == 3 and pixels.shape[2] == 2:
        pixels = pixels[:, :, :1]
    scale = 65535.0 if pixels.dtype == np.uint16 else 255.0
    return Frame(np.asarray(pixels, dtype=np.float64) / scale)


def read_mask(path: str | Path) -> Mask:
    path = Path(path)
    try:
        pixels = iio.imread(path)
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"cannot read mask {path}: {exc}") from exc
    if pixels.ndim == 3:
        pixels = pixels.max(axis=2)
    return Mask(pixels != 0)


def write_frame(path: str | Path, frame: Frame) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        iio.imwrite(path, frame.to_uint8())
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def write_mask(path: str | Path, mask: Mask) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        iio.imwrite(path, mask.data.astype(np.uint8) * 255)
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def list_frames(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory} is not a directory")
    return sorted(p for p in directory.iterdir() if FRAME_PATTERN.match(p.name))


def read_frames(paths: Sequence[Path]) -> list[Frame]:
    return [read_frame(p) for p in paths]


def load_masks(frame_paths: Sequence[Path], mask_dir: str | Path, required: bool = True) -> list[Mask | None]:
    """Masks named like their frames; a missing one is an input error unless not required."""
    mask_dir = Path(mask_dir)
    masks: list[Mask | None] = []
    for frame_path in frame_paths:
        candidate = mask_dir / frame_path.name
        if not candidate.exists():
            if required:
                raise InputError(f"missing mask for frame {frame_path.name}: {candidate}")
            masks.append(None)
            continue
        masks.append(read_mask(candidate))
    return masks


def load_sequence(input_dir: str | Path, mask_dir: str | Path) -> tuple[list[Path], list[Frame], list[Mask]]:
    paths = list_frames(input_dir)
    if not paths:
        raise InputError(f"no %06d.png frames found in {input_dir}")
    masks = load_masks(paths, mask_dir, required=True)
    frames = read_frames(paths)
    for path, frame, mask in zip(paths, frames, masks):
        if mask is None or mask.shape != frame.shape:
            raise InputError(f"mask {path.name} does not match its frame size {frame.shape}")
        if frame.shape != frames[0].shape or frame.channels != frames[0].channels:
            raise InputError(f"frame {path.name} differs in size or channels from the first frame")
    return paths, frames, [m for m in masks if m is not None]


def write_frames(directory: str | Path, frames: Sequence[Frame], names: Sequence[str] | None = None) -> list[Path]:
    directory = Path(directory)
    names = list(names) if names is not None else [FRAME_NAME.format(i) for i in range(len(frames))]
    written = []
    for name, frame in zip(names, frames):
        write_frame(directory / name, frame)
        written.append(directory / name)
    return written


__all__ = [
    "ESTIMATED_MASK_NAME",
    "FRAME_NAME",
    "list_frames",
    "load_masks",
    "load_sequence",
    "read_frame",
    "read_frames",
    "read_mask",
    "write_frame",
    "write_frames",
    "write_mask",
]
