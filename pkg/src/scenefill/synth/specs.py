"""Manifest models for synthetic sequences; a manifest plus its seed reproduces a sequence exactly."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from scenefill.errors import ImageIOError, InputError


class WarpSpec(BaseModel):
    """Per-frame camera motion, applied about the frame centre and accumulated over time.

    translation uses `velocity` (px/frame); rotation adds `angular_rate` (rad/frame); zoom scales
    by (1 + scale_rate) per frame; affine takes an explicit 2x2 `matrix` per frame step.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["translation", "rotation", "affine", "zoom"] = "translation"
    velocity: tuple[float, float] = (0.0, 0.0)
    angular_rate: float = 0.0
    scale_rate: float = 0.0
    matrix: tuple[tuple[float, float], tuple[float, float]] | None = None

    @field_validator("scale_rate")
    @classmethod
    def _scale_positive(cls, value: float) -> float:
        if value <= -1.0:
            raise ValueError("scale_rate must be > -1 so the zoom stays invertible")
        return value

    @model_validator(mode="after")
    def _check_kind(self) -> "WarpSpec":
        if self.kind == "affine":
            if self.matrix is None:
                raise ValueError("affine warps need a matrix")
            if np.linalg.det(np.asarray(self.matrix)) <= 0:
                raise ValueError("affine matrix must have a positive determinant")
        elif self.matrix is not None:
            raise ValueError(f"matrix is only allowed for affine warps, not {self.kind}")
        return self

    def linear_step(self) -> np.ndarray:
        if self.kind == "rotation":
            c, s = np.cos(self.angular_rate), np.sin(self.angular_rate)
            return np.array([[c, -s], [s, c]])
        if self.kind == "zoom":
            return np.eye(2) / (1.0 + self.scale_rate)
        if self.kind == "affine":
            return np.asarray(self.matrix, dtype=np.float64)
        return np.eye(2)

    def step_matrix(self) -> np.ndarray:
        """Homogeneous 3x3 map from frame t+1 coordinates (centred) to frame t coordinates (centred)."""
        step = np.eye(3)
        step[:2, :2] = self.linear_step()
        step[:2, 2] = self.velocity
        return step


class MaskSpec(BaseModel):
    """A moving box or disk; inside it the frame shows a distractor instead of the background."""

    model_config = ConfigDict(extra="forbid")

    shape: Literal["box", "disk"] = "box"
    start: tuple[float, float] = (64.0, 64.0)
    velocity: tuple[float, float] = (0.0, 0.0)
    size: int = Field(default=24, ge=1)
    active_frames: list[int] | None = None
    fill: Literal["checkerboard", "offset"] = "checkerboard"
    checker_cell: int = Field(default=4, ge=1)

    def is_active(self, t: int) -> bool:
        return self.active_frames is None or t in self.active_frames

    def centre(self, t: int) -> tuple[float, float]:
        return self.start[0] + t * self.velocity[0], self.start[1] + t * self.velocity[1]


class TextureSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["noise", "checkerboard"] = "noise"
    size: int = Field(default=256, ge=8)
    channels: Literal[1, 3] = 3
    correlation_px: float = Field(default=6.0, gt=0)
    cell: int = Field(default=8, ge=1)


class SynthManifest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    texture: TextureSpec = Field(default_factory=TextureSpec)
    warp: WarpSpec = Field(default_factory=WarpSpec)
    mask: MaskSpec | None = None
    frames: int = Field(default=7, ge=1)
    frame_size: tuple[int, int] = (128, 128)
    noise_sigma: float = Field(default=0.0, ge=0.0)
    seed: int = 0

    @field_validator("frame_size")
    @classmethod
    def _positive_size(cls, value: tuple[int, int]) -> tuple[int, int]:
        if value[0] < 1 or value[1] < 1:
            raise ValueError("frame_size must be positive")
        return value


def _describe(exc: ValidationError) -> str:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "manifest"
    return f"invalid synth manifest field '{location}': {first['msg']}"


def parse_manifest(document: dict) -> SynthManifest:
    try:
        return SynthManifest.model_validate(document)
    except ValidationError as exc:
        raise InputError(_describe(exc)) from exc


def load_manifest(path: str | Path) -> SynthManifest:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ImageIOError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}") from exc
    return parse_manifest(document)


def save_manifest(manifest: SynthManifest, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    return path


__all__ = [
    "MaskSpec",
    "SynthManifest",
    "TextureSpec",
    "WarpSpec",
    "load_manifest",
    "parse_manifest",
    "save_manifest",
]
