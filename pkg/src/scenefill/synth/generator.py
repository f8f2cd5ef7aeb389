"""Renders sequences with known background, camera motion and masks."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from scenefill.core.sampling import remap_bilinear
from scenefill.core.types import DomainRect, Frame, Mask, WarpField
from scenefill.errors import InputError
from scenefill.io.flo import write_warp_flo
from scenefill.io.images import FRAME_NAME, write_frames, write_mask
from scenefill.synth.specs import MaskSpec, SynthManifest, WarpSpec, save_manifest
from scenefill.synth.textures import checkerboard, make_texture
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"
TEMPLATE_NAME = "template.png"


@dataclass(frozen=True)
class SyntheticSequence:
    """Observed frames and masks plus the clean frames and the exact warps they were rendered with.

    `gt_warps[t]` maps frame t into the template image; `adjacent[t]` maps frame t to frame t+1.
    """

    frames: list[Frame]
    masks: list[Mask]
    gt_frames: list[Frame]
    gt_warps: list[WarpField]
    adjacent: list[WarpField]
    template: Frame

    def __len__(self) -> int:
        return len(self.frames)


def _centre(width: int, height: int) -> np.ndarray:
    return np.array([(width - 1) / 2.0, (height - 1) / 2.0])


def _apply(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    return points @ matrix[:2, :2].T + matrix[:2, 2]


def frame_to_template(step: np.ndarray, t: int, frame_rect: DomainRect, template_rect: DomainRect) -> np.ndarray:
    """c_T + S^t (x - c_F) for every pixel of the frame, with S the per-frame step."""
    cumulative = np.linalg.matrix_power(step, t)
    c_f = _centre(frame_rect.width, frame_rect.height)
    c_t = _centre(template_rect.width, template_rect.height)
    return c_t + _apply(cumulative, frame_rect.grid() - c_f)


def adjacent_map(step: np.ndarray, frame_rect: DomainRect) -> np.ndarray:
    """Frame t -> frame t+1 is c_F + S^-1 (x - c_F), independent of t."""
    c_f = _centre(frame_rect.width, frame_rect.height)
    return c_f + _apply(np.linalg.inv(step), frame_rect.grid() - c_f)


def mask_pixels(spec: MaskSpec, t: int, height: int, width: int) -> np.ndarray:
    if not spec.is_active(t):
        return np.zeros((height, width), dtype=bool)
    cx, cy = spec.centre(t)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    if spec.shape == "disk":
        radius = spec.size / 2.0
        return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius**2
    x0 = np.floor(cx - spec.size / 2.0 + 0.5)
    y0 = np.floor(cy - spec.size / 2.0 + 0.5)
    return (xs >= x0) & (xs < x0 + spec.size) & (ys >= y0) & (ys < y0 + spec.size)


def distractor(spec: MaskSpec, background: np.ndarray, t: int, warp_velocity: tuple[float, float]) -> np.ndarray:
    """What the frame shows inside the mask.

    checkerboard moves against the camera motion; offset shifts every channel by 0.5, wrapping into [0, 1].
    """
    if spec.fill == "offset":
        return np.where(background < 0.5, background + 0.5, background - 0.5)
    height, width, channels = background.shape
    phase = (-t * warp_velocity[0], -t * warp_velocity[1])
    return checkerboard(height, width, spec.checker_cell, channels, phase).data


def generate(
    template_img: Frame,
    warp_spec: WarpSpec,
    mask_spec: MaskSpec | None,
    T: int,
    noise_sigma: float = 0.0,
    seed: int = 0,
    frame_size: tuple[int, int] = (128, 128),
) -> SyntheticSequence:
    """Render T frames of size `frame_size` (width, height) by sampling the template under the warp."""
    if T < 1:
        raise InputError("T must be >= 1")
    if noise_sigma < 0:
        raise InputError("noise_sigma must be >= 0")
    width, height = frame_size
    frame_rect = DomainRect((0, 0), width, height)
    template_rect = template_img.rect
    step = warp_spec.step_matrix()
    rng = np.random.default_rng(seed)

    frames: list[Frame] = []
    masks: list[Mask] = []
    gt_frames: list[Frame] = []
    gt_warps: list[WarpField] = []
    for t in range(T):
        coords = frame_to_template(step, t, frame_rect, template_rect)
        # affine in x, so the corners bound the whole footprint
        footprint = coords[[0, 0, -1, -1], [0, -1, 0, -1]]
        if not np.all(template_rect.contains(footprint, margin=0.0)):
            raise InputError(f"frame {t} leaves the template image; use a larger template or slower motion")
        values, _ = remap_bilinear(template_img.data, coords)
        clean = np.clip(values, 0.0, 1.0)
        gt_frames.append(Frame(clean))
        gt_warps.append(WarpField(frame_rect, template_rect, coords))

        pixels = mask_pixels(mask_spec, t, height, width) if mask_spec else np.zeros((height, width), dtype=bool)
        observed = clean.copy()
        if pixels.any():
            observed = np.where(pixels[:, :, None], distractor(mask_spec, clean, t, warp_spec.velocity), observed)  # type: ignore[arg-type]
        if noise_sigma > 0:
            observed = observed + rng.normal(0.0, noise_sigma, size=observed.shape)
        frames.append(Frame(np.clip(observed, 0.0, 1.0)))
        masks.append(Mask(pixels))

    adjacent_coords = adjacent_map(step, frame_rect)
    adjacent = [WarpField(frame_rect, frame_rect, adjacent_coords) for _ in range(T - 1)]
    logger.info("rendered %d frames of %dx%d (%s warp)", T, width, height, warp_spec.kind)
    return SyntheticSequence(frames, masks, gt_frames, gt_warps, adjacent, template_img)


def generate_from_manifest(manifest: SynthManifest) -> SyntheticSequence:
    rng = np.random.default_rng(manifest.seed)
    texture = make_texture(manifest.texture, rng)
    return generate(
        texture,
        manifest.warp,
        manifest.mask,
        manifest.frames,
        manifest.noise_sigma,
        seed=manifest.seed + 1,
        frame_size=manifest.frame_size,
    )


def write_sequence(seq: SyntheticSequence, out_dir: str | Path, manifest: SynthManifest | None = None) -> Path:
    """frames/, masks/, gt/ as numbered PNGs, flows/ (adjacent) and gt_warps/ as .flo, plus the manifest."""
    out_dir = Path(out_dir)
    names = [FRAME_NAME.format(t) for t in range(len(seq))]
    write_frames(out_dir / "frames", seq.frames, names)
    write_frames(out_dir / "gt", seq.gt_frames, names)
    for name, mask in zip(names, seq.masks):
        write_mask(out_dir / "masks" / name, mask)
    for t, warp in enumerate(seq.adjacent):
        write_warp_flo(out_dir / "flows" / f"{t:06d}_{t + 1:06d}.flo", warp)
    for t, warp in enumerate(seq.gt_warps):
        write_warp_flo(out_dir / "gt_warps" / f"{t:06d}.flo", warp)
    write_frames(out_dir, [seq.template], [TEMPLATE_NAME])
    if manifest is not None:
        save_manifest(manifest, out_dir / MANIFEST_NAME)
    logger.info("wrote synthetic sequence to %s", out_dir)
    return out_dir


__all__ = [
    "MANIFEST_NAME",
    "SyntheticSequence",
    "adjacent_map",
    "frame_to_template",
    "generate",
    "generate_from_manifest",
    "mask_pixels",
    "write_sequence",
]
