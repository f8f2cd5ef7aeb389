from scenefill.synth.generator import (
    SyntheticSequence,
    adjacent_map,
    frame_to_template,
    generate,
    generate_from_manifest,
    mask_pixels,
    write_sequence,
)
from scenefill.synth.specs import MaskSpec, SynthManifest, TextureSpec, WarpSpec, load_manifest, parse_manifest
from scenefill.synth.textures import checkerboard, periodic_noise

__all__ = [
    "MaskSpec",
    "SynthManifest",
    "SyntheticSequence",
    "TextureSpec",
    "WarpSpec",
    "adjacent_map",
    "checkerboard",
    "frame_to_template",
    "generate",
    "generate_from_manifest",
    "load_manifest",
    "mask_pixels",
    "parse_manifest",
    "periodic_noise",
    "write_sequence",
]
