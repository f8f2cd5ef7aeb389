from scenefill.baselines.interpolation import (
    edge_disagreement,
    evaluation_disk,
    non_binary_fraction,
    propagate_rotation,
    rotated_reference,
)
from scenefill.baselines.propagation import propagate_frame_to_frame

__all__ = [
    "edge_disagreement",
    "evaluation_disk",
    "non_binary_fraction",
    "propagate_frame_to_frame",
    "propagate_rotation",
    "rotated_reference",
]
