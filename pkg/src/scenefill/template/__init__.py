from scenefill.template.scene import SceneTemplate, accumulate_template, frame_contribution, jacobian_det, jacobian_field
from scenefill.template.joint import (
    InferenceState,
    RefinedWarp,
    compute_adjacent_flows,
    data_energy,
    growth_canvas,
    initial_warps,
    omega_from,
    refine_warp,
    refinement_helps,
    run_joint_optimization,
)
from scenefill.template.sliding import SlidingWindowOutcome, merge_sweeps, sliding_window_run

__all__ = [
    "InferenceState",
    "RefinedWarp",
    "SceneTemplate",
    "SlidingWindowOutcome",
    "accumulate_template",
    "compute_adjacent_flows",
    "data_energy",
    "frame_contribution",
    "growth_canvas",
    "initial_warps",
    "jacobian_det",
    "jacobian_field",
    "merge_sweeps",
    "omega_from",
    "refine_warp",
    "refinement_helps",
    "run_joint_optimization",
    "sliding_window_run",
]
