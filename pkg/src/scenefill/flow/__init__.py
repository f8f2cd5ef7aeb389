from scenefill.flow.backends import (
    FlowBackend,
    FlowParams,
    compute_flow,
    exclusion_band,
    get_backend,
    list_backends,
    register_backend,
)
from scenefill.flow.fields import (
    chain,
    check_fb_consistency,
    compose,
    compose_extended,
    extrapolate_warp,
    from_displacement,
    identity_warp,
    perturb_warp,
    rebase_dst,
)
from scenefill.flow.harmonic import harmonic_extend
from scenefill.flow import variational  # noqa: F401  registers the built-in backend

__all__ = [
    "FlowBackend",
    "FlowParams",
    "chain",
    "check_fb_consistency",
    "compose",
    "compose_extended",
    "compute_flow",
    "exclusion_band",
    "extrapolate_warp",
    "from_displacement",
    "get_backend",
    "harmonic_extend",
    "identity_warp",
    "list_backends",
    "perturb_warp",
    "rebase_dst",
    "register_backend",
]
