"""Learning unions of subspaces from complete and partially observed data."""

from ._core import (
    Error,
    KernelModel,
    amicusal,
    average_distance,
    clustering_error,
    estimate_dimension,
    generate_synthetic,
    kernel_estimate,
    micusal,
    mckusal,
    rmicusal,
    run_config,
    subspace_distance,
)

__all__ = [
    "Error",
    "KernelModel",
    "amicusal",
    "average_distance",
    "clustering_error",
    "estimate_dimension",
    "generate_synthetic",
    "kernel_estimate",
    "micusal",
    "mckusal",
    "rmicusal",
    "run_config",
    "subspace_distance",
]
