"""Smoluchowski aggregation solver with POD model order reduction."""

from .greedy import GreedyConfig, GreedyPODBasis, GreedyResult, build_basis, window_snapshots
from .integrator import IntegratorConfig, Trajectory, integrate, midpoint_step
from .kernel import KernelSpec, LowRankKernel, build_kernel, dense_kernel, kernel_entry
from .pod import (
    SnapshotPOD,
    lift,
    merge_bases,
    project,
    projection_error,
    snapshot_basis,
)
from .reduced import (
    ReducedSystem,
    build_reduced_system,
    build_reduced_tensor,
    dense_tensor,
    project_source,
    rhs_reduced,
    solve_reduced,
)
from .rhs import FastRHS, mass_flux_out, moment, rhs_direct, rhs_fast
from .validation import DivergenceError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "DivergenceError",
    "FastRHS",
    "GreedyConfig",
    "GreedyPODBasis",
    "GreedyResult",
    "IntegratorConfig",
    "KernelSpec",
    "LowRankKernel",
    "ReducedSystem",
    "SnapshotPOD",
    "Trajectory",
    "ValidationError",
    "build_basis",
    "build_kernel",
    "build_reduced_system",
    "build_reduced_tensor",
    "dense_kernel",
    "dense_tensor",
    "integrate",
    "kernel_entry",
    "lift",
    "mass_flux_out",
    "merge_bases",
    "midpoint_step",
    "moment",
    "project",
    "project_source",
    "projection_error",
    "rhs_direct",
    "rhs_fast",
    "rhs_reduced",
    "snapshot_basis",
    "solve_reduced",
    "window_snapshots",
]
