"""Peaceman-Rachford ADI time integration of Maxwell's equations on a Yee grid.

The package covers the staggered grid and field containers, piecewise
constant media, the A/B splitting operators with their tridiagonal
resolvents, the time stepper, diagnostics, the edge-singularity exponents of
a quarter-plane permittivity jump, and a convergence-study harness.
"""

from .diagnostics import (
    DiagnosticRecord,
    charge_law_residual,
    discrete_div,
    energy,
    l2_error,
    splitting_energy,
)
from .exponents import (
    ExponentReport,
    QuarterCircleConfig,
    eigenvalues_quarter_circle,
    report,
    solve_kappa_bar,
    solve_kappa_ring,
)
from .grid import FieldState, GridError, YeeGrid, make_grid, staggered_location, zero_state
from .harness import (
    ConfigError,
    ConvergenceReport,
    ExperimentConfig,
    builtin_section7,
    convergence_study,
    emit,
    load_config,
)
from .materials import MaterialBox, MaterialError, MaterialMap, build_material_map, jump_ratio
from .operators import apply_split, solve_implicit, weighted_dot, weighted_norm
from .stepper import NO_SOURCE, SourceTerm, StepConfig, Trajectory, pr_step, run

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceReport",
    "DiagnosticRecord",
    "ExperimentConfig",
    "ExponentReport",
    "FieldState",
    "GridError",
    "MaterialBox",
    "MaterialError",
    "MaterialMap",
    "NO_SOURCE",
    "QuarterCircleConfig",
    "SourceTerm",
    "StepConfig",
    "Trajectory",
    "YeeGrid",
    "apply_split",
    "build_material_map",
    "builtin_section7",
    "charge_law_residual",
    "convergence_study",
    "discrete_div",
    "eigenvalues_quarter_circle",
    "emit",
    "energy",
    "jump_ratio",
    "l2_error",
    "load_config",
    "make_grid",
    "pr_step",
    "report",
    "run",
    "solve_implicit",
    "solve_kappa_bar",
    "solve_kappa_ring",
    "splitting_energy",
    "staggered_location",
    "weighted_dot",
    "weighted_norm",
    "zero_state",
]
