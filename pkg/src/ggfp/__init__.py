"""Generalized-Gamma Fokker-Planck lab.

Closed-form density routines for the generalized Gamma family, an
equilibrium-exact finite-volume solver for the associated drift-diffusion
flow on the half-line, entropy/Fisher functionals, and verification suites
for the family's weighted variance and entropy inequalities.
"""

__version__ = "0.1.0"

from .densities import (
    GenGammaParams,
    cdf,
    lognormal_limit_params,
    moment,
    pdf,
    power_transform_params,
    quantile,
)
from .functionals import (
    csiszar_kullback_report,
    fisher_sqrt_form,
    relative_entropy,
    weighted_fisher,
)
from .grids import (
    DensityField,
    Grid,
    build_grid,
    cdf_of_field,
    equilibrium_grid,
    expectation,
    l1_distance,
    project,
)
from .inequalities import (
    InequalityReport,
    PreconditionError,
    TestFunction,
    chernoff_report,
    density_lsi_report,
    generate_test_functions,
    logsobolev_report,
    potential_convexity,
    sharpness_test_functions,
)
from .scaling import ScalingMap, pushforward_power, scaling_equivalence_report, time_map
from .solver import (
    SolverConfig,
    SolverError,
    Trajectory,
    classify_boundary,
    effective_drift,
    solve,
    stationary_flux_residual,
    step,
)

__all__ = [
    "GenGammaParams",
    "pdf",
    "cdf",
    "quantile",
    "moment",
    "power_transform_params",
    "lognormal_limit_params",
    "Grid",
    "DensityField",
    "build_grid",
    "equilibrium_grid",
    "project",
    "expectation",
    "l1_distance",
    "cdf_of_field",
    "relative_entropy",
    "weighted_fisher",
    "fisher_sqrt_form",
    "csiszar_kullback_report",
    "SolverConfig",
    "SolverError",
    "Trajectory",
    "solve",
    "step",
    "effective_drift",
    "classify_boundary",
    "stationary_flux_residual",
    "TestFunction",
    "InequalityReport",
    "PreconditionError",
    "chernoff_report",
    "logsobolev_report",
    "density_lsi_report",
    "potential_convexity",
    "generate_test_functions",
    "sharpness_test_functions",
    "ScalingMap",
    "time_map",
    "pushforward_power",
    "scaling_equivalence_report",
]
