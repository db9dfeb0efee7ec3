"""Finite-element toolkit for ``(-Delta)^{1/2} u = f(u)`` on an interval with
zero exterior data: Gagliardo-form assembly, the Poincare eigenvalue,
exponential-growth nonlinearities, mountain-pass and deflated critical-point
search, polarization checks and a Trudinger-Moser probe."""

from .energy import (
    EnergyFunctional,
    HvResult,
    MPConfig,
    MPResult,
    check_Hv,
    critical_level_report,
    deflated_search,
    energy,
    find_endpoint,
    gradient,
    mountain_pass,
    newton_refine,
)
from .errors import GridMismatchError, InvalidArgumentError, NodalOverflowError, SolverFailureError
from .grid import Grid, GridFunction, integrate_nodal, interpolate, make_grid
from .nonlinearity import (
    HypothesisReport,
    Nonlinearity,
    check_hypotheses,
    make_critical_example,
    make_subcritical_example,
)
from .operator import (
    GagliardoForm,
    MassMatrix,
    apply_form,
    assemble_mass,
    assemble_stiffness,
    quadratic_form,
    solve_dirichlet_linear,
)
from .spectrum import EigenResult, smallest_eigenpairs
from .symmetry import (
    SymmetryReport,
    TMConfig,
    TMProbeResult,
    polarize,
    tm_probe,
    tm_sweep,
    verify_polarization_inequality,
    verify_symmetry,
)

__version__ = "0.1.0"

__all__ = [
    "EigenResult",
    "EnergyFunctional",
    "GagliardoForm",
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "HvResult",
    "HypothesisReport",
    "InvalidArgumentError",
    "MPConfig",
    "MPResult",
    "MassMatrix",
    "NodalOverflowError",
    "Nonlinearity",
    "SolverFailureError",
    "SymmetryReport",
    "TMConfig",
    "TMProbeResult",
    "apply_form",
    "assemble_mass",
    "assemble_stiffness",
    "check_Hv",
    "check_hypotheses",
    "critical_level_report",
    "deflated_search",
    "energy",
    "find_endpoint",
    "gradient",
    "integrate_nodal",
    "interpolate",
    "make_critical_example",
    "make_grid",
    "make_subcritical_example",
    "mountain_pass",
    "newton_refine",
    "polarize",
    "quadratic_form",
    "smallest_eigenpairs",
    "solve_dirichlet_linear",
    "tm_probe",
    "tm_sweep",
    "verify_polarization_inequality",
    "verify_symmetry",
]
