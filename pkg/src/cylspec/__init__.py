"""Spectral solvers for heat, Poisson and incompressible Navier-Stokes in a closed cylinder.

Fields live on the doubled Chebyshev-Chebyshev-Fourier grid (signed radius
``r`` in ``[-1, 1]``, ``z`` in ``[-1, 1]``, ``theta`` in ``[-pi, pi)``).  Each
Fourier mode of a Helmholtz or Poisson problem becomes a banded Sylvester
equation in ultraspherical coefficients, solved by ADI with Zolotarev shifts.
"""

from .adi import AdiSolver, ShiftPlan, SylvesterProblem, adi_solve, compute_shifts, dense_sylvester_oracle
from .baseline import FDGrid, collocation_heat_run, fd_heat_run
from .errors import (
    AdiConvergenceError,
    ConfigError,
    CylspecError,
    NotIncompressibleError,
    NumericalError,
    SingularOperatorError,
    SpectrumError,
)
from .fieldio import export_slice_csv, read_field, write_field
from .grid import CoeffTensor, GridField, GridSpec, check_physical_consistency, grid_points, parity_project
from .ptns import (
    NSState,
    PTScalars,
    VectorFieldCoeffs,
    curl_pt,
    ns_run,
    ns_step,
    pt_decompose,
    pt_synthesize,
    velocity_from_vorticity,
)
from .solvers import (
    BoundaryCondition,
    reduced_modal_problem,
    solve_helmholtz_3d,
    solve_modal_helmholtz,
    solve_poisson_3d,
)
from .timestep import BDFScheme, HeatConfig, heat_run, heat_step
from .transform import analyze, evaluate_at, synthesize
from .ultraop import BandedMatrix, assemble_modal_helmholtz, assemble_modal_poisson

__version__ = "0.1.0"

__all__ = [
    "AdiConvergenceError",
    "AdiSolver",
    "BDFScheme",
    "BandedMatrix",
    "BoundaryCondition",
    "CoeffTensor",
    "ConfigError",
    "CylspecError",
    "FDGrid",
    "GridField",
    "GridSpec",
    "HeatConfig",
    "NSState",
    "NotIncompressibleError",
    "NumericalError",
    "PTScalars",
    "ShiftPlan",
    "SingularOperatorError",
    "SpectrumError",
    "SylvesterProblem",
    "VectorFieldCoeffs",
    "adi_solve",
    "analyze",
    "assemble_modal_helmholtz",
    "assemble_modal_poisson",
    "check_physical_consistency",
    "collocation_heat_run",
    "compute_shifts",
    "curl_pt",
    "dense_sylvester_oracle",
    "evaluate_at",
    "export_slice_csv",
    "fd_heat_run",
    "grid_points",
    "heat_run",
    "heat_step",
    "ns_run",
    "ns_step",
    "parity_project",
    "pt_decompose",
    "pt_synthesize",
    "read_field",
    "reduced_modal_problem",
    "solve_helmholtz_3d",
    "solve_modal_helmholtz",
    "solve_poisson_3d",
    "synthesize",
    "velocity_from_vorticity",
    "write_field",
]
