"""Canonical-dual finite elements and a primal-dual SDP branch solver
for post-buckling of the nonlinear extensible beam."""

from .buckling import critical_load
from .energy import (
    EnergyReport,
    canonical_stress,
    gap_and_residuals,
    pure_complementary,
    recover_axial,
    reformulated_complementary,
    stationary_stress,
    total_complementary,
    total_potential,
)
from .fem import AssembledSystem, assemble, element_gap_matrix, element_geometric_matrix
from .model import (
    BeamProperties,
    LoadCase,
    Mesh,
    ModelError,
    SolverSettings,
    SupportSpec,
    derive_constants,
)
from .oracle import CriticalPoint, multistart_newton, primal_derivatives
from .sdp import BranchKind, LmiBlock, LmiProblem, LmiSolution, LmiStatus, build_branch_sdp, solve_lmi
from .solver import (
    ALL_BRANCHES,
    BranchSolution,
    Classification,
    TrialityReport,
    pdsdp_branch,
    run_triality,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem",
    "ALL_BRANCHES",
    "BeamProperties",
    "BranchKind",
    "BranchSolution",
    "Classification",
    "CriticalPoint",
    "EnergyReport",
    "LmiBlock",
    "LmiProblem",
    "LmiSolution",
    "LmiStatus",
    "LoadCase",
    "Mesh",
    "ModelError",
    "SolverSettings",
    "SupportSpec",
    "TrialityReport",
    "assemble",
    "build_branch_sdp",
    "canonical_stress",
    "critical_load",
    "derive_constants",
    "element_gap_matrix",
    "element_geometric_matrix",
    "gap_and_residuals",
    "multistart_newton",
    "pdsdp_branch",
    "primal_derivatives",
    "pure_complementary",
    "recover_axial",
    "reformulated_complementary",
    "run_triality",
    "solve_lmi",
    "stationary_stress",
    "total_complementary",
    "total_potential",
]
