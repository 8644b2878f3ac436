"""Numerical verification toolkit for the two-dimensional hydrogen atom.

Units are excitonic Rydbergs (potential ``-2/rho``), in which the bound
states have ``E_n = -1/(n + 1/2)^2`` with ``2n + 1``-fold degeneracy.
"""
from .eigenstates import (
    EnergyLevel,
    MomentumPoint,
    QuantumNumbers,
    RealSpacePoint,
    degeneracy,
    energy_level,
    phi_momentum,
    psi_real,
)
from .errors import (
    BoundaryContaminationWarning,
    DomainError,
    GridTooCoarseError,
    QuadratureError,
    SingularNodeError,
)
from .focksphere import SpherePoint, kernel_eigensolve, project, unproject
from .identity_verifier import scan_report, verify_new_integral, verify_phase_form
from .operator_algebra import GridField, OperatorId, apply_operator, commutator_residual
from .quadrature import QuadResult
from .radial_solver import RadialGrid, solve_radial
from .reports import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "BoundaryContaminationWarning", "DomainError", "EnergyLevel", "GridField", "GridTooCoarseError",
    "MomentumPoint", "OperatorId", "QuadResult", "QuadratureError", "QuantumNumbers", "RadialGrid",
    "RealSpacePoint", "SingularNodeError", "SpherePoint", "VerificationReport", "apply_operator",
    "commutator_residual", "degeneracy", "energy_level", "kernel_eigensolve", "phi_momentum",
    "project", "psi_real", "scan_report", "solve_radial", "unproject", "verify_new_integral",
    "verify_phase_form",
]
