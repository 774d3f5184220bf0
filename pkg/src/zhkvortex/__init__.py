"""Vortex-lattice solutions of the static ZHK Chern-Simons equations on one
lattice cell: the lowest-Landau-level construction, the bifurcation branch in
the amplitude, energy identities, and the lattice-shape landscape."""

from .bifurcation import (
    BranchPoint,
    GaugeState,
    LeadingCoeffs,
    ModelParams,
    assemble_F,
    basis_size_for,
    branch_at_b,
    check_corrections,
    leading_coeffs,
    s_of_b,
    solve_branch,
)
from .energy import (
    EnergyReport,
    energy_asymptotic,
    energy_per_cell,
    energy_representation,
    landscape_scan,
)
from .errors import ZhkError
from .fields import PerScalarField, PerVecField, QPField, SpectralGrid
from .landau import LadderBasis, Psi0, beta, beta_modular_check, build_psi0, current
from .lattice import Cocycle, DualLattice, LatticeParam, dual_basis, make_lattice, reduce_tau
from .operators import GaugePotential, m_operator_spectrum, pinned_resolvent, t_matrix

__version__ = "0.1.0"

__all__ = [
    "BranchPoint", "Cocycle", "DualLattice", "GaugePotential", "GaugeState",
    "EnergyReport", "LadderBasis", "LatticeParam", "LeadingCoeffs", "ModelParams",
    "PerScalarField", "PerVecField", "Psi0", "QPField", "SpectralGrid",
    "ZhkError", "assemble_F", "basis_size_for", "beta",
    "beta_modular_check", "branch_at_b",
    "build_psi0", "check_corrections", "current", "dual_basis",
    "energy_asymptotic", "energy_per_cell", "energy_representation",
    "landscape_scan", "leading_coeffs", "m_operator_spectrum",
    "make_lattice", "pinned_resolvent", "reduce_tau", "s_of_b",
    "solve_branch", "t_matrix",
]
