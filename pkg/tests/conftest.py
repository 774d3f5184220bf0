"""Shared fixtures: lattice setups and one cached branch continuation.

The branch solve is the expensive piece (a few seconds); everything that
needs solution states shares the session-scoped result instead of re-running
Newton per test.
"""

import numpy as np
import pytest

from zhkvortex import (
    LadderBasis,
    ModelParams,
    SpectralGrid,
    leading_coeffs,
    make_lattice,
    solve_branch,
)

HEX_TAU = complex(0.5, 0.5 * np.sqrt(3.0))
GEN_TAU = complex(0.3, 1.1)


def _setup(tau, N=64, M_max=40):
    L = make_lattice(tau, 1)
    grid = SpectralGrid(L, N)
    return L, grid, LadderBasis(L, grid, M_max)


@pytest.fixture(scope="session")
def square():
    """(lattice, grid, basis) for tau = i."""
    return _setup(1j)


@pytest.fixture(scope="session")
def hexagonal():
    return _setup(HEX_TAU)


@pytest.fixture(scope="session")
def generic():
    return _setup(GEN_TAU)


@pytest.fixture(scope="session")
def branch_square():
    """Square-lattice continuation at chi=1, g=2 over s in {0.02, 0.04, 0.08}."""
    L = make_lattice(1j, 1)
    grid = SpectralGrid(L, 64)
    basis = LadderBasis(L, grid, 60)
    M = ModelParams(chi=1.0, g=2.0)
    points = solve_branch(L, M, [0.02, 0.04, 0.08], basis, grid)
    coeffs = leading_coeffs(L, M, basis, grid)
    return {
        "L": L,
        "grid": grid,
        "basis": basis,
        "M": M,
        "points": points,
        "coeffs": coeffs,
    }
