"""Lattice geometry, modular reduction, and the equivariance cocycle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zhkvortex import Cocycle, dual_basis, make_lattice, reduce_tau
from zhkvortex.errors import InvalidParameterError
from zhkvortex.lattice import (
    cocycle_defect,
    cocycle_value,
    equivariance_phase,
    lattice_coords,
)

from conftest import GEN_TAU, HEX_TAU

TAUS = [1j, HEX_TAU, GEN_TAU]


@pytest.mark.parametrize("tau", TAUS)
def test_cell_area_is_2pi(tau):
    L = make_lattice(tau, 1)
    area = float(L.e1[0] * L.e2[1] - L.e1[1] * L.e2[0])
    assert abs(area - 2.0 * np.pi) < 1e-12
    assert abs(L.area - area) < 1e-14


@pytest.mark.parametrize("tau", TAUS)
def test_dual_basis_pairing(tau):
    """k_i . e_j = 2 pi delta_ij."""
    L = make_lattice(tau, 1)
    D = dual_basis(L)
    for ki, row in zip((D.k1, D.k2), np.eye(2)):
        for ej, want in zip((L.e1, L.e2), row):
            assert abs(float(np.dot(ki, ej)) - 2.0 * np.pi * want) < 1e-12


def test_hexagonal_duals_have_equal_length():
    L = make_lattice(HEX_TAU, 1)
    D = dual_basis(L)
    assert abs(np.linalg.norm(D.k1) - np.linalg.norm(D.k2)) < 1e-12


def test_make_lattice_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        make_lattice(0.5 - 0.1j, 1)
    with pytest.raises(InvalidParameterError):
        make_lattice(0.5 + 0.0j, 1)
    with pytest.raises(InvalidParameterError):
        make_lattice(1j, 0)
    with pytest.raises(InvalidParameterError):
        make_lattice(1j, 1.5)


def test_reduce_tau_fixed_points_and_generators():
    assert reduce_tau(1j) == 1j
    assert abs(reduce_tau(HEX_TAU) - HEX_TAU) < 1e-12
    # T and S shifts land on the same reduced point
    assert abs(reduce_tau(GEN_TAU + 3) - reduce_tau(GEN_TAU)) < 1e-10
    assert abs(reduce_tau(-1.0 / GEN_TAU) - reduce_tau(GEN_TAU)) < 1e-10


def test_reduce_tau_boundary_tiebreak():
    # both vertical edges and both unit-circle arcs identify; canonical is Re >= 0
    t = reduce_tau(-0.5 + 0.9j)
    assert t.real > 0.0
    arc = complex(-0.3, np.sqrt(1 - 0.09))  # on |tau| = 1, left half
    assert reduce_tau(arc).real > 0.0


def test_reduce_tau_rejects_lower_half_plane():
    with pytest.raises(InvalidParameterError):
        reduce_tau(0.3 - 1.1j)


@settings(max_examples=60, deadline=None)
@given(
    re=st.floats(-3.0, 3.0, allow_nan=False),
    im=st.floats(0.05, 3.0, allow_nan=False),
)
def test_reduce_tau_lands_in_fundamental_domain(re, im):
    t = reduce_tau(complex(re, im))
    assert t.imag > 0.0
    assert abs(t.real) <= 0.5 + 1e-12
    assert abs(t) >= 1.0 - 1e-12
    # idempotent on its own output
    assert abs(reduce_tau(t) - t) < 1e-9


def test_lattice_coords_roundtrip():
    L = make_lattice(GEN_TAU, 1)
    x = 0.3 * L.e1 - 1.7 * L.e2
    m1, m2 = lattice_coords(L, x)
    assert abs(m1 - 0.3) < 1e-12 and abs(m2 + 1.7) < 1e-12


def test_cocycle_value_requires_lattice_points():
    C = Cocycle(make_lattice(1j, 1))
    with pytest.raises(InvalidParameterError):
        cocycle_value(C, 0.5 * C.lattice.e1)


@settings(max_examples=40, deadline=None)
@given(
    m1=st.integers(-4, 4),
    m2=st.integers(-4, 4),
    p1=st.integers(-4, 4),
    p2=st.integers(-4, 4),
)
def test_canonical_cocycle_has_zero_defect(m1, m2, p1, p2):
    """c_{s+t} - c_s - c_t - omega(s, t) = 0 mod 2 pi for the canonical omega."""
    C = Cocycle(make_lattice(GEN_TAU, 1))
    assert cocycle_defect(C, (m1, m2), (p1, p2)) < 1e-10


def test_corrupted_cocycle_is_detected():
    L = make_lattice(1j, 1)
    bad = Cocycle(L, omega=0.5 * L.n * L.area + 0.3)
    worst = max(
        cocycle_defect(bad, (m1, m2), (p1, p2))
        for m1 in range(-2, 3)
        for m2 in range(-2, 3)
        for p1 in range(-2, 3)
        for p2 in range(-2, 3)
    )
    assert worst > 0.1


def test_equivariance_phase_is_unimodular():
    L = make_lattice(HEX_TAU, 1)
    C = Cocycle(L)
    rng = np.random.default_rng(7)
    x = rng.random((20, 2)) @ np.stack([L.e1, L.e2])
    for m1, m2 in [(1, 0), (0, 1), (2, -1), (-3, 2)]:
        ph = equivariance_phase(L, C, x, m1, m2)
        assert np.max(np.abs(np.abs(ph) - 1.0)) < 1e-12
