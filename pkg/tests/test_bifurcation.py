"""The nonlinear map F, leading branch coefficients, and the Newton branch."""

import numpy as np
import pytest

from zhkvortex import (
    GaugeState,
    ModelParams,
    PerScalarField,
    PerVecField,
    QPField,
    assemble_F,
    basis_size_for,
    beta,
    branch_at_b,
    check_corrections,
    leading_coeffs,
    s_of_b,
    solve_branch,
)
from zhkvortex.bifurcation import gauge_transform, residual_norm
from zhkvortex.errors import (
    ConstraintViolationError,
    InvalidParameterError,
    ModelConditionError,
)

from conftest import HEX_TAU


# -- model parameters --------------------------------------------------------

def test_model_params_validation():
    with pytest.raises(ModelConditionError):
        ModelParams(chi=-1.0, g=2.0)
    with pytest.raises(ModelConditionError):
        ModelParams(chi=1.0, g=0.0)
    with pytest.raises(InvalidParameterError):
        ModelParams(chi=1.0, g=2.0, b=-0.5)
    with pytest.raises(InvalidParameterError):
        ModelParams(chi=1.0, g=2.0, n=0)


def test_default_double_well_offset():
    M = ModelParams(chi=1.0, g=2.0)
    assert M.V0 == 0.25
    assert abs(M.V(0.0) - M.V0) < 1e-15
    # minimum of the quadratic well sits at t = chi/g with value 0
    assert abs(M.V(M.chi / M.g)) < 1e-15


def test_mu_requires_g_not_one():
    M = ModelParams(chi=1.0, g=1.0)
    with pytest.raises(ModelConditionError):
        M.mu(0.9)
    assert abs(ModelParams(chi=1.0, g=2.0).mu(0.98) - 0.02) < 1e-15


def test_vlam_reduces_to_v():
    M = ModelParams(chi=1.2, g=1.7, higher=(0.3, -0.05))
    t = np.linspace(0.0, 2.0, 7)
    assert np.allclose(M.vlam(t, 1.0), M.v(t), atol=1e-15)
    # v is the derivative of V
    h = 1e-6
    fd = (M.V(t + h) - M.V(t - h)) / (2 * h)
    assert np.max(np.abs(fd - M.v(t))) < 1e-8


def test_basis_size_for_is_monotone():
    sizes = [basis_size_for(s) for s in (0.02, 0.08, 0.12, 0.16, 0.25, 0.30)]
    assert sizes == sorted(sizes)
    assert basis_size_for(0.08) >= 40


# -- the map F ---------------------------------------------------------------

def _zero_state(L, grid):
    N = grid.N
    return GaugeState(
        QPField(L, np.zeros((N, N), dtype=complex)),
        PerVecField(L, np.zeros((N, N, 2))),
        PerScalarField(L, np.zeros((N, N))),
        0.0,
    )


def test_normal_state_is_exact_solution(square):
    L, grid, basis = square
    M = ModelParams(chi=1.0, g=2.0, b=0.7)
    F = assemble_F(_zero_state(L, grid), M, basis, grid, check=True)
    assert residual_norm(F) == 0.0


def test_assemble_F_needs_field_and_positive_lambda(square):
    L, grid, basis = square
    u = _zero_state(L, grid)
    with pytest.raises(InvalidParameterError):
        assemble_F(u, ModelParams(chi=1.0, g=2.0), basis, grid)
    M = ModelParams(chi=1.0, g=2.0, b=0.5)
    bad = GaugeState(u.psi, u.alpha, u.a0, theta=-3.0)  # lambda = 2 - 3 < 0
    with pytest.raises(ModelConditionError):
        assemble_F(bad, M, basis, grid)


def test_state_constraints_enforced(square):
    L, grid, basis = square
    N = grid.N
    M = ModelParams(chi=1.0, g=2.0, b=0.7)
    vx = np.repeat(np.sin(2 * np.pi * np.arange(N) / N)[:, None], N, axis=1)
    leaky = GaugeState(
        QPField(L, np.zeros((N, N), dtype=complex)),
        PerVecField(L, np.stack([vx, np.zeros((N, N))], axis=-1)),
        PerScalarField(L, np.zeros((N, N))),
        0.0,
    )
    with pytest.raises(ConstraintViolationError):
        assemble_F(leaky, M, basis, grid, check=True)
    biased = GaugeState(
        QPField(L, np.zeros((N, N), dtype=complex)),
        PerVecField(L, np.zeros((N, N, 2))),
        PerScalarField(L, np.full((N, N), 0.3)),
        0.0,
    )
    with pytest.raises(ConstraintViolationError):
        biased.validate(grid)


def test_constant_gauge_covariance(branch_square):
    """F(e^{i delta} u) = e^{i delta} F1, other components unchanged."""
    grid, basis, M = branch_square["grid"], branch_square["basis"], branch_square["M"]
    p = branch_square["points"][1]
    Mb = ModelParams(chi=M.chi, g=M.g, b=p.b)
    F = assemble_F(p.state, Mb, basis, grid)
    delta = 0.7
    eta = np.full((grid.N, grid.N), delta)
    Ft = assemble_F(gauge_transform(p.state, eta, grid), Mb, basis, grid)
    scale = 1.0 + residual_norm(F)
    assert np.max(np.abs(Ft.psi.values - np.exp(1j * delta) * F.psi.values)) < 1e-11 * scale
    assert np.max(np.abs(Ft.alpha.values - F.alpha.values)) < 1e-11 * scale
    assert np.max(np.abs(Ft.a0.values - F.a0.values)) < 1e-11 * scale
    assert abs(Ft.theta - F.theta) < 1e-11 * scale


# -- leading coefficients ----------------------------------------------------

def test_leading_coeffs_closed_forms(branch_square):
    co = branch_square["coeffs"]
    L, M = branch_square["L"], branch_square["M"]
    assert abs(co.theta1 - 1.0 / (2.0 * M.chi)) < 1e-15
    assert abs(co.beta - beta(1j)) < 1e-9
    want_bprime = -(M.chi / L.n) * (M.g - 1.0) * co.beta
    assert abs(co.bprime - want_bprime) < 1e-14
    assert abs(co.lamprime - ((M.g - 1.0) * co.beta + 0.5) / M.chi) < 1e-14


def test_self_dual_kills_bprime(square):
    L, grid, basis = square
    co = leading_coeffs(L, ModelParams(chi=1.0, g=1.0), basis, grid)
    assert co.bprime == 0.0
    assert abs(co.lamprime - 0.5) < 1e-15


def test_alpha1_matches_constraint(square):
    from zhkvortex.operators import curl_vals, div_vals

    L, grid, basis = square
    co = leading_coeffs(L, ModelParams(chi=1.0, g=2.0), basis, grid)
    rho0 = np.abs(basis.B[0]) ** 2
    want = 0.5 * rho0.mean() - 0.5 * rho0
    assert np.max(np.abs(curl_vals(co.alpha1.values, grid) - want)) < 1e-10
    assert np.max(np.abs(div_vals(co.alpha1.values, grid))) < 1e-10


# -- the branch --------------------------------------------------------------

def test_branch_points_solve_the_system(branch_square):
    for p in branch_square["points"]:
        assert p.residual <= 1e-10
        assert p.div_J <= 1e-9
        assert p.flags == ()
        assert p.newton_iters <= 50
        # flux/charge relation is one of the solved equations
        rho = np.abs(p.state.psi.values) ** 2
        assert abs(-p.theta * p.b + 0.5 * rho.mean()) < 1e-11


def test_branch_field_matches_quadratic_prediction(branch_square):
    # the quartic remainder coefficient is ~2.1 on the square lattice
    co = branch_square["coeffs"]
    for p in branch_square["points"]:
        gap = abs(p.b - (1.0 + co.bprime * p.s**2))
        assert gap <= 5.0 * p.s**4


def test_correction_doubling_ratios(branch_square):
    pts, co, basis = branch_square["points"], branch_square["coeffs"], branch_square["basis"]
    d = [check_corrections(p, co, basis, chi=1.0) for p in pts]
    want = {"dpsi": 8.0, "dalpha": 16.0, "da0": 16.0, "dtheta": 16.0, "db": 16.0}
    for lo, hi in [(d[0], d[1]), (d[1], d[2])]:
        for key, w in want.items():
            ratio = hi[key] / lo[key]
            assert w / 1.5 <= ratio <= w * 1.5, (key, ratio)


def test_out_of_range_amplitude_is_flagged(square):
    L, grid, _ = square
    from zhkvortex import LadderBasis

    basis = LadderBasis(L, grid, 60)
    M = ModelParams(chi=1.0, g=2.0)
    with pytest.warns(UserWarning, match="validated range"):
        pts = solve_branch(L, M, [0.06], basis, grid, s_max=0.05)
    assert pts[0].flags == ("beyond-validated-radius",)


def test_truncation_excess_is_flagged(square):
    # at M_max = 40 the Galerkin tail of the cubic term exceeds the full-grid
    # gate at s = 0.08; the point converges but must carry the warning flag
    L, grid, basis = square
    M = ModelParams(chi=1.0, g=2.0)
    with pytest.warns(UserWarning):
        pts = solve_branch(L, M, [0.02, 0.04, 0.08], basis, grid)
    assert pts[0].flags == () and pts[1].flags == ()
    assert "beyond-validated-radius" in pts[2].flags
    assert pts[2].tail_F1 > 1e-10


def test_branch_at_b_roundtrip(branch_square):
    L, grid, basis = branch_square["L"], branch_square["grid"], branch_square["basis"]
    M = branch_square["M"]
    target = branch_square["points"][1]
    s_b, point = branch_at_b(L, M, basis, grid, b=target.b)
    assert abs(s_b - target.s) < 1e-8
    assert abs(point.b - target.b) < 1e-10
    assert point.residual <= 1e-10
    assert abs(s_of_b(L, M, basis, grid, b=target.b) - s_b) < 1e-12


def test_branch_at_b_guards(square):
    L, grid, basis = square
    with pytest.raises(ModelConditionError):
        branch_at_b(L, ModelParams(chi=1.0, g=1.0), basis, grid, b=0.99)
    with pytest.raises(ModelConditionError):
        branch_at_b(L, ModelParams(chi=1.0, g=2.0), basis, grid, b=1.1)
    with pytest.raises(ModelConditionError):
        branch_at_b(L, ModelParams(chi=1.0, g=0.5), basis, grid, b=0.9)
    with pytest.raises(InvalidParameterError):
        branch_at_b(L, ModelParams(chi=1.0, g=2.0), basis, grid, b=0.8)  # mu = 0.2


def test_hexagonal_branch_point():
    from zhkvortex import LadderBasis, SpectralGrid, make_lattice

    L = make_lattice(HEX_TAU, 1)
    grid = SpectralGrid(L, 64)
    basis = LadderBasis(L, grid, 60)
    M = ModelParams(chi=1.0, g=2.0)
    (p,) = solve_branch(L, M, [0.05], basis, grid)
    assert p.residual <= 1e-10
    bh = beta(HEX_TAU)
    assert abs(p.b - (1.0 - bh * 0.05**2)) < 5.0 * 0.05**4
