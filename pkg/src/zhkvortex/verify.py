"""Named invariant checks behind the `verify` subcommand.

Each check exercises one identity the construction is supposed to satisfy,
with an explicit tolerance; run_verify returns structured results (the CLI
prints one line per check and folds failures into the exit code).  A hidden
corruption hook scales the bilinear coefficient of the cocycle so the defect
detector can be demonstrated to actually fire; linear shifts of the characters
would be absorbed by the cocycle relation, which is bilinear-only.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .bifurcation import (
    GaugeState,
    ModelParams,
    assemble_F,
    basis_size_for,
    branch_at_b,
    gauge_transform,
    leading_coeffs,
    solve_branch,
)
from .errors import InKernelError, ModelConditionError, ResonanceError
from .fields import PerScalarField, PerVecField, QPField, SpectralGrid, winding_number
from .landau import LadderBasis, build_psi0, current
from .lattice import Cocycle, make_lattice, cocycle_defect
from .operators import (
    GaugePotential,
    apply_magnetic_laplacian,
    commutator_defect,
    curl_star_vals,
    curl_vals,
    dbar_residual_fd,
    div_vals,
    fd_beta,
    fd_overlap_psi0,
    m_operator_spectrum,
    magnetic_laplacian_direct,
    pinned_resolvent,
    poisson_stream_alpha,
    t_matrix,
)

HEX_TAU = complex(0.5, 0.5 * math.sqrt(3.0))


@dataclass
class CheckResult:
    name: str
    ok: bool
    value: float
    tol: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return "[%s] %-24s %.3e <= %.0e  %s(%.2fs)" % (
            status, self.name, self.value, self.tol,
            (self.detail + " ") if self.detail else "", self.seconds,
        )


class _Ctx:
    def __init__(self, quick: bool, seed: int, corrupt_cocycle: bool):
        self.quick = quick
        self.rng = np.random.default_rng(seed)
        self.corrupt = corrupt_cocycle
        self.N = 48 if quick else 64
        self._cache: dict = {}

    def setup(self, tau: complex, N: int | None = None, M: int = 40):
        N = self.N if N is None else N
        key = (tau, N, M)
        if key not in self._cache:
            L = make_lattice(tau, 1)
            grid = SpectralGrid(L, N)
            basis = LadderBasis(L, grid, M_max=M)
            self._cache[key] = (L, grid, basis)
        return self._cache[key]

    def random_psi(self, basis, mmax: int, amp: float = 0.7):
        decay = 0.75 ** np.arange(mmax + 1)
        c = amp * decay * (
            self.rng.standard_normal(mmax + 1) + 1j * self.rng.standard_normal(mmax + 1)
        )
        return c, basis.synth(c)

    def random_alpha(self, basis, grid, amp: float = 0.2):
        """Smooth divergence-free perturbation plus a constant part."""
        rho = np.abs(basis.synth(self.random_psi(basis, 3, amp=1.0)[0])) ** 2
        a = poisson_stream_alpha(amp * (rho.mean() - rho), grid)
        return a + amp * 0.5 * self.rng.standard_normal(2)


# --- individual checks ------------------------------------------------------

def _check_cocycle(ctx: _Ctx) -> CheckResult:
    worst = 0.0
    for tau in (1j, HEX_TAU):
        L = make_lattice(tau, 1)
        if ctx.corrupt:
            C = Cocycle(L, omega=1.05 * 0.5 * L.n * L.area)
        else:
            C = Cocycle(L)
        for m1 in range(-3, 4):
            for m2 in range(-3, 4):
                for p1 in range(-3, 4):
                    for p2 in range(-3, 4):
                        worst = max(worst, cocycle_defect(C, (m1, m2), (p1, p2)))
    detail = "(omega corrupted)" if ctx.corrupt else ""
    return CheckResult("cocycle", worst <= 1e-12, worst, 1e-12, detail)


def _check_psi0(ctx: _Ctx) -> CheckResult:
    worst = 0.0
    taus = (1j,) if ctx.quick else (1j, HEX_TAU, complex(0.3, 1.1))
    for tau in taus:
        L, grid, _ = ctx.setup(tau, N=32 if ctx.quick else 48, M=1)
        p = build_psi0(L, grid=grid)
        worst = max(worst, dbar_residual_fd(p.evaluate, L, grid))
    return CheckResult("dbar_kernel", worst <= 1e-10, worst, 1e-10,
                       "%d shapes" % len(taus))


def _check_winding(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j)
    w = winding_number(basis.field(0))
    ok = w == L.n
    return CheckResult("vortex_number", ok, float(w), float(L.n), "== n exactly")


def _check_ladder_eigs(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(HEX_TAU)
    worst = 0.0
    a = GaugePotential(L, None)
    for m in range(0, 11):
        psi = basis.field(m)
        lhs = magnetic_laplacian_direct(psi, a, basis).values
        worst = max(worst, float(np.sqrt(np.mean(np.abs(lhs - L.n * (2 * m + 1) * psi.values) ** 2))))
    return CheckResult("ladder_eigenvalues", worst <= 1e-9, worst, 1e-9, "m<=10")


def _check_weitzenboeck(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j)
    _, psi_v = ctx.random_psi(basis, 12)
    psi = QPField(L, psi_v)
    a = GaugePotential(L, PerVecField(L, ctx.random_alpha(basis, grid)))
    lhs = apply_magnetic_laplacian(psi, a, basis, grid).values
    rhs = magnetic_laplacian_direct(psi, a, basis, grid=grid).values
    scale = float(np.sqrt(np.mean(np.abs(rhs) ** 2))) + 1.0
    err = float(np.sqrt(np.mean(np.abs(lhs - rhs) ** 2))) / scale
    return CheckResult("weitzenboeck", err <= 1e-9, err, 1e-9,
                       "4 del* del + curl a vs expansion")


def _check_commutator(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j)
    _, psi_v = ctx.random_psi(basis, 12)
    psi = QPField(L, psi_v)
    a = GaugePotential(L, PerVecField(L, ctx.random_alpha(basis, grid)))
    err = commutator_defect(psi, a, basis, grid)
    scale = float(np.sqrt(np.mean(np.abs(psi_v) ** 2))) + 1.0
    return CheckResult("commutator", err / scale <= 1e-9, err / scale, 1e-9,
                       "[del,del*] = curl a / 2")


def _check_m_spectrum(ctx: _Ctx) -> CheckResult:
    L, _, _ = ctx.setup(HEX_TAU, N=8, M=1)
    spec = m_operator_spectrum(L, 4)
    worst = 0.0
    for blk in spec["blocks"]:
        target = np.array([-blk["knorm"], 0.0, blk["knorm"]])
        worst = max(worst, float(np.max(np.abs(np.sort(blk["eigs"]) - target))))
    ok = worst <= 1e-10 and spec["zero_multiplicity_k0"] == 3
    return CheckResult("m_operator", ok, worst, 1e-10,
                       "{-|k|,0,|k|} per mode, kernel dim 3 at k=0")


def _check_current_identity(ctx: _Ctx) -> CheckResult:
    worst = 0.0
    for tau in (1j, HEX_TAU):
        L, grid, basis = ctx.setup(tau)
        psi0 = basis.field(0)
        J = current(psi0, None, basis).values
        rho = np.abs(psi0.values) ** 2
        target = 0.5 * curl_star_vals(rho, grid)
        worst = max(worst, float(np.sqrt(np.mean(np.sum((J - target) ** 2, axis=-1)))))
    return CheckResult("current_identity", worst <= 1e-9, worst, 1e-9,
                       "J(psi0) = curl* rho0 / 2")


def _check_resolvent(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j)
    chi = 1.0
    w = pinned_resolvent(basis.field(1), L, b=chi, chi=chi, basis=basis)
    err = float(np.sqrt(np.mean(np.abs(w.values - 0.5 * basis.B[1]) ** 2)))
    raised = 0
    try:
        pinned_resolvent(basis.field(1), L, b=chi / 3.0, chi=chi, basis=basis)
    except ResonanceError:
        raised += 1
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # the psi0 component here is the point
            pinned_resolvent(basis.field(0), L, b=chi, chi=chi, basis=basis)
    except InKernelError:
        raised += 1
    ok = err <= 1e-12 and raised == 2
    return CheckResult("pinned_resolvent", ok, err, 1e-12,
                       "R psi1 = psi1/2; %d/2 guards fired" % raised)


def _check_t_matrix(ctx: _Ctx) -> CheckResult:
    worst_iso = 0.0
    min_eig = math.inf
    for tau in (1j, HEX_TAU, complex(0.3, 1.1)):
        L, grid, basis = ctx.setup(tau)
        T = t_matrix(L, b=1.0, chi=1.0, basis=basis)
        eigs = np.linalg.eigvalsh(T)
        min_eig = min(min_eig, float(eigs[0]))
        worst_iso = max(worst_iso, float(np.max(np.abs(T - T[0, 0] * np.eye(2)))))
    ok = min_eig > 0.0 and worst_iso <= 1e-8
    return CheckResult("t_matrix", ok, worst_iso, 1e-8,
                       "isotropic, min eig %.3f > 0" % min_eig)


def _check_gauge(ctx: _Ctx) -> CheckResult:
    """Covariance of F under the residual gauge freedom psi -> e^{i delta} psi
    (with div-free alpha the only smooth gauge motions left are constant
    phases), plus the U(1) identity Im<psi, F1> = 0."""
    L, grid, basis = ctx.setup(1j, M=40)
    Mb = ModelParams(chi=1.0, g=2.0, b=0.97)
    _, psi_v = ctx.random_psi(basis, 6, amp=0.4)
    alpha = PerVecField(L, ctx.random_alpha(basis, grid, amp=0.1))
    rho_s = np.abs(basis.B[0]) ** 2
    a0v = 0.05 * (rho_s - rho_s.mean())
    u = GaugeState(QPField(L, psi_v), alpha, PerScalarField(L, a0v), theta=0.01)
    F = assemble_F(u, Mb, basis, grid)
    cov = 0.0
    for delta in (0.7, -2.2):
        eta = np.full(grid.nodes.shape[:2], delta)
        F2 = assemble_F(gauge_transform(u, eta, grid), Mb, basis, grid)
        d1 = float(np.sqrt(np.mean(np.abs(F2.psi.values - np.exp(1j * delta) * F.psi.values) ** 2)))
        d2 = float(np.sqrt(np.mean(np.sum((F2.alpha.values - F.alpha.values) ** 2, axis=-1))))
        d3 = float(np.sqrt(np.mean((F2.a0.values - F.a0.values) ** 2)))
        d4 = abs(F2.theta - F.theta)
        cov = max(cov, d1, d2, d3, d4)
    ip = np.vdot(psi_v, F.psi.values) / psi_v.size
    realness = abs(ip.imag) / (abs(ip) + 1.0)
    val = max(cov, realness)
    return CheckResult("gauge_covariance", val <= 1e-10, val, 1e-10,
                       "cov %.1e, Im<psi,F1> %.1e" % (cov, realness))


def _check_sign_condition(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j, N=32, M=12)
    raised = 0
    try:
        branch_at_b(L, ModelParams(chi=1.0, g=0.5), basis, grid, b=0.99)
    except ModelConditionError:
        raised += 1
    try:
        branch_at_b(L, ModelParams(chi=1.0, g=2.0), basis, grid, b=1.01)
    except ModelConditionError:
        raised += 1
    return CheckResult("sign_condition", raised == 2, float(raised), 2.0,
                       "existence needs sign(chi-b) = sign(g-1)")


def _check_flux(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j)
    alpha = ctx.random_alpha(basis, grid)
    mean_curl = abs(float(np.mean(curl_vals(alpha, grid))))
    scale = float(np.sqrt(np.mean(alpha**2))) + 1.0
    val = mean_curl / scale
    return CheckResult("flux_quantization", val <= 1e-14, val, 1e-14,
                       "<curl a> = n exactly (perturbation flux-free)")


def _check_div_current(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j, M=basis_size_for(0.05))
    M = ModelParams(chi=1.0, g=2.0)
    pts = solve_branch(L, M, [0.05], basis, grid)
    p = pts[-1]
    J = current(p.state.psi, p.state.alpha, basis)
    val = float(np.sqrt(np.mean(div_vals(J.values, grid) ** 2)))
    return CheckResult("div_current", val <= 1e-9, val, 1e-9,
                       "on-branch s=0.05, residual %.1e" % p.residual)


def _check_fd_oracle(ctx: _Ctx) -> CheckResult:
    L, grid, basis = ctx.setup(1j)
    psi0 = basis.field(0)
    ov = fd_overlap_psi0(psi0.values, L, grid.N)
    deficit = 1.0 - ov
    fd = fd_beta(1j, Ns=(32, 48, 64) if ctx.quick else (48, 64, 96))
    rho = np.abs(psi0.values) ** 2
    bg = float((rho**2).mean() / rho.mean() ** 2)
    db = abs(fd["beta"] - bg)
    val = max(deficit, db)
    return CheckResult("fd_oracle", deficit <= 1e-6 and db <= 1e-6, val, 1e-6,
                       "overlap deficit %.1e, beta gap %.1e" % (deficit, db))


def _check_energy_identity(ctx: _Ctx) -> CheckResult:
    from .energy import energy_per_cell, energy_representation, random_constrained_state

    L, grid, basis = ctx.setup(1j)
    M = ModelParams(chi=1.0, g=2.0, b=0.9)
    worst = 0.0
    for _ in range(3 if ctx.quick else 6):
        u = random_constrained_state(L, M, basis, grid, ctx.rng, mmax=8, amp=0.4)
        e1 = energy_per_cell(u, M, basis, grid)
        e2 = energy_representation(u, M, basis, grid)
        worst = max(worst, abs(e1 - e2) / (1.0 + abs(e1)))
    return CheckResult("energy_identity", worst <= 1e-9, worst, 1e-9,
                       "direct vs completed-square on random states")


_QUICK = [
    _check_cocycle,
    _check_psi0,
    _check_winding,
    _check_ladder_eigs,
    _check_weitzenboeck,
    _check_commutator,
    _check_m_spectrum,
    _check_current_identity,
    _check_resolvent,
    _check_t_matrix,
    _check_gauge,
    _check_sign_condition,
    _check_flux,
    _check_energy_identity,
]
_FULL_EXTRA = [
    _check_div_current,
    _check_fd_oracle,
]


def run_verify(quick: bool = False, seed: int = 2026,
               corrupt_cocycle: bool = False) -> list[CheckResult]:
    ctx = _Ctx(quick=quick, seed=seed, corrupt_cocycle=corrupt_cocycle)
    results = []
    for fn in _QUICK + ([] if quick else _FULL_EXTRA):
        t0 = time.perf_counter()
        try:
            res = fn(ctx)
        except Exception as exc:  # a crashed check is a failed check
            res = CheckResult(fn.__name__.replace("_check_", ""), False,
                              math.nan, math.nan, "raised %r" % exc)
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
