"""Lowest Landau level on the cell: the ground state psi0, the ladder basis,
the Abrikosov shape function beta(tau), and the supercurrent.

Closed form (n = 1).  The kernel of del_{a^n} = d/dz + (n/4) conj(z) consists of
psi = exp(-n|z|^2/4) h(conj(z)) with h anti-holomorphic; imposing the
equivariance phases with the canonical cocycle fixes

    psi0(z) = N exp(-|z|^2/4) exp(conj(z)^2/4) theta3(conj(z)/r | -conj(tau)),

with theta3(xi|T) = sum_j exp(i pi T j^2 + 2 pi i j xi).  Its zero sits at the
cell center (e1+e2)/2.  Grouping the Gaussian with each theta term gives the
numerically stable Landau-gauge form used for the whole ladder:

    psi_m(x) = N i^m pi^(1/4) e^{-i x1 x2 / 2}
               sum_j e^{-i pi tau1 j^2} e^{2 pi i j x1 / r} phi_m(x2 - 2 pi j / r),

where phi_m are the orthonormal Hermite functions (three-term recurrence) and
r^2 Im tau = 2 pi.  The m-th row is exactly the normalized m-th ladder state
c_m (del*)^m psi0, so creation/annihilation act as index shifts:

    del psi_m  = sqrt(n m / 2) psi_{m-1},   del* psi_m = sqrt(n (m+1) / 2) psi_{m+1},
    -Lap_{a^n} psi_m = n (2 m + 1) psi_m.

Everything here is validated by residual tests (del-residual, quasi-periodicity,
FD-oracle overlap), not trusted from the transcription.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InvalidParameterError
from .fields import PerVecField, QPField, SpectralGrid, cell_average
from .lattice import Cocycle, LatticeParam, make_lattice

TWO_PI = 2.0 * math.pi
_PI4 = math.pi ** 0.25


def _require_n1(L: LatticeParam, what: str) -> None:
    if L.n != 1:
        raise InvalidParameterError(
            "%s is built for n = 1 (kernel is n-dimensional for n > 1); got n = %d"
            % (what, L.n)
        )


def _ladder_eval_raw(L: LatticeParam, points: np.ndarray, mmax: int, extra: int = 0):
    """Evaluate the unnormalized ladder states m = 0..mmax at arbitrary points.

    Returns (out, tail) with out shaped (mmax+1,) + points.shape[:-1]; `tail` is
    the largest relative magnitude of the extreme-j terms (series truncation
    diagnostic).
    """
    pts = np.asarray(points, dtype=float)
    shape = pts.shape[:-1]
    x1 = pts[..., 0].ravel()
    x2 = pts[..., 1].ravel()
    t1 = L.tau.real
    spacing = TWO_PI / L.r  # = r * Im(tau), the x2 spacing of the Gaussian centers

    reach = math.sqrt(2.0 * mmax + 3.0) + 9.0 + extra * spacing
    jmin = math.floor((x2.min() - reach) / spacing)
    jmax = math.ceil((x2.max() + reach) / spacing)
    j = np.arange(jmin, jmax + 1)

    y = x2[:, None] - spacing * j[None, :]
    # complex phase per (point, j): theta coefficient times the x1 oscillation
    phase = np.exp(1j * (TWO_PI * np.outer(x1, j) / L.r - math.pi * t1 * j**2))
    pref = np.exp(-0.5j * x1 * x2)

    out = np.empty((mmax + 1, x1.size), dtype=complex)
    phi_prev = np.zeros_like(y)
    phi = math.pi ** (-0.25) * np.exp(-0.5 * y * y)
    tail = 0.0
    for m in range(mmax + 1):
        term = phase * phi
        s = term.sum(axis=1)
        out[m] = (1j**m) * _PI4 * pref * s
        edge = np.abs(term[:, 0]).max() + np.abs(term[:, -1]).max()
        scale = np.abs(s).max()
        if scale > 0:
            tail = max(tail, edge / scale)
        phi, phi_prev = (
            math.sqrt(2.0 / (m + 1)) * y * phi - math.sqrt(m / (m + 1)) * phi_prev,
            phi,
        )
    return out.reshape((mmax + 1,) + shape), tail


def _theta_psi0_raw(L: LatticeParam, points: np.ndarray) -> np.ndarray:
    """Unnormalized psi0 through the Gaussian-times-theta3 form (independent
    arrangement of the same series; used for the construction cross-check)."""
    pts = np.asarray(points, dtype=float)
    x1, x2 = pts[..., 0], pts[..., 1]
    t1, t2 = L.tau.real, L.tau.imag
    reach = 9.0
    spacing = TWO_PI / L.r
    jmin = math.floor((x2.min() - reach) / spacing)
    jmax = math.ceil((x2.max() + reach) / spacing)
    out = np.zeros(x1.shape, dtype=complex)
    for j in range(jmin, jmax + 1):
        # exp(-|z|^2/4 + zbar^2/4 - i pi conj(tau) j^2 + 2 pi i j zbar / r), combined
        expo = (
            -0.5 * x2 * x2
            - 0.5j * x1 * x2
            - 1j * math.pi * (t1 - 1j * t2) * j * j
            + TWO_PI * 1j * j * (x1 - 1j * x2) / L.r
        )
        out += np.exp(expo)
    return out


class LadderBasis:
    """Orthonormal ladder states psi_0..psi_M sampled on a grid (built internally
    one level higher so first derivatives stay inside the representation)."""

    def __init__(self, L: LatticeParam, grid: SpectralGrid, M_max: int = 40):
        _require_n1(L, "LadderBasis")
        if M_max < 1:
            raise InvalidParameterError("M_max must be >= 1")
        self.lattice = L
        self.grid = grid
        self.M = int(M_max)

        raw, tail = _ladder_eval_raw(L, grid.nodes, self.M + 1)
        if tail > 1e-14:
            raw, tail = _ladder_eval_raw(L, grid.nodes, self.M + 1, extra=4)
            if tail > 1e-14:
                raise ConvergenceError(
                    "ladder series truncation stalled (tail %.2e > 1e-14)" % tail
                )
        self.series_tail = tail

        nrm = math.sqrt(float(np.mean(np.abs(raw[0]) ** 2)))
        self.norm_const = (1.0 / nrm) * np.exp(-1j * np.angle(raw[0, 0, 0]))
        self.B = self.norm_const * raw  # (M+2, N, N)

    # -- representation ----------------------------------------------------
    def synth(self, c: np.ndarray) -> np.ndarray:
        """Grid samples of sum_m c[m] psi_m."""
        c = np.asarray(c)
        return np.tensordot(c, self.B[: c.shape[0]], axes=1)

    def project(self, values: np.ndarray, M: int | None = None) -> np.ndarray:
        """Ladder coefficients c_m = <psi_m, f> for m = 0..M (default the full basis)."""
        M = self.M if M is None else M
        return np.tensordot(self.B[: M + 1].conj(), values, axes=2) / values.size

    def tail_norm(self, values: np.ndarray) -> float:
        """Relative norm of the out-of-basis residual (Galerkin tail diagnostic)."""
        c = self.project(values, self.M + 1)
        res = values - self.synth(c)
        denom = math.sqrt(float(np.mean(np.abs(values) ** 2)))
        if denom == 0.0:
            return 0.0
        return math.sqrt(float(np.mean(np.abs(res) ** 2))) / denom

    # -- ladder algebra (n = 1) ---------------------------------------------
    def lower(self, c: np.ndarray) -> np.ndarray:
        """Coefficients of del_{a^n} (sum c_m psi_m) = sum sqrt(m/2) c_m psi_{m-1}."""
        m = np.arange(1, c.shape[0])
        out = np.zeros(c.shape[0] - 1 if c.shape[0] > 1 else 1, dtype=complex)
        if c.shape[0] > 1:
            out[: c.shape[0] - 1] = np.sqrt(m / 2.0) * c[1:]
        return out

    def raise_(self, c: np.ndarray) -> np.ndarray:
        """Coefficients of del*_{a^n} (sum c_m psi_m) = sum sqrt((m+1)/2) c_m psi_{m+1}."""
        out = np.zeros(c.shape[0] + 1, dtype=complex)
        m = np.arange(c.shape[0])
        out[1:] = np.sqrt((m + 1) / 2.0) * c
        return out

    def grad(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Grid samples of grad_{a^n} psi: component 1 = (del - del*) psi,
        component 2 = i (del + del*) psi."""
        lo = self.synth(self.lower(c))
        hi = self.synth(self.raise_(c))
        return lo - hi, 1j * (lo + hi)

    def field(self, m: int) -> QPField:
        return QPField(self.lattice, self.B[m].copy())

    def evaluate(self, points, mmax: int | None = None) -> np.ndarray:
        """Normalized ladder states at arbitrary points, shape (mmax+1, ...)."""
        mmax = self.M if mmax is None else mmax
        raw, _ = _ladder_eval_raw(self.lattice, points, mmax)
        return self.norm_const * raw


@dataclass(frozen=True)
class Psi0:
    """The normalized LLL ground state: samples, closed-form evaluator, constants."""

    lattice: LatticeParam
    samples: QPField = field(repr=False)
    norm_const: complex = 1.0
    series_tail: float = 0.0

    def evaluate(self, points) -> np.ndarray:
        raw, _ = _ladder_eval_raw(self.lattice, np.asarray(points, dtype=float), 0)
        return self.norm_const * raw[0]

    @property
    def zero_point(self) -> np.ndarray:
        """Location of the single zero per cell (cell center for this cocycle)."""
        return 0.5 * (self.lattice.e1 + self.lattice.e2)


def build_psi0(L: LatticeParam, N: int = 64, grid: SpectralGrid | None = None) -> Psi0:
    """Construct the normalized psi0 on an N x N grid (n = 1 only).

    Normalization <|psi0|^2> = 1, phase fixed by psi0(0) real and positive.
    """
    _require_n1(L, "build_psi0")
    grid = grid or SpectralGrid(L, N)
    raw, tail = _ladder_eval_raw(L, grid.nodes, 0)
    if tail > 1e-14:
        raw, tail = _ladder_eval_raw(L, grid.nodes, 0, extra=4)
        if tail > 1e-14:
            raise ConvergenceError("theta series truncation stalled (tail %.2e)" % tail)
    v = raw[0]
    nrm = math.sqrt(float(np.mean(np.abs(v) ** 2)))
    const = (1.0 / nrm) * np.exp(-1j * np.angle(v[0, 0]))
    return Psi0(
        lattice=L,
        samples=QPField(L, const * v),
        norm_const=const,
        series_tail=tail,
    )


def beta(tau: complex, N: int = 64, check: bool = True) -> float:
    """Abrikosov function beta(tau) = <|psi0|^4> / <|psi0|^2>^2.

    Evaluated at the tau that is passed (no internal modular reduction, so the
    modular-invariance check compares genuinely different evaluations); the
    series truncation adapts to Im tau.  With check=True the quadrature is
    repeated at ceil(1.5 N) and must agree to 1e-8.
    """
    tau = complex(tau)
    if not (tau.imag > 0.0):
        raise InvalidParameterError("beta requires Im tau > 0, got %r" % tau)

    def _beta_at(NN: int) -> float:
        L = make_lattice(tau, 1)
        g = SpectralGrid(L, NN)
        raw, _ = _ladder_eval_raw(L, g.nodes, 0)
        rho = np.abs(raw[0]) ** 2
        m2 = rho.mean()
        return float((rho**2).mean() / m2**2)

    b = _beta_at(N)
    if check:
        N2 = int(math.ceil(1.5 * N / 2) * 2)
        b2 = _beta_at(N2)
        if abs(b - b2) > 1e-8:
            raise ConvergenceError(
                "beta quadrature not converged at N=%d: |%.12e - %.12e| > 1e-8"
                % (N, b, b2)
            )
    return b


def beta_modular_check(tau: complex, N: int = 64) -> dict:
    """Residuals of beta under the modular generators; both should be <= 1e-7."""
    tau = complex(tau)
    b0 = beta(tau, N=N)
    bt = beta(tau + 1.0, N=N)
    bs = beta(-1.0 / tau, N=N)
    return {"t_shift": abs(b0 - bt), "s_invert": abs(b0 - bs), "beta": b0}


def current(psi: QPField, a_pert, basis: LadderBasis) -> PerVecField:
    """Supercurrent J(psi, alpha) = Im(conj(psi) grad_{a^n + alpha} psi).

    `a_pert` may be None (pure a^n), a PerVecField, or anything exposing a
    `.perturbation` PerVecField.  The result is periodic: the equivariance
    phases cancel in conj(psi) grad psi.
    """
    if a_pert is not None and hasattr(a_pert, "perturbation"):
        a_pert = a_pert.perturbation
    c = basis.project(psi.values)
    g1, g2 = basis.grad(c)
    jx = np.imag(np.conj(psi.values) * g1)
    jy = np.imag(np.conj(psi.values) * g2)
    J = np.stack([jx, jy], axis=-1)
    if a_pert is not None:
        J = J + a_pert.values * (np.abs(psi.values) ** 2)[..., None]
    return PerVecField(psi.lattice, J)
