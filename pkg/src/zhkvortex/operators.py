"""Linear operators on cell fields.

Two independent representations are kept deliberately separate:

* the ladder-Galerkin route (landau module): del, del*, -Lap_{a^n} act exactly
  on ladder coefficients, perturbations a = a^n + alpha act by pointwise
  multiplication on the grid;
* a link-phase finite-difference oracle: second-order covariant stencils with
  exact equivariance wrap phases on the nonorthogonal cell, used to validate
  the Galerkin route (ground-state overlap, eigenvalue convergence, beta).

Periodic scalar/vector calculus (curl, curl*, div, the divergence-free
projection P') is spectral on the dual lattice; the k = 0 vector mode is kept
by P' (constants are divergence-free and span part of the M-operator kernel).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InKernelError, InvalidParameterError, ResonanceError
from .fields import PerScalarField, PerVecField, QPField, SpectralGrid, inner
from .landau import LadderBasis
from .lattice import Cocycle, LatticeParam, dual_basis, equivariance_phase

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GaugePotential:
    """a = a^n + alpha with a^n(x) = (n/2)(-x2, x1) kept in closed form."""

    lattice: LatticeParam
    perturbation: PerVecField | None = None

    @property
    def curl_base(self) -> float:
        """curl a^n = n, exactly."""
        return float(self.lattice.n)

    def base_values(self, points) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        return 0.5 * self.lattice.n * np.stack([-x[..., 1], x[..., 0]], axis=-1)

    def curl_values(self, grid: SpectralGrid) -> np.ndarray:
        out = np.full((grid.N, grid.N), self.curl_base)
        if self.perturbation is not None:
            out = out + curl_vals(self.perturbation.values, grid)
        return out


# ---------------------------------------------------------------------------
# spectral calculus on periodic fields

def _fft(v):
    return np.fft.fft2(v)


def _ifft_r(v):
    return np.fft.ifft2(v).real


def curl_vals(alpha: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    ax, ay = _fft(alpha[..., 0]), _fft(alpha[..., 1])
    return _ifft_r(1j * (grid.kx * ay - grid.ky * ax))


def curl_star_vals(f: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    fh = _fft(f)
    return np.stack([_ifft_r(1j * grid.ky * fh), _ifft_r(-1j * grid.kx * fh)], axis=-1)


def div_vals(alpha: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    ax, ay = _fft(alpha[..., 0]), _fft(alpha[..., 1])
    return _ifft_r(1j * (grid.kx * ax + grid.ky * ay))


def curl(alpha: PerVecField, grid: SpectralGrid) -> PerScalarField:
    """curl alpha = d1 alpha2 - d2 alpha1 (spectral)."""
    return PerScalarField(alpha.lattice, curl_vals(alpha.values, grid))


def curl_star(f: PerScalarField, grid: SpectralGrid) -> PerVecField:
    """curl* f = (d2 f, -d1 f); adjoint of curl, and curl curl* = -Lap."""
    return PerVecField(f.lattice, curl_star_vals(f.values, grid))


def div(alpha: PerVecField, grid: SpectralGrid) -> PerScalarField:
    return PerScalarField(alpha.lattice, div_vals(alpha.values, grid))


def project_divfree(alpha: PerVecField, grid: SpectralGrid) -> PerVecField:
    """P' alpha: remove the gradient part mode-by-mode; the k = 0 (constant)
    mode is retained unchanged (constants are divergence-free)."""
    ax, ay = _fft(alpha.values[..., 0]), _fft(alpha.values[..., 1])
    k2 = grid.k2abs.copy()
    k2[0, 0] = 1.0
    dot = (grid.kx * ax + grid.ky * ay) / k2
    dot[0, 0] = 0.0
    return PerVecField(
        alpha.lattice,
        np.stack([_ifft_r(ax - grid.kx * dot), _ifft_r(ay - grid.ky * dot)], axis=-1),
    )


def grad_scalar_vals(f: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    fh = _fft(f)
    return np.stack([_ifft_r(1j * grid.kx * fh), _ifft_r(1j * grid.ky * fh)], axis=-1)


def poisson_stream_alpha(rhs: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Mean-zero, divergence-free alpha with curl alpha = rhs (rhs mean-zero):
    alpha = curl* phi, -Lap phi = rhs, via the stream function phi."""
    sh = _fft(rhs)
    ph = sh * grid._inv_k2
    return np.stack([_ifft_r(1j * grid.ky * ph), _ifft_r(-1j * grid.kx * ph)], axis=-1)


# ---------------------------------------------------------------------------
# covariant operators in the ladder representation

def _coeffs(psi: QPField, basis: LadderBasis, tail_tol: float = 1e-6) -> np.ndarray:
    c = basis.project(psi.values)
    tail = basis.tail_norm(psi.values)
    if tail > tail_tol:
        raise InvalidParameterError(
            "field is not representable in the ladder basis (tail %.2e > %.0e); "
            "increase M_max or smooth the input" % (tail, tail_tol)
        )
    return c


def _alpha_c(a: GaugePotential) -> np.ndarray | None:
    if a is None or a.perturbation is None:
        return None
    av = a.perturbation.values
    return 0.5 * (av[..., 0] - 1j * av[..., 1])


def apply_dbar(psi: QPField, a: GaugePotential, basis: LadderBasis) -> QPField:
    """del_a psi = del_{a^n} psi + i alpha_c psi, alpha_c = (alpha1 - i alpha2)/2."""
    c = _coeffs(psi, basis)
    out = basis.synth(basis.lower(c))
    ac = _alpha_c(a)
    if ac is not None:
        out = out + 1j * ac * psi.values
    return QPField(psi.lattice, out)


def apply_dbar_star(psi: QPField, a: GaugePotential, basis: LadderBasis) -> QPField:
    """del*_a psi = del*_{a^n} psi - i conj(alpha_c) psi (formal adjoint)."""
    c = _coeffs(psi, basis)
    out = basis.synth(basis.raise_(c))
    ac = _alpha_c(a)
    if ac is not None:
        out = out - 1j * np.conj(ac) * psi.values
    return QPField(psi.lattice, out)


def _dz_vals(f: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """d/dz = (d1 - i d2)/2 of a periodic grid function, spectrally."""
    fh = np.fft.fft2(f)
    return np.fft.ifft2(0.5j * (grid.kx - 1j * grid.ky) * fh)


def _dzbar_vals(f: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """d/dzbar = (d1 + i d2)/2 of a periodic grid function, spectrally."""
    fh = np.fft.fft2(f)
    return np.fft.ifft2(0.5j * (grid.kx + 1j * grid.ky) * fh)


def apply_magnetic_laplacian(
    psi: QPField, a: GaugePotential, basis: LadderBasis, grid: SpectralGrid
) -> QPField:
    """-Lap_a psi, *defined* through the factorization 4 del*_a del_a + curl a.

    The composition is expanded with the product rule (the perturbation is
    periodic, so its derivatives are spectral), which keeps every term exact
    for representable psi:

        4 del*_a del_a psi = 4 del* del psi - 4i (dzbar alpha_c) psi
                             + 4i alpha_c del* psi - 4i conj(alpha_c) del psi
                             + 4 |alpha_c|^2 psi.
    """
    c = _coeffs(psi, basis)
    dd = basis.synth(basis.raise_(basis.lower(c)))
    out = 4.0 * dd
    ac = _alpha_c(a)
    if ac is not None:
        lo = basis.synth(basis.lower(c))
        hi = basis.synth(basis.raise_(c))
        out = out - 4j * _dzbar_vals(ac, grid) * psi.values
        out = out + 4j * ac * hi - 4j * np.conj(ac) * lo
        out = out + 4.0 * np.abs(ac) ** 2 * psi.values
    return QPField(psi.lattice, out + a.curl_values(grid) * psi.values)


def commutator_defect(psi: QPField, a: GaugePotential, basis: LadderBasis,
                      grid: SpectralGrid) -> float:
    """|| [del_a, del*_a] psi - (curl a / 2) psi ||_2.

    Both orderings are expanded by the product rule; the commutator content is
    the ladder fact del del* - del* del = n/2 plus the spectral-derivative
    identity dz conj(alpha_c) - dzbar alpha_c = (i/2) curl alpha.
    """
    c = _coeffs(psi, basis)
    v = psi.values
    du = basis.synth(basis.lower(basis.raise_(c)))  # del del* psi
    ud = basis.synth(basis.raise_(basis.lower(c)))  # del* del psi
    ac = _alpha_c(a)
    if ac is None:
        comm = du - ud
    else:
        comm = (du - 1j * _dz_vals(np.conj(ac), grid) * v) - (
            ud - 1j * _dzbar_vals(ac, grid) * v
        )
    target = 0.5 * a.curl_values(grid) * v
    return float(np.sqrt(np.mean(np.abs(comm - target) ** 2)))


def magnetic_laplacian_direct(
    psi: QPField, a: GaugePotential, basis: LadderBasis, grid: SpectralGrid | None = None
) -> QPField:
    """-Lap_a psi expanded about a^n:
    -Lap_{a^n} psi - 2 i alpha . grad_{a^n} psi - i (div alpha) psi + |alpha|^2 psi.

    The div term needs a grid and is skipped when grid is None (valid for the
    divergence-free perturbations used everywhere on the branch).  Computed
    through a different composition than apply_magnetic_laplacian, so
    agreement between the two is a meaningful internal check.
    """
    c = _coeffs(psi, basis)
    n = psi.lattice.n
    lam = n * (2 * np.arange(c.shape[0]) + 1)
    out = basis.synth(lam * c)
    if a is not None and a.perturbation is not None:
        g1, g2 = basis.grad(c)
        av = a.perturbation.values
        out = out - 2j * (av[..., 0] * g1 + av[..., 1] * g2)
        out = out + (av[..., 0] ** 2 + av[..., 1] ** 2) * psi.values
        if grid is not None:
            out = out - 1j * div_vals(av, grid) * psi.values
    return QPField(psi.lattice, out)


# ---------------------------------------------------------------------------
# M operator, pinned resolvent, T matrix, linearization

def m_operator_spectrum(L: LatticeParam, kmax: int) -> dict:
    """Spectrum of M = [[0, curl*], [curl, 0]] on (alpha, a0) per dual vector.

    For each k = p k1 + q k2 with |p|, |q| <= kmax, k != 0, the 3x3 block on
    (alpha_hat, a0_hat) has eigenvalues {-|k|, 0, +|k|}; the zero eigenvector
    is the gradient direction alpha || k (absent once alpha is constrained
    divergence-free).  The k = 0 block vanishes identically: kernel
    R^2 (constant alpha) x R (constant a0), dimension 3.
    """
    if kmax < 1:
        raise InvalidParameterError("kmax must be >= 1")
    D = dual_basis(L)
    blocks = []
    eigs = [0.0, 0.0, 0.0]  # k = 0 block
    for p in range(-kmax, kmax + 1):
        for q in range(-kmax, kmax + 1):
            if p == 0 and q == 0:
                continue
            k = p * D.k1 + q * D.k2
            B = np.array(
                [
                    [0.0, 0.0, 1j * k[1]],
                    [0.0, 0.0, -1j * k[0]],
                    [-1j * k[1], 1j * k[0], 0.0],
                ]
            )
            w = np.linalg.eigvalsh(B)
            blocks.append({"p": p, "q": q, "knorm": float(np.hypot(*k)), "eigs": w})
            eigs.extend(w.tolist())
    return {
        "eigenvalues": np.sort(np.asarray(eigs)),
        "blocks": blocks,
        "zero_multiplicity_k0": 3,
    }


def _resonance_check(L: LatticeParam, b: float, chi: float, M: int) -> np.ndarray:
    n = L.n
    denom = n * (2 * np.arange(M + 1) + 1) - (n / b) * chi
    bad = np.abs(denom[1:]) < 1e-6
    if bad.any():
        m = int(np.argmax(bad)) + 1
        raise ResonanceError(
            "(n/b) chi = %.8f is within 1e-6 of Landau level n(2m+1), m=%d" % ((L.n / b) * chi, m)
        )
    return denom


def pinned_resolvent(
    rhs: QPField, L: LatticeParam, b: float, chi: float, basis: LadderBasis
) -> QPField:
    """Solve (-Lap_{a^n} - (n/b) chi) w = rhs on the orthogonal complement of psi0.

    rhs must be orthogonal to psi0 to 1e-8 (relative); a larger component is
    projected out with a warning.  Near-resonant b raises ResonanceError.
    """
    denom = _resonance_check(L, b, chi, basis.M)
    c = basis.project(rhs.values)
    nr = math.sqrt(float(np.mean(np.abs(rhs.values) ** 2)))
    if nr == 0.0:
        raise InKernelError("zero right-hand side")
    if abs(c[0]) > 1e-8 * nr:
        warnings.warn(
            "pinned_resolvent: rhs has psi0 component %.2e (rel); projecting it out"
            % (abs(c[0]) / nr)
        )
    rest = c.copy()
    rest[0] = 0.0
    if np.linalg.norm(rest) <= 1e-12 * nr:
        raise InKernelError("rhs lies in the kernel direction psi0")
    w = np.zeros_like(c)
    w[1:] = rest[1:] / denom[1:]
    return QPField(rhs.lattice, basis.synth(w))


def t_matrix(L: LatticeParam, b: float, chi: float, basis: LadderBasis) -> np.ndarray:
    """T_ij = 2 Re <grad_j psi0, (-Lap_{a^n} - (n/b) chi)^{-1} grad_i psi0>.

    Since grad psi0 is proportional to psi_1 in both components, T is a
    positive multiple of the identity for every lattice shape; it is computed
    through the resolvent anyway so the closed form stays a cross-check.
    """
    c0 = np.array([1.0 + 0.0j])
    g1, g2 = basis.grad(c0)
    grads = [QPField(L, g1), QPField(L, g2)]
    T = np.empty((2, 2))
    res = [pinned_resolvent(g, L, b, chi, basis) for g in grads]
    for i in range(2):
        for j in range(2):
            T[i, j] = 2.0 * inner(grads[j], res[i]).real
    return 0.5 * (T + T.T)


class LinearizedOp:
    """A_{nb} = dF(0): block-diagonal action on (psi, alpha, a0, theta)."""

    def __init__(self, L: LatticeParam, grid: SpectralGrid, basis: LadderBasis,
                 b: float, chi: float):
        self.lattice, self.grid, self.basis = L, grid, basis
        self.b, self.chi = float(b), float(chi)

    def apply(self, psi_vals, alpha_vals, a0_vals, theta):
        n = self.lattice.n
        c = self.basis.project(psi_vals)
        lam = n * (2 * np.arange(c.shape[0]) + 1) - (n / self.b) * self.chi
        psi_out = self.basis.synth(lam * c)
        alpha_out = curl_star_vals(a0_vals, self.grid)
        a0_out = curl_vals(alpha_vals, self.grid)
        return psi_out, alpha_out, a0_out, -self.b * theta


# ---------------------------------------------------------------------------
# finite-difference oracle: covariant link-phase stencils on the skew cell

def _shift_matrix(L: LatticeParam, N: int, direction: int) -> sp.csr_matrix:
    """Forward covariant shift T_{+d}: (T psi)(x) = U(x -> x+h_d) psi(x + h_d),
    with U the exact line-integral phase of a^n and equivariance wrap phases."""
    C = Cocycle(L)
    e = L.e1 if direction == 1 else L.e2
    h = e / N
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    x = (i[..., None] / N) * L.e1 + (j[..., None] / N) * L.e2
    # exact midpoint phase: integral of a^n along the straight link
    u = np.exp(1j * 0.5 * L.n * (-x[..., 1] * h[0] + x[..., 0] * h[1]))
    if direction == 1:
        ii, jj = (i + 1) % N, j
        wrap = i == N - 1
        xw = (0 / N) * L.e1 + (j[..., None] / N) * L.e2 * np.ones_like(x)
        wphase = equivariance_phase(L, C, xw, 1, 0)
    else:
        ii, jj = i, (j + 1) % N
        wrap = j == N - 1
        xw = (i[..., None] / N) * L.e1 * np.ones_like(x)
        wphase = equivariance_phase(L, C, xw, 0, 1)
    data = u * np.where(wrap, wphase, 1.0)
    rows = (i * N + j).ravel()
    cols = (ii * N + jj).ravel()
    return sp.csr_matrix((data.ravel(), (rows, cols)), shape=(N * N, N * N))


def fd_magnetic_laplacian(L: LatticeParam, N: int) -> sp.csr_matrix:
    """Hermitian second-order discretization of -Lap_{a^n} on the N x N cell grid
    in lattice coordinates (metric G_ab = k_a . k_b / (2 pi)^2, symmetrized
    cross terms)."""
    D = dual_basis(L)
    G11 = float(np.dot(D.k1, D.k1)) / (TWO_PI**2)
    G22 = float(np.dot(D.k2, D.k2)) / (TWO_PI**2)
    G12 = float(np.dot(D.k1, D.k2)) / (TWO_PI**2)
    T1 = _shift_matrix(L, N, 1)
    T2 = _shift_matrix(L, N, 2)
    T1H, T2H = T1.getH().tocsr(), T2.getH().tocsr()
    I = sp.identity(N * N, dtype=complex, format="csr")
    lap = G11 * N**2 * (T1 + T1H - 2 * I) + G22 * N**2 * (T2 + T2H - 2 * I)
    if G12 != 0.0:
        C1 = T1 - T1H
        C2 = T2 - T2H
        lap = lap + G12 * (N**2 / 4.0) * (C1 @ C2 + C2 @ C1)
    return (-lap).tocsr()


def fd_apply(L: LatticeParam, N: int, values: np.ndarray) -> np.ndarray:
    """Apply the FD -Lap_{a^n} to grid samples (oracle for the ladder route)."""
    H = fd_magnetic_laplacian(L, N)
    return (H @ values.ravel()).reshape(N, N)


def fd_ground_state(L: LatticeParam, N: int) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the FD -Lap_{a^n}; eigenvector normalized to
    <|v|^2> = 1 on the grid."""
    H = fd_magnetic_laplacian(L, N).tocsc()
    w, v = spla.eigsh(H, k=1, sigma=0.5 * L.n, which="LM")
    vec = v[:, 0].reshape(N, N)
    vec = vec / math.sqrt(float(np.mean(np.abs(vec) ** 2)))
    return float(w[0]), vec


def fd_beta(tau: complex, Ns: tuple[int, ...] = (48, 64, 96)) -> dict:
    """beta(tau) from the FD ground state, Richardson-extrapolated in h^2.

    A 3-point fit in (1, N^-2, N^-4) removes the leading even-order errors of
    the second-order stencil; returns the extrapolated value and raw samples.
    """
    from .lattice import make_lattice

    if len(Ns) < 3:
        raise InvalidParameterError("need at least 3 grid sizes for the h^2 fit")
    L = make_lattice(tau, 1)
    raw = []
    for N in Ns:
        _, vec = fd_ground_state(L, N)
        rho = np.abs(vec) ** 2
        raw.append(float((rho**2).mean() / rho.mean() ** 2))
    A = np.vander(1.0 / np.asarray(Ns, dtype=float) ** 2, 3, increasing=True)
    coef, *_ = np.linalg.lstsq(A, np.asarray(raw), rcond=None)
    return {"beta": float(coef[0]), "samples": dict(zip(Ns, raw)), "Ns": tuple(Ns)}


def fd_overlap_psi0(psi0_vals: np.ndarray, L: LatticeParam, N: int) -> float:
    """|<psi0_theta, psi0_fd>| with both normalized on the grid (>= 1 - 1e-6
    is the construction acceptance gate)."""
    _, vec = fd_ground_state(L, N)
    p = psi0_vals / math.sqrt(float(np.mean(np.abs(psi0_vals) ** 2)))
    return abs(complex(np.vdot(p, vec) / p.size))


# ---------------------------------------------------------------------------
# high-order FD residual for the construction contract

_STENCIL9 = np.array(
    [1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280]
)


def dbar_residual_fd(evaluate, L: LatticeParam, grid: SpectralGrid, h: float = 0.02) -> float:
    """||del_{a^n} psi|| / ||psi|| with the derivative taken by 8th-order
    central differences of the closed-form evaluator (independent of the
    ladder algebra)."""
    pts = grid.nodes.reshape(-1, 2)
    psi = evaluate(pts)
    fx = np.zeros_like(psi)
    fy = np.zeros_like(psi)
    for k, ck in zip(range(-4, 5), _STENCIL9):
        if ck == 0.0:
            continue
        fx += ck * evaluate(pts + np.array([k * h, 0.0]))
        fy += ck * evaluate(pts + np.array([0.0, k * h]))
    fx /= h
    fy /= h
    n = L.n
    dbar = 0.5 * (fx - 1j * fy) + 0.25 * n * (pts[:, 0] - 1j * pts[:, 1]) * psi
    return float(
        math.sqrt(np.mean(np.abs(dbar) ** 2)) / math.sqrt(np.mean(np.abs(psi) ** 2))
    )
