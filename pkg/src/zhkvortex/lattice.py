"""Normalized lattices, dual bases, the quasi-periodicity cocycle, modular reduction.

The lattice is L = r(Z + tau Z) with Im tau > 0 and r fixed so the cell area is
|e1 ^ e2| = r^2 Im tau = 2*pi.  Fields in this package obey

    psi(x + s) = exp(i * ((n/2) x^s + c_s)) * psi(x),        s in L,

with x^s := x1*s2 - x2*s1 and a cocycle c_s satisfying

    c_{s+t} - c_s - c_t - (n/2) s^t  in  2*pi*Z.

This phase convention is the one compatible with the covariant derivative
grad + i*a and the symmetric-gauge base potential a^n(x) = (n/2)(-x2, x1),
curl a^n = +n (charge -1 convention; see the winding-number docstring in fields).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InvalidParameterError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LatticeParam:
    """Normalized lattice r(Z + tau Z), cell area 2*pi, with n flux quanta per cell."""

    tau: complex
    r: float
    n: int
    e1: np.ndarray = field(repr=False)
    e2: np.ndarray = field(repr=False)

    @property
    def area(self) -> float:
        return float(self.e1[0] * self.e2[1] - self.e1[1] * self.e2[0])

    def summary(self) -> dict:
        return {
            "tau_re": float(self.tau.real),
            "tau_im": float(self.tau.imag),
            "r": self.r,
            "n": self.n,
            "area": self.area,
        }


@dataclass(frozen=True)
class DualLattice:
    """Dual basis k1, k2 with k_i . e_j = 2*pi*delta_ij."""

    k1: np.ndarray
    k2: np.ndarray


@dataclass(frozen=True)
class Cocycle:
    """Cocycle c_s on the lattice, stored through its generator values and the
    bilinear extension coefficient omega = (n/2) e1^e2.

    c_{m e1 + m' e2} = m*c1 + m'*c2 + omega*m*m'  (mod 2*pi).

    `omega` is stored explicitly (rather than recomputed) so a deliberately
    corrupted cocycle can be constructed for negative tests; any value other
    than (n/2) e1^e2 violates the defining relation.
    """

    lattice: LatticeParam
    c1: float = 0.0
    c2: float = 0.0
    omega: float | None = None

    def __post_init__(self):
        if self.omega is None:
            object.__setattr__(self, "omega", 0.5 * self.lattice.n * self.lattice.area)


def make_lattice(tau: complex, n: int) -> LatticeParam:
    """Build the normalized lattice for shape tau and flux number n.

    r = sqrt(2*pi / Im tau) so that the fundamental cell has area 2*pi;
    e1 = r*(1, 0), e2 = r*(Re tau, Im tau).
    """
    tau = complex(tau)
    if not (tau.imag > 0.0):
        raise InvalidParameterError("lattice shape requires Im tau > 0, got %r" % tau)
    if int(n) != n or n < 1:
        raise InvalidParameterError("flux number n must be a positive integer, got %r" % n)
    r = math.sqrt(TWO_PI / tau.imag)
    e1 = np.array([r, 0.0])
    e2 = np.array([r * tau.real, r * tau.imag])
    return LatticeParam(tau=tau, r=r, n=int(n), e1=e1, e2=e2)


def dual_basis(L: LatticeParam) -> DualLattice:
    """Dual vectors k1, k2 with k_i . e_j = 2*pi*delta_ij (exact formulas)."""
    t1, t2 = L.tau.real, L.tau.imag
    k1 = (TWO_PI / L.r) * np.array([1.0, -t1 / t2])
    k2 = (TWO_PI / (L.r * t2)) * np.array([0.0, 1.0])
    return DualLattice(k1=k1, k2=k2)


def reduce_tau(tau: complex, max_iter: int = 100) -> complex:
    """Reduce tau to the standard fundamental domain |Re tau| <= 1/2, |tau| >= 1.

    Classical S/T algorithm: translate Re tau into [-1/2, 1/2], invert when
    |tau| < 1, repeat.  On the boundary (|Re tau| = 1/2 or |tau| = 1) the
    representative with Re tau >= 0 is returned.
    """
    tau = complex(tau)
    if not (tau.imag > 0.0):
        raise InvalidParameterError("reduce_tau requires Im tau > 0, got %r" % tau)
    for _ in range(max_iter):
        shift = math.floor(tau.real + 0.5)
        tau = tau - shift
        if abs(tau) < 1.0 - 1e-15:
            tau = -1.0 / tau
            continue
        break
    else:
        raise ConvergenceError("modular reduction did not terminate near tau=%r" % tau)
    # deterministic tie-break on the domain boundary
    if abs(tau.real + 0.5) < 1e-14:
        tau = complex(0.5, tau.imag)
    if abs(abs(tau) - 1.0) < 1e-14 and tau.real < 0.0:
        tau = -1.0 / tau  # reflection onto the Re >= 0 arc
        tau = complex(min(max(tau.real, -0.5), 0.5), tau.imag)
    return tau


def lattice_coords(L: LatticeParam, s) -> tuple[float, float]:
    """Coordinates (m1, m2) of a vector s = m1*e1 + m2*e2 (floats, not rounded)."""
    s = np.asarray(s, dtype=float)
    D = dual_basis(L)
    return float(np.dot(D.k1, s) / TWO_PI), float(np.dot(D.k2, s) / TWO_PI)


def cocycle_value(C: Cocycle, s) -> float:
    """c_s (mod 2*pi) for a lattice vector s.

    `s` may be an integer pair (m1, m2) or a 2-vector, which must lie on the
    lattice to within 1e-9 of an integer coordinate pair.
    """
    if isinstance(s, (tuple, list)) and len(s) == 2 and all(
        float(v).is_integer() for v in (float(s[0]), float(s[1]))
    ):
        m1, m2 = int(s[0]), int(s[1])
    else:
        f1, f2 = lattice_coords(C.lattice, s)
        m1, m2 = round(f1), round(f2)
        if abs(f1 - m1) > 1e-9 or abs(f2 - m2) > 1e-9:
            raise InvalidParameterError(
                "vector %r is not on the lattice (coords %.3e, %.3e)" % (s, f1, f2)
            )
    val = m1 * C.c1 + m2 * C.c2 + C.omega * m1 * m2
    return float(np.mod(val, TWO_PI))


def cocycle_defect(C: Cocycle, s_coords, t_coords) -> float:
    """Distance of c_{s+t} - c_s - c_t - (n/2) s^t from 2*pi*Z (defect of the
    defining relation); zero for a valid cocycle."""
    m1, m2 = s_coords
    p1, p2 = t_coords
    L = C.lattice
    cs = cocycle_value(C, (m1, m2))
    ct = cocycle_value(C, (p1, p2))
    cst = cocycle_value(C, (m1 + p1, m2 + p2))
    s_wedge_t = (m1 * p2 - m2 * p1) * L.area  # (m1 e1 + m2 e2) ^ (p1 e1 + p2 e2)
    d = cst - cs - ct - 0.5 * L.n * s_wedge_t
    return abs(d - TWO_PI * round(d / TWO_PI))


def equivariance_phase(L: LatticeParam, C: Cocycle, x, m1: int, m2: int) -> np.ndarray:
    """Phase factor Phi_s(x) = exp(i[(n/2) x^s + c_s]) for s = m1*e1 + m2*e2.

    x may be a single 2-vector or an (..., 2) array; returns complex of matching shape.
    """
    x = np.asarray(x, dtype=float)
    s = m1 * L.e1 + m2 * L.e2
    wedge = x[..., 0] * s[1] - x[..., 1] * s[0]
    return np.exp(1j * (0.5 * L.n * wedge + cocycle_value(C, (m1, m2))))
