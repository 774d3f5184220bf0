"""Discretized fields on the fundamental cell.

Grid nodes are x_ij = (i/N) e1 + (j/N) e2, i, j = 0..N-1 (axis 0 along e1),
so periodic fields are ordinary N x N FFT data and the rectangle rule is the
spectrally exact quadrature.  Quasi-periodic complex fields are stored on the
same open cell; values across the boundary are obtained from the equivariance
phase, never from ghost layers.

Fourier convention:  f(x) = sum_{p,q} fhat[p,q] exp(i k_pq . x) with
k_pq = p~ k1 + q~ k2 (signed FFT frequencies) and fhat = fft2(values)/N^2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBoundaryError, InvalidParameterError
from .lattice import Cocycle, LatticeParam, dual_basis, equivariance_phase

TWO_PI = 2.0 * math.pi


class SpectralGrid:
    """N x N sampling of the fundamental cell plus dual-lattice wavenumber tables."""

    def __init__(self, L: LatticeParam, N: int):
        if N % 2 != 0 or N < 4:
            raise InvalidParameterError("grid size N must be even and >= 4, got %r" % N)
        self.lattice = L
        self.N = int(N)
        frac = np.arange(N) / N
        # nodes[i, j] = (i/N) e1 + (j/N) e2
        self.nodes = frac[:, None, None] * L.e1 + frac[None, :, None] * L.e2
        self.weight = L.area / N**2
        D = dual_basis(L)
        m = np.fft.fftfreq(N, d=1.0 / N)  # signed integers
        self.kx = m[:, None] * D.k1[0] + m[None, :] * D.k2[0]
        self.ky = m[:, None] * D.k1[1] + m[None, :] * D.k2[1]
        self.k2abs = self.kx**2 + self.ky**2
        self._inv_k2 = np.zeros_like(self.k2abs)
        nz = self.k2abs > 0
        self._inv_k2[nz] = 1.0 / self.k2abs[nz]

    def __repr__(self):
        return "SpectralGrid(N=%d, tau=%s)" % (self.N, self.lattice.tau)


@dataclass(frozen=True)
class QPField:
    """Quasi-periodic complex field: samples on the open cell plus its cocycle."""

    lattice: LatticeParam
    values: np.ndarray = field(repr=False)
    cocycle: Cocycle | None = None

    def __post_init__(self):
        if self.cocycle is None:
            object.__setattr__(self, "cocycle", Cocycle(self.lattice))


@dataclass(frozen=True)
class PerVecField:
    """Periodic real 2-vector field, values shaped (N, N, 2)."""

    lattice: LatticeParam
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PerScalarField:
    """Periodic real scalar field, values shaped (N, N)."""

    lattice: LatticeParam
    values: np.ndarray = field(repr=False)


def cell_average(f):
    """Cell average <f> by the rectangle rule (exact for band-limited integrands).

    Accepts a field object or a bare sample array; complex input gives a
    complex average.
    """
    v = f.values if hasattr(f, "values") else np.asarray(f)
    if v.ndim == 3:  # vector field: componentwise average
        return v.mean(axis=(0, 1))
    return v.mean()


def inner(fa, fb) -> complex:
    """Cell-averaged L^2 inner product <fa, fb> = <conj(fa) * fb>."""
    va = fa.values if hasattr(fa, "values") else np.asarray(fa)
    vb = fb.values if hasattr(fb, "values") else np.asarray(fb)
    return complex(np.vdot(va, vb) / va.size)


def norm(f) -> float:
    return math.sqrt(abs(inner(f, f)))


def fourier_forward(f):
    """Fourier coefficients fhat with f(x) = sum fhat[p,q] e^{i k_pq . x}.

    Scalar (N,N) input -> (N,N) coefficients; vector (N,N,2) -> (N,N,2).
    """
    v = f.values if hasattr(f, "values") else np.asarray(f)
    if v.ndim == 3:
        return np.stack(
            [np.fft.fft2(v[..., 0]) / v.shape[0] ** 2, np.fft.fft2(v[..., 1]) / v.shape[0] ** 2],
            axis=-1,
        )
    return np.fft.fft2(v) / v.shape[0] ** 2


def fourier_inverse(fhat, real: bool = True):
    """Inverse of fourier_forward; real=True casts back to the real samples."""
    fhat = np.asarray(fhat)
    if fhat.ndim == 3:
        out = np.stack(
            [
                np.fft.ifft2(fhat[..., 0]) * fhat.shape[0] ** 2,
                np.fft.ifft2(fhat[..., 1]) * fhat.shape[0] ** 2,
            ],
            axis=-1,
        )
    else:
        out = np.fft.ifft2(fhat) * fhat.shape[0] ** 2
    return out.real if real else out


def winding_number(psi: QPField, anchor: tuple[int, int] | None = None) -> int:
    """Vortex count of psi per fundamental cell.

    The raw counterclockwise increment of arg(psi) around the cell boundary is
    2*pi*deg_raw; for the anti-holomorphic Landau-level states used here the
    zeros carry local degree -1, so deg_raw = -n.  This function returns the
    *vortex count* -deg_raw (the number of flux-aligned zeros), matching the
    convention "degree one per cell" for the n = 1 ground state: psi0 -> +1,
    constants -> 0.

    The contour is the boundary of the cell anchored at grid node `anchor`
    (defaults to (0, 0), which keeps the zeros of the n = 1 ground state at
    maximal distance); values beyond the stored cell are recovered through the
    equivariance phases.
    """
    v = psi.values
    N = v.shape[0]
    L, C = psi.lattice, psi.cocycle
    i0, j0 = anchor if anchor is not None else (0, 0)

    def logical(I, J):
        # psi at the (possibly out-of-cell) node (I/N) e1 + (J/N) e2
        i, j = I % N, J % N
        m1, m2 = I // N, J // N
        x = (i / N) * L.e1 + (j / N) * L.e2
        return equivariance_phase(L, C, x, m1, m2) * v[i, j]

    loop = []
    for t in range(N):  # x0 -> x0 + e1
        loop.append(logical(i0 + t, j0))
    for t in range(N):  # x0 + e1 -> x0 + e1 + e2
        loop.append(logical(i0 + N, j0 + t))
    for t in range(N):  # x0 + e1 + e2 -> x0 + e2
        loop.append(logical(i0 + N - t, j0 + N))
    for t in range(N):  # x0 + e2 -> x0
        loop.append(logical(i0, j0 + N - t))
    loop.append(loop[0])
    loop = np.asarray(loop)

    mods = np.abs(loop)
    if mods.min() <= 1e-8 * mods.max():
        raise DegenerateBoundaryError(
            "field modulus vanishes on the winding contour (min/max = %.2e); "
            "shift the cell anchor" % (mods.min() / mods.max())
        )
    steps = np.angle(loop[1:] / loop[:-1])
    if np.abs(steps).max() > 0.9 * math.pi:
        raise DegenerateBoundaryError(
            "phase step near pi on the winding contour; refine the grid"
        )
    total = steps.sum() / TWO_PI
    w = round(total)
    if abs(total - w) > 1e-6:
        raise DegenerateBoundaryError("boundary winding %.3e is not an integer" % total)
    return -int(w)


# ---------------------------------------------------------------------------
# flat binary serialization: one JSON header line + raw little-endian payload

_KINDS = {"qp_complex": "<c16", "vec2_real": "<f8", "scalar_real": "<f8"}


def _kind_of(f) -> str:
    if isinstance(f, QPField):
        return "qp_complex"
    if isinstance(f, PerVecField):
        return "vec2_real"
    if isinstance(f, PerScalarField):
        return "scalar_real"
    raise InvalidParameterError("unsupported field type %r" % type(f).__name__)


def save_field(path, f) -> None:
    """Write a field as a one-line JSON header plus raw C-order samples."""
    kind = _kind_of(f)
    L = f.lattice
    header = {
        "N": int(f.values.shape[0]),
        "tau_re": float(L.tau.real),
        "tau_im": float(L.tau.imag),
        "n": int(L.n),
        "kind": kind,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(f.values).astype(_KINDS[kind]).tobytes())


def load_field(path):
    """Inverse of save_field; reconstructs the lattice from the header."""
    from .lattice import make_lattice

    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        payload = fh.read()
    kind = header["kind"]
    if kind not in _KINDS:
        raise InvalidParameterError("unknown field kind %r in %s" % (kind, path))
    N = int(header["N"])
    L = make_lattice(complex(header["tau_re"], header["tau_im"]), int(header["n"]))
    raw = np.frombuffer(payload, dtype=_KINDS[kind])
    if kind == "qp_complex":
        return QPField(L, raw.reshape(N, N).copy())
    if kind == "vec2_real":
        return PerVecField(L, raw.reshape(N, N, 2).copy())
    return PerScalarField(L, raw.reshape(N, N).copy())
