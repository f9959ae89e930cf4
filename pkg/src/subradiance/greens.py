"""Free-space dyadic Green's tensor and the pairwise dipole couplings it induces.

Units throughout: hbar = 1, single-atom decay Gamma_0 = 1, lengths in units
of the resonant wavelength lambda_0 (so the default k0 is 2*pi).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import POLARIZATIONS, TOY_ATOM, LevelScheme

K0 = 2 * np.pi

_SQ2 = np.sqrt(2.0)
SPHERICAL_BASIS = {
    1: np.array([-1.0, -1.0j, 0.0]) / _SQ2,
    0: np.array([0.0, 0.0, 1.0], dtype=complex),
    -1: np.array([1.0, -1.0j, 0.0]) / _SQ2,
}


class CoincidentPointsError(ValueError):
    """Raised when the divergent real part of G is requested at r = 0."""


def greens_tensor(r, k0: float = K0) -> np.ndarray:
    """G(r, omega_0) as a 3x3 complex array (or ``(..., 3, 3)`` for stacked r)."""
    r = np.asarray(r, dtype=float)
    dist = np.linalg.norm(r, axis=-1)
    if np.any(dist == 0):
        raise CoincidentPointsError("real part of G diverges at coincident points")
    kr = k0 * dist
    phase = np.exp(1j * kr) / (4 * np.pi * k0 ** 2 * dist ** 3)
    a = (kr ** 2 + 1j * kr - 1) * phase
    b = (-kr ** 2 - 3j * kr + 3) * phase
    rhat = r / dist[..., None]
    outer = rhat[..., :, None] * rhat[..., None, :]
    return a[..., None, None] * np.eye(3) + b[..., None, None] * outer


def imag_greens_at_origin(k0: float = K0) -> np.ndarray:
    """Im G(r -> 0) = k0 / (6 pi) times the identity."""
    return np.eye(3) * k0 / (6 * np.pi)


def on_axis_components(dist, k0: float = K0):
    """(G_xx, G_zz) for separation ``dist`` along the quantization axis.

    Vectorized over ``dist``; G_yy = G_xx and the off-diagonal part vanishes.
    """
    dist = np.asarray(dist, dtype=float)
    if np.any(dist == 0):
        raise CoincidentPointsError("real part of G diverges at coincident points")
    kr = k0 * dist
    e = np.exp(1j * kr)
    gxx = e * (kr ** 2 + 1j * kr - 1) / (4 * np.pi * k0 ** 2 * dist ** 3)
    gzz = e * (1 - 1j * kr) / (2 * np.pi * k0 ** 2 * dist ** 3)
    return gxx, gzz


def spherical_projection(G, q: int, qp: int) -> complex:
    """e_q . G . conj(e_q')."""
    G = np.asarray(G)
    return SPHERICAL_BASIS[q] @ G @ np.conj(SPHERICAL_BASIS[qp])


def dipole_prefactor(scheme: LevelScheme = TOY_ATOM, k0: float = K0) -> float:
    """mu_0 omega_0^2 |d|^2 / hbar fixed so an isolated excited sublevel decays at 1.

    With Sum_q C^2 = 1/(2F_e+1) and Im G(0) = k0/(6 pi), Gamma_iiqq = 2F_e+1.
    """
    return 3 * np.pi * (2 * float(scheme.F_e) + 1) / k0


@dataclass(frozen=True)
class ChainGeometry:
    """Atom positions along z in units of lambda_0."""

    positions: np.ndarray
    d: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 1 or pos.size == 0:
            raise ValueError("positions must be a non-empty 1D array of z coordinates")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("positions must be strictly increasing")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @classmethod
    def ideal(cls, N: int, d: float) -> "ChainGeometry":
        return cls(np.arange(N) * float(d), float(d))

    @property
    def N(self) -> int:
        return self.positions.size

    def is_reflection_symmetric(self, tol: float = 1e-12) -> bool:
        p = self.positions
        return bool(np.allclose(p + p[::-1], p[0] + p[-1], rtol=0, atol=tol))


@dataclass(frozen=True)
class DispersionEngineering:
    """Short-range r^-4 shift added to the |q| = 1 exchange couplings."""

    d: float
    delta: float


@dataclass(frozen=True)
class CouplingRates:
    J: float
    Gamma: float
    i: int
    j: int
    q: int
    qp: int


def dispersion_correction(r, d: float, delta: float):
    """J'(r) = -(360 delta / 7) (d / (pi r))^4."""
    r = np.asarray(r, dtype=float)
    return -(360.0 * delta / 7.0) * (d / (np.pi * r)) ** 4


def coupling_rates(geometry: ChainGeometry, i: int, j: int, q: int, qp: int,
                   engineering: DispersionEngineering | None = None,
                   scheme: LevelScheme = TOY_ATOM, k0: float = K0) -> CouplingRates:
    """Exchange rate J_ijqq' and decay rate Gamma_ijqq' between atoms i and j.

    For i == j only the decay part is defined; J_ii is absorbed into the
    bare transition frequency and reported as 0.
    """
    if q not in POLARIZATIONS or qp not in POLARIZATIONS:
        raise ValueError("polarizations must lie in {-1, 0, 1}")
    P = dipole_prefactor(scheme, k0)
    if i == j:
        g = spherical_projection(imag_greens_at_origin(k0), q, qp)
        return CouplingRates(0.0, float(2 * P * g.real), i, j, q, qp)
    zi, zj = geometry.positions[i], geometry.positions[j]
    if zi == zj:
        raise CoincidentPointsError(f"atoms {i} and {j} coincide")
    r = np.array([0.0, 0.0, zi - zj])
    g = spherical_projection(greens_tensor(r, k0), q, qp)
    J = -P * g.real
    if engineering is not None and q == qp and abs(q) == 1:
        J += float(dispersion_correction(abs(zi - zj), engineering.d, engineering.delta))
    return CouplingRates(float(J), float(2 * P * g.imag), i, j, q, qp)


def chain_couplings(geometry: ChainGeometry, q: int,
                    engineering: DispersionEngineering | None = None,
                    scheme: LevelScheme = TOY_ATOM, k0: float = K0) -> np.ndarray:
    """N x N matrix of J_ijq - i Gamma_ijq / 2 for an on-axis chain.

    The diagonal holds -i Gamma_iiqq / 2.  Only q = q' couplings survive on axis.
    """
    P = dipole_prefactor(scheme, k0)
    z = geometry.positions
    sep = np.abs(z[:, None] - z[None, :])
    off = ~np.eye(z.size, dtype=bool)
    gxx, gzz = on_axis_components(sep[off], k0)
    g = gzz if q == 0 else gxx
    K = np.zeros((z.size, z.size), dtype=complex)
    shift = -P * g.real
    if engineering is not None and abs(q) == 1:
        shift = shift + dispersion_correction(sep[off], engineering.d, engineering.delta)
    K[off] = shift - 0.5j * (2 * P * g.imag)
    np.fill_diagonal(K, -0.5j * 2 * P * k0 / (6 * np.pi))
    return K
