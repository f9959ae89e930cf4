"""Infinite-chain spin-wave dispersion from lattice sums of the Green's tensor.

The sums Sum_{j>=1} z^j / j^s with |z| = 1 converge only conditionally in
real space, so they are evaluated in closed form through polylogarithms on
the unit circle.  Parts that are Bernoulli polynomials are taken exactly;
the Clausen-type remainders come from the zeta-function expansion of
Li_s(e^mu) about mu = 0, which converges geometrically for |mu| <= pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from math import comb, factorial

import numpy as np
from scipy.optimize import brentq
from scipy.special import zeta

from .angular import TOY_ATOM, LevelScheme
from .greens import K0, DispersionEngineering, dipole_prefactor

_SERIES_TERMS = 72
DEFAULT_SAMPLES = 512


@lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple:
    """Exact B_0..B_n (B_1 = -1/2) from the Akiyama-Tanigawa recurrence."""
    out = []
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    if n >= 1:
        out[1] = -out[1]
    return tuple(out)


@lru_cache(maxsize=None)
def _series_coefficients(s: int) -> np.ndarray:
    """zeta(s - k) / k! for k = 0.._SERIES_TERMS, with the k = s-1 term zeroed."""
    B = bernoulli_numbers(_SERIES_TERMS + 2)
    coef = np.zeros(_SERIES_TERMS + 1)
    for k in range(_SERIES_TERMS + 1):
        n = s - k
        if k == s - 1:
            continue
        if n >= 2:
            z = zeta(n)
        elif n == 0:
            z = -0.5
        else:
            m = -n
            z = float((-1) ** m * B[m + 1] / (m + 1))
        coef[k] = z / factorial(k)
    return coef


def _harmonic(n: int) -> float:
    return sum(1.0 / i for i in range(1, n + 1))


def _bernoulli_poly(n: int, x):
    B = bernoulli_numbers(n)
    return sum(comb(n, k) * float(B[k]) * x ** (n - k) for k in range(n + 1))


def _series(s: int, theta):
    """Li_s(e^{i theta}) from the expansion about theta = 0, |theta| <= pi."""
    mu = 1j * theta
    out = np.zeros_like(mu)
    for c in _series_coefficients(s)[::-1]:
        out = out * mu + c
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = mu ** (s - 1) / factorial(s - 1) * (_harmonic(s - 1) - np.log(-mu))
    log_term = np.where(theta == 0, 0.0, log_term)
    return out + log_term


def _bernoulli_part(s: int, theta):
    """Elementary half of Li_s(e^{i theta}): Re for even s, Im for odd s."""
    x = np.mod(theta, 2 * np.pi) / (2 * np.pi)
    n = s // 2 if s % 2 == 0 else (s - 1) // 2
    return (-1) ** (n - 1) * (2 * np.pi) ** s * _bernoulli_poly(s, x) / (2 * factorial(s))


def polylog(s: int, z):
    """Li_s(z) for |z| = 1 and s in {1, 2, 3, 4}; vectorized over z."""
    if s not in (1, 2, 3, 4):
        raise ValueError("only s = 1..4 are supported")
    z = np.asarray(z, dtype=complex)
    if not np.allclose(np.abs(z), 1.0, rtol=0, atol=1e-12):
        raise ValueError("polylog is implemented on the unit circle only")
    theta = np.angle(z)
    if s == 1:
        if np.any(theta == 0):
            raise ZeroDivisionError("Li_1 diverges at z = 1")
        return -np.log(1 - z)
    theta = np.asarray(theta, dtype=float)
    series = _series(s, theta)
    exact = _bernoulli_part(s, theta)
    if s % 2 == 0:
        return exact + 1j * series.imag
    return series.real + 1j * exact


def _unit_phase(angle):
    """exp(i angle) plus the reduced angle in (-pi, pi], for exact z = 1 checks."""
    red = np.mod(angle + np.pi, 2 * np.pi) - np.pi
    return np.exp(1j * red), red


def lattice_sum_greens(k, q: int, d: float, k0: float = K0):
    """Sum_{j != 0} exp(-i k d j) G_qq(j d) for the on-axis chain."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape, dtype=complex)
    for sign in (1, -1):
        z, red = _unit_phase((k0 + sign * k) * d)
        if q == 0:
            out += (polylog(3, z) / d ** 3 - 1j * k0 / d ** 2 * polylog(2, z)) / (2 * np.pi * k0 ** 2)
        else:
            if np.any(red == 0):
                raise ZeroDivisionError("|q| = 1 lattice sum diverges on the light line")
            out += (k0 ** 2 / d * polylog(1, z) + 1j * k0 / d ** 2 * polylog(2, z)
                    - polylog(3, z) / d ** 3) / (4 * np.pi * k0 ** 2)
    return out


def engineering_shift(k, d: float, delta: float):
    """Fourier sum of the r^-4 correction: -(720 delta / 7 pi^4) Re Li_4(e^{ikd})."""
    k = np.asarray(k, dtype=float)
    z, _ = _unit_phase(k * d)
    return -(720.0 * delta / (7 * np.pi ** 4)) * polylog(4, z).real


def dispersion(k, q: int, d: float, engineering: bool = False,
               scheme: LevelScheme = TOY_ATOM, k0: float = K0):
    """(J_k, Gamma_k) of a polarization-q spin wave on the infinite chain.

    ``k`` must already lie in the first Brillouin zone [-pi/d, pi/d].
    """
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(k) > np.pi / d * (1 + 1e-12)):
        raise ValueError("k outside the first Brillouin zone; reduce it first")
    P = dipole_prefactor(scheme, k0)
    g = lattice_sum_greens(k, q, d, k0)
    J = -P * g.real
    gamma = 2 * P * (g.imag + k0 / (6 * np.pi))
    if engineering and abs(q) == 1:
        J = J + engineering_shift(k, d, delta_at_zone_edge(d, scheme, k0))
    return J, gamma


def delta_at_zone_edge(d: float, scheme: LevelScheme = TOY_ATOM, k0: float = K0) -> float:
    """J_{pi/d, 0} - J_{pi/d, 1} for the free-space dispersions."""
    k = np.pi / d
    J0, _ = dispersion(k, 0, d, False, scheme, k0)
    J1, _ = dispersion(k, 1, d, False, scheme, k0)
    return float(J0 - J1)


def engineering_for(d: float, scheme: LevelScheme = TOY_ATOM, k0: float = K0) -> DispersionEngineering:
    return DispersionEngineering(d=float(d), delta=delta_at_zone_edge(d, scheme, k0))


@dataclass(frozen=True)
class DispersionCurve:
    d: float
    q: int
    engineering: bool
    k: np.ndarray
    J: np.ndarray
    Gamma: np.ndarray


def dispersion_curve(d: float, q: int, engineering: bool = False,
                     samples: int = DEFAULT_SAMPLES, k0: float = K0) -> DispersionCurve:
    """Sample k in [0, pi/d]; light-line points of the |q| = 1 band come out as -inf / nan."""
    k = np.linspace(0.0, np.pi / d, samples)
    J = np.empty_like(k)
    G = np.empty_like(k)
    singular = np.zeros(k.shape, dtype=bool)
    if abs(q) == 1:
        for sign in (1, -1):
            singular |= _unit_phase((k0 + sign * k) * d)[1] == 0
    J[singular], G[singular] = -np.inf, np.nan
    if np.any(~singular):
        J[~singular], G[~singular] = dispersion(k[~singular], q, d, engineering, k0=k0)
    return DispersionCurve(float(d), q, engineering, k, J, G)


def find_intersection(d: float, k0: float = K0, grid: int = 4000):
    """Guided wavevector k in (k0, pi/d] where the free-space q = 0 and |q| = 1 bands cross.

    Returns None if they do not cross.  The |q| = 1 band diverges
    logarithmically on the light line, which forces an extra sign change
    just above k0 whenever a genuine crossing exists; the outermost sign
    change (closest to the zone edge) is the guided crossing, so that one is
    bracketed on a grid and refined until |J_0 - J_1| < 1e-10.
    """
    kmax = np.pi / d
    if kmax <= k0:
        return None

    def gap(k):
        return float(dispersion(k, 0, d, k0=k0)[0] - dispersion(k, 1, d, k0=k0)[0])

    eps = 1e-9 * kmax
    ks = np.linspace(k0 + eps, kmax, grid)
    vals = dispersion(ks, 0, d, k0=k0)[0] - dispersion(ks, 1, d, k0=k0)[0]
    if vals[-1] == 0.0:
        return float(kmax)
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size == 0:
        return None
    a, b = ks[idx[-1]], ks[idx[-1] + 1]
    root = brentq(gap, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    # brentq stalls on machine precision; finish with plain bisection if needed
    fa = gap(a)
    while abs(gap(root)) >= 1e-10 and b - a > 4 * np.finfo(float).eps * b:
        m = 0.5 * (a + b)
        fm = gap(m)
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
        root = 0.5 * (a + b)
    return float(root)


def intersection_threshold(d_lo: float = 0.05, d_hi: float = 0.45, tol: float = 1e-4) -> float:
    """Largest lattice constant for which the free-space bands still cross.

    Bisects on the existence of a crossing, so it assumes crossings exist
    below the threshold and not above it.
    """
    if find_intersection(d_lo) is None or find_intersection(d_hi) is not None:
        raise ValueError("threshold not bracketed by [d_lo, d_hi]")
    while d_hi - d_lo > tol:
        mid = 0.5 * (d_lo + d_hi)
        if find_intersection(mid) is None:
            d_hi = mid
        else:
            d_lo = mid
    return 0.5 * (d_lo + d_hi)
