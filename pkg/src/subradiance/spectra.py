"""Eigenmodes of effective Hamiltonians and selection of subradiant ones.

Blocks are first split into reflection / projection-flip sectors whenever the
Hamiltonian has those symmetries; every solver then works sector by sector
and lifts eigenvectors back to the block basis on demand.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hamiltonian import EffectiveHamiltonian
from .symmetry import Sector, symmetry_sectors

log = logging.getLogger(__name__)

DENSE_THRESHOLD = 4096
RESIDUAL_TOL = 1e-8
GAMMA_FLOOR = -1e-9


class ConvergenceError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True, eq=False)
class EigenMode:
    """Right eigenvector with eigenvalue omega = J - i Gamma / 2."""

    omega: complex
    vector: np.ndarray
    sector: Sector
    H: EffectiveHamiltonian
    residual: float

    @property
    def gamma(self) -> float:
        return float(-2 * self.omega.imag)

    @property
    def J(self) -> float:
        return float(self.omega.real)

    @property
    def block(self):
        return self.H.block

    @cached_property
    def amplitudes(self) -> np.ndarray:
        v = self.sector.lift(self.vector)
        return v / np.linalg.norm(v)

    @cached_property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self):
        return (f"EigenMode(J={self.J:.6g}, Gamma={self.gamma:.6g}, "
                f"sector={dict(self.sector.label)}, residual={self.residual:.1e})")


def sectors_for(H: EffectiveHamiltonian, use_symmetry: bool = True) -> list[Sector]:
    if not use_symmetry:
        return symmetry_sectors(H.block, reflection=False, flip=False)
    reflect = H.geometry.is_reflection_symmetric()
    return symmetry_sectors(H.block, reflection=reflect, flip=H.block.two_fz == 0)


def _order(omegas):
    """Ascending Gamma, ties broken by ascending Re(omega)."""
    omegas = np.asarray(omegas)
    return np.lexsort((omegas.real, -2 * omegas.imag))


def _residuals(Hs, w, V):
    R = Hs @ V - V * w[None, :]
    return np.linalg.norm(R, axis=0)


def _dense_sector(Hs, need_vectors=True):
    A = Hs.toarray() if sp.issparse(Hs) else np.asarray(Hs)
    if A.shape[0] == 0:
        return np.zeros(0, complex), np.zeros((0, 0), complex)
    w, V = sla.eig(A, overwrite_a=False, check_finite=False)
    V /= np.linalg.norm(V, axis=0)[None, :]
    return w, V


def _make_modes(H, sector, Hs, w, V):
    res = _residuals(Hs, w, V)
    bad = res > RESIDUAL_TOL * max(1.0, np.abs(w).max() if w.size else 1.0)
    if np.any(bad):
        raise ConvergenceError(
            f"{bad.sum()} eigenpairs in sector {sector.label} exceed the residual tolerance",
            residuals=res[bad])
    return [EigenMode(complex(o), V[:, n], sector, H, float(r))
            for n, (o, r) in enumerate(zip(w, res))]


def eigendecompose(H: EffectiveHamiltonian, dense_threshold: int = DENSE_THRESHOLD,
                   use_symmetry: bool = True) -> list[EigenMode]:
    """Full spectrum with right eigenvectors, sorted by ascending Gamma."""
    modes = []
    for sector in sectors_for(H, use_symmetry):
        if sector.dim > dense_threshold:
            raise ValueError(f"sector dimension {sector.dim} exceeds dense threshold {dense_threshold}")
        Hs = sector.project(H.matrix)
        w, V = _dense_sector(Hs)
        modes.extend(_make_modes(H, sector, Hs, w, V))
    order = _order([m.omega for m in modes])
    return [modes[i] for i in order]


def _arnoldi_sector(Hs, count, ncv=None, tol=1e-12, maxiter=20000):
    """Eigenpairs with the largest Im(omega), i.e. the smallest decay rates.

    ARPACK occasionally reports convergence on spurious Ritz pairs when the
    subspace is too small for this (interior-looking) target, so residuals
    are checked here and the subspace is enlarged until they pass.
    """
    n = Hs.shape[0]
    k = min(max(count, 4), n - 2)
    ncv = min(n, ncv or max(80, 4 * k + 20))
    last = None
    for attempt in range(4):
        try:
            w, V = spla.eigs(Hs, k=k, which="LI", ncv=ncv, tol=tol, maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            last = exc
        else:
            V /= np.linalg.norm(V, axis=0)[None, :]
            res = _residuals(Hs, w, V)
            if np.all(res <= RESIDUAL_TOL * max(1.0, np.abs(w).max())):
                return w, V
            last = ConvergenceError("spurious Ritz pairs", residuals=res)
        if ncv >= n:
            break
        ncv = min(n, 2 * ncv)
        log.info("ARPACK result rejected, retrying with ncv=%d", ncv)
    raise ConvergenceError(
        "iterative solver did not converge; use the dense path or a larger subspace",
        residuals=getattr(last, "residuals", None)) from last


def most_subradiant(H: EffectiveHamiltonian, count: int = 1,
                    dense_threshold: int = DENSE_THRESHOLD, use_symmetry: bool = True,
                    ncv: int | None = None) -> list[EigenMode]:
    """The ``count`` modes with smallest Gamma.

    Sectors up to ``dense_threshold`` are diagonalized densely; larger ones
    use implicitly restarted Arnoldi on the eigenvalues of largest imaginary
    part (subradiant modes sit at the top edge of the spectrum).
    """
    modes = []
    for sector in sectors_for(H, use_symmetry):
        if sector.dim == 0:
            continue
        Hs = sector.project(H.matrix)
        if sector.dim <= dense_threshold or sector.dim <= count + 3:
            w = sla.eigvals(Hs.toarray(), check_finite=False)
            keep = _order(w)[:count]
            # eigenvectors only for the kept modes, via one shifted solve each
            w_keep, V = _vectors_by_inverse_iteration(Hs, w[keep])
        else:
            w_keep, V = _arnoldi_sector(Hs, count, ncv=ncv)
        sector_modes = _make_modes(H, sector, Hs, w_keep, V)
        modes.extend(sector_modes)
    order = _order([m.omega for m in modes])
    out = [modes[i] for i in order[:count]]
    if out and out[0].gamma < GAMMA_FLOOR:
        log.warning("negative decay rate %.3e found; spectrum is not dissipative", out[0].gamma)
    return out


def _vectors_by_inverse_iteration(Hs, w, iters=3):
    """Right eigenvectors for known eigenvalues of a small dense matrix."""
    A = Hs.toarray() if sp.issparse(Hs) else np.asarray(Hs)
    n = A.shape[0]
    V = np.empty((n, len(w)), dtype=complex)
    w_out = np.empty(len(w), dtype=complex)
    rng = np.random.default_rng(12345)
    scale = max(1.0, np.abs(A).max())
    for c, lam in enumerate(w):
        shift = lam + 1e-13 * scale
        lu = sla.lu_factor(A - shift * np.eye(n), check_finite=False)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for _ in range(iters):
            x = sla.lu_solve(lu, x, check_finite=False)
            x /= np.linalg.norm(x)
        Ax = A @ x
        w_out[c] = np.vdot(x, Ax)
        V[:, c] = x
    return w_out, V


def level_totals_in_sector(sector: Sector, block, levels=None) -> np.ndarray:
    """Matrix M with M[l, c] = sum over states b in excited level l of V[b, c]^2.

    Every block state lies in exactly one orbit, so the population of level l
    summed over atoms for a sector vector w is M[l] @ |w|^2.
    """
    n_exc = block.scheme.n_excited
    levels = range(n_exc) if levels is None else levels
    V2 = sector.basis.multiply(sector.basis).tocsc()
    ind = sp.csr_matrix((np.ones(block.dim), (block.level, np.arange(block.dim))),
                        shape=(n_exc, block.dim))
    return np.asarray((ind @ V2).todense())[list(levels)]


def filtered_symmetric_search(H: EffectiveHamiltonian, dense_threshold: int | None = None,
                              use_symmetry: bool = True) -> EigenMode | None:
    """Smallest-Gamma mode with sum_j <sigma33> > sum_j <sigma22>, or None.

    Needs every eigenvector, so all sectors go through the dense solver; they
    are processed one at a time and only the best candidate is retained.
    """
    if H.block.two_fz != 0:
        raise ValueError("the symmetric-state filter is defined for the F_z = 0 block")
    best = None
    for sector in sectors_for(H, use_symmetry):
        if dense_threshold is not None and sector.dim > dense_threshold:
            raise ValueError(f"sector dimension {sector.dim} exceeds dense threshold")
        Hs = sector.project(H.matrix)
        w, V = _dense_sector(Hs)
        M = level_totals_in_sector(sector, H.block, levels=(0, 1))
        pops = M @ (np.abs(V) ** 2)
        ok = np.nonzero(pops[1] > pops[0])[0]
        log.info("sector %s: %d of %d modes pass the filter", sector.label, ok.size, w.size)
        if ok.size == 0:
            continue
        cand = ok[_order(w[ok])[0]]
        mode = _make_modes(H, sector, Hs, w[[cand]], V[:, [cand]])[0]
        if best is None or _order([mode.omega, best.omega])[0] == 0:
            best = mode
        del V
    return best
