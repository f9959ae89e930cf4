"""Expectation values in eigenmodes: populations, correlations, emitted intensity, fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .angular import POLARIZATIONS
from .greens import K0, SPHERICAL_BASIS, greens_tensor
from .hamiltonian import _clebsch_array

N_LEVELS = 6
ATOM_CLEARANCE = 1e-6


def _probabilities_and_block(mode):
    if hasattr(mode, "probabilities"):
        return mode.probabilities, mode.block
    amps = np.asarray(mode.amplitudes)
    return np.abs(amps) ** 2 / np.vdot(amps, amps).real, mode.block


def populations(mode) -> np.ndarray:
    """(N, n_levels) array of <sigma^j_mm>; levels numbered ground first (|0>, |1>, |2>, ...)."""
    p, block = _probabilities_and_block(mode)
    occ = block.level_occupation()
    n_levels = block.scheme.n_ground + block.scheme.n_excited
    out = np.zeros((block.N, n_levels))
    for lev in range(n_levels):
        out[:, lev] = p @ (occ == lev)
    return out


def population(mode, atom: int, level: int) -> float:
    return float(populations(mode)[atom, level])


def correlation_matrix(mode, m: int, n: int) -> np.ndarray:
    """C_mn(i, j) = <s^i_mm s^j_nn> - <s^i_mm><s^j_nn> for all atom pairs.

    The diagonal is reported as NaN since the connected correlation is only
    defined for distinct atoms.
    """
    p, block = _probabilities_and_block(mode)
    occ = block.level_occupation()
    Xm = (occ == m).astype(float)
    Xn = (occ == n).astype(float)
    joint = Xm.T @ (Xn * p[:, None])
    C = joint - np.outer(p @ Xm, p @ Xn)
    np.fill_diagonal(C, np.nan)
    return C


def connected_correlation(mode, m: int, n: int, i: int, j: int) -> float:
    if i == j:
        raise ValueError("connected correlations need distinct atoms")
    return float(correlation_matrix(mode, m, n)[i, j])


def lowered_vectors(mode) -> sp.csr_matrix:
    """Columns are Sigma_{jq}|psi> for (j, q) in atom-major order over ground configs."""
    block = mode.block
    amps = np.asarray(mode.amplitudes)
    scheme = block.scheme
    two_me = np.array(scheme.excited_labels)[block.level]
    rows, cols, vals = [], [], []
    for qi, q in enumerate(POLARIZATIONS):
        two_mg = two_me + 2 * q
        c = _clebsch_array(scheme, two_mg, q)
        live = np.nonzero(c)[0]
        up = (two_mg[live] == scheme.ground_labels[1]).astype(np.int64)
        if block.mask.dtype == object:
            rows.append(block.mask[live] | (up.astype(object) << block.atom[live].astype(object)))
        else:
            rows.append(block.mask[live] | (up << block.atom[live]))
        cols.append(block.atom[live] * 3 + qi)
        vals.append(c[live] * amps[live])
    rows = np.concatenate(rows)
    keys, r_idx = np.unique(rows, return_inverse=True)
    return sp.csr_matrix((np.concatenate(vals), (r_idx, np.concatenate(cols))),
                         shape=(keys.size, 3 * block.N))


def two_point_matrix(mode) -> np.ndarray:
    """rho[(j'q'), (jq)] = <psi| Sigma^dag_{j'q'} Sigma_{jq} |psi>, a PSD Gram matrix."""
    U = lowered_vectors(mode)
    return np.asarray((U.conj().T @ U).todense())


def _field_columns(points, positions, k0, skip_atom=None):
    """F[p, (j,q), alpha] = (G(r_p - r_j) . conj(e_q))_alpha."""
    n_at = positions.shape[0]
    sep = points[:, None, :] - positions[None, :, :]
    if skip_atom is not None:
        sep[:, skip_atom, :] = 1.0  # placeholder, zeroed below
    G = greens_tensor(sep.reshape(-1, 3), k0).reshape(points.shape[0], n_at, 3, 3)
    if skip_atom is not None:
        G[:, skip_atom] = 0.0
    E = np.stack([np.conj(SPHERICAL_BASIS[q]) for q in POLARIZATIONS], axis=-1)  # (3, 3q)
    F = np.einsum("pjab,bq->pjqa", G, E)
    return F.reshape(points.shape[0], 3 * n_at, 3)


def _quadratic_form(F, rho):
    # sum_{a,b,i} conj(F[p,a,i]) rho[a,b] F[p,b,i]; rows of rho with zero
    # diagonal vanish identically (PSD), so they are dropped first
    live = np.nonzero(np.diag(rho).real > 0)[0]
    F = F[:, live]
    return np.einsum("pai,pai->p", F.conj(), np.matmul(rho[np.ix_(live, live)], F)).real


def _chain_points(geometry):
    z = np.asarray(geometry.positions)
    return np.stack([np.zeros_like(z), np.zeros_like(z), z], axis=1)


@dataclass(frozen=True)
class IntensityMap:
    y: np.ndarray
    z: np.ndarray
    values: np.ndarray  # shape (len(y), len(z)), unnormalized

    @property
    def normalized(self) -> np.ndarray:
        peak = self.values.max() if self.values.size else 0.0
        return self.values / peak if peak > 0 else self.values

    def triples(self):
        """(y, z, I) rows in row-major order over (y, z)."""
        Y, Z = np.meshgrid(self.y, self.z, indexing="ij")
        return np.stack([Y.ravel(), Z.ravel(), self.values.ravel()], axis=1)


def field_intensity_at(mode, points, k0: float = K0, rho=None, chunk: int = 4096) -> np.ndarray:
    """<E^- . E^+> at arbitrary 3D points in units of (mu0 w0^2 |d|)^2."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    atoms = _chain_points(mode.H.geometry)
    if points.size:
        gap = np.linalg.norm(points[:, None, :] - atoms[None, :, :], axis=-1).min()
        if gap < ATOM_CLEARANCE:
            raise ValueError("grid point coincides with an atom")
    rho = two_point_matrix(mode) if rho is None else rho
    out = np.empty(points.shape[0])
    for s in range(0, points.shape[0], chunk):
        F = _field_columns(points[s:s + chunk], atoms, k0)
        out[s:s + chunk] = _quadratic_form(F, rho)
    # rho is PSD, so negatives are rounding only
    return np.clip(out, 0.0, None)


def field_intensity(mode, y, z, k0: float = K0) -> IntensityMap:
    """Intensity on the x = 0 plane over the grid y x z (lambda_0 units)."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    Y, Z = np.meshgrid(y, z, indexing="ij")
    pts = np.stack([np.zeros(Y.size), Y.ravel(), Z.ravel()], axis=1)
    vals = field_intensity_at(mode, pts, k0) if pts.size else np.zeros(0)
    return IntensityMap(y, z, vals.reshape(y.size, z.size))


def default_grid(geometry, ny: int = 200, nz: int = 400):
    d = geometry.d
    n = geometry.N
    y = np.linspace(-2.0, 2.0, ny)
    z = np.linspace(-2 * d, (n + 1) * d, nz)
    return y, z


def intensity_at_atoms(mode, k0: float = K0) -> np.ndarray:
    """Field intensity at each atom produced by all the other atoms."""
    atoms = _chain_points(mode.H.geometry)
    rho = two_point_matrix(mode)
    out = np.empty(atoms.shape[0])
    for j in range(atoms.shape[0]):
        F = _field_columns(atoms[[j]], atoms, k0, skip_atom=j)
        out[j] = _quadratic_form(F, rho)[0]
    return out


def overlap_fidelity(mode, reference) -> float:
    """|<mode|reference>|^2 with both normalized; they must share a block."""
    ref_block = getattr(reference, "block", None)
    ref = np.asarray(getattr(reference, "amplitudes", reference), dtype=complex)
    a = np.asarray(mode.amplitudes, dtype=complex)
    if ref_block is not None and ref_block is not mode.block:
        b1, b2 = ref_block, mode.block
        if (b1.N, b1.two_fz, b1.dim) != (b2.N, b2.two_fz, b2.dim):
            raise ValueError("reference lives in a different block")
    if ref.shape != a.shape:
        raise ValueError("reference vector does not match the mode's block dimension")
    return float(abs(np.vdot(a, ref)) ** 2 / (np.vdot(a, a).real * np.vdot(ref, ref).real))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    r2: float
    n_points: int


def power_law_fit(points, discard: int = 2, min_points: int = 4) -> PowerLawFit:
    """Least-squares fit of value = prefactor * N**exponent in log-log space.

    The ``discard`` smallest N are dropped as finite-size transients, but
    never so many that fewer than ``min_points`` remain.
    """
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(pts)}")
    if any(v <= 0 or n <= 0 for n, v in pts):
        raise ValueError("power-law fit needs positive N and values")
    drop = max(0, min(discard, len(pts) - min_points))
    pts = pts[drop:]
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, icpt])
    ss_tot = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - (resid ** 2).sum() / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(np.exp(icpt)), float(r2), len(pts))
