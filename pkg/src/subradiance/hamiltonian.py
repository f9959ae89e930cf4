"""Effective non-Hermitian Hamiltonian of an on-axis chain inside one F_z block.

Every Hamiltonian here has the form

    H = sum_{i,j,q} K_q[i, j] Sigma^dag_{iq} Sigma_{jq}

with K_q the complex coupling J - i Gamma/2 between atoms, so the physical
chain and the periodic spin-wave toy model share one assembly routine and
differ only in how K_q is built.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .angular import POLARIZATIONS, clebsch_twice
from .bloch import dispersion, engineering_for
from .greens import K0, ChainGeometry, DispersionEngineering, chain_couplings
from .hilbert import FzBlock

log = logging.getLogger(__name__)

MAX_DENSE_GROUND_ATOMS = 24


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: sp.csr_matrix
    block: FzBlock
    geometry: ChainGeometry
    engineering: DispersionEngineering | None = None
    kind: str = "chain"
    realization: int | None = None
    couplings: dict = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.block.dim

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def matvec(self, v):
        return self.matrix @ v

    def dump_coo(self, path) -> None:
        """Write ``row col re im`` lines (debug aid for external cross-checks)."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            fh.write(f"# dim {self.dim} nnz {coo.nnz} kind {self.kind} d {self.geometry.d}\n")
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")


def _clebsch_array(scheme, two_mg, q):
    """C_{m_g,q} elementwise; zero where m_g is not a ground sublevel."""
    out = np.zeros(two_mg.shape)
    for g in scheme.ground_labels:
        out[two_mg == g] = clebsch_twice(scheme, g, q)
    return out


def assemble_from_couplings(block: FzBlock, K: dict) -> sp.csr_matrix:
    """Sparse matrix of sum_{ijq} K_q[i,j] Sigma^dag_iq Sigma_jq in ``block``.

    Column = source state, row = target state.  Transitions whose target is
    not in the block raise, which would signal broken F_z conservation.
    """
    scheme = block.scheme
    N, dim = block.N, block.dim
    exc = np.array(scheme.excited_labels)
    two_me = exc[block.level] if dim else np.zeros(0, dtype=np.int64)
    atom, mask = block.atom, block.mask
    src = np.arange(dim)
    diag = np.zeros(dim, dtype=complex)
    rows, cols, vals = [], [], []
    level_of = {m: n for n, m in enumerate(scheme.excited_labels)}
    up_label = scheme.ground_labels[1]
    for q in POLARIZATIONS:
        Kq = np.asarray(K[q])
        two_mg_new = two_me + 2 * q
        c_src = _clebsch_array(scheme, two_mg_new, q)
        alive = c_src != 0
        diag += Kq[atom, atom] * c_src ** 2
        set_j = np.where(two_mg_new == up_label, 1, 0)
        for i in range(N):
            bit_i = (mask >> i) & 1
            two_mg_i = np.where(bit_i == 1, scheme.ground_labels[1], scheme.ground_labels[0])
            c_tgt = _clebsch_array(scheme, two_mg_i.astype(np.int64), q)
            sel = alive & (atom != i) & (c_tgt != 0)
            if not np.any(sel):
                continue
            j = atom[sel]
            m = mask[sel]
            new_mask = (m & ~(1 << i)) | (set_j[sel] << j)
            new_level = np.array([level_of[int(x)] for x in (two_mg_i[sel] - 2 * q)]
                                 ) if m.dtype == object else _levels(two_mg_i[sel] - 2 * q, level_of)
            tgt = block.lookup(np.full(j.shape, i), new_level, new_mask)
            if np.any(tgt < 0):
                raise AssertionError("transition left the F_z block")
            rows.append(tgt)
            cols.append(src[sel])
            vals.append(Kq[i, j] * c_src[sel] * c_tgt[sel])
    rows.append(src)
    cols.append(src)
    vals.append(diag)
    H = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(dim, dim)).tocsr()
    H.sum_duplicates()
    return H


def _levels(two_me, level_of):
    lut = np.full(max(level_of) - min(level_of) + 1, -1)
    for m, n in level_of.items():
        lut[m - min(level_of)] = n
    return lut[two_me - min(level_of)]


def assemble(geometry: ChainGeometry, block: FzBlock, engineering=False,
             k0: float = K0, realization: int | None = None) -> EffectiveHamiltonian:
    """Finite-chain H_eff from free-space Green's tensor couplings.

    ``engineering`` may be False/True (True derives the r^-4 correction from
    the ideal lattice constant) or an explicit DispersionEngineering.
    """
    if geometry.N != block.N:
        raise ValueError(f"geometry has {geometry.N} atoms, block has {block.N}")
    if engineering is True:
        engineering = engineering_for(geometry.d, block.scheme, k0)
    elif engineering is False:
        engineering = None
    K = {q: chain_couplings(geometry, q, engineering, block.scheme, k0) for q in POLARIZATIONS}
    H = assemble_from_couplings(block, K)
    return EffectiveHamiltonian(H, block, geometry, engineering, "chain", realization, K)


def toy_wavevectors(N: int, d: float) -> np.ndarray:
    """k = 2 pi n / (N d), n = 0..N-1, folded into (-pi/d, pi/d]."""
    n = np.arange(N)
    k = 2 * np.pi * n / (N * d)
    return np.where(n > N // 2, k - 2 * np.pi / d, k)


def toy_couplings(N: int, d: float, engineering: bool = False, scheme=None, k0: float = K0) -> dict:
    """Circulant K_q[i,j] = (1/N) sum_k (J_kq - i Gamma_kq / 2) exp(i k d (i - j))."""
    from .angular import TOY_ATOM
    scheme = scheme or TOY_ATOM
    ks = toy_wavevectors(N, d)
    sep = np.arange(N)[:, None] - np.arange(N)[None, :]
    phases = np.exp(1j * ks[None, None, :] * d * sep[:, :, None])
    K = {}
    for q in POLARIZATIONS:
        try:
            J, G = dispersion(ks, q, d, engineering, scheme, k0)
        except ZeroDivisionError as exc:
            raise ValueError(f"toy-model grid for N={N}, d={d} hits the light line") from exc
        K[q] = (phases * (J - 0.5j * G)).sum(axis=-1) / N
    return K


def toy_hamiltonian(N: int, d: float, engineering: bool, block: FzBlock,
                    k0: float = K0) -> EffectiveHamiltonian:
    """Periodic toy model sum_{q,k} (J_kq - i Gamma_kq/2) S^dag_kq S_kq in ``block``."""
    if block.N != N:
        raise ValueError("block and toy model disagree on N")
    K = toy_couplings(N, d, engineering, block.scheme, k0)
    H = assemble_from_couplings(block, K)
    eng = engineering_for(d, block.scheme, k0) if engineering else None
    return EffectiveHamiltonian(H, block, ChainGeometry.ideal(N, d), eng, "toy", None, K)


def _positions(block, d=None, geometry=None):
    if geometry is not None:
        return np.asarray(geometry.positions)
    if d is None:
        raise ValueError("need a lattice constant or a geometry")
    return np.arange(block.N) * d


def apply_spin_wave(block: FzBlock, k: float, q: int, vector, d: float | None = None,
                    geometry: ChainGeometry | None = None) -> np.ndarray:
    """S_{k,q} |psi>: lowers ``vector`` (block basis) to an all-ground state.

    The result is a dense vector indexed by ground mask (length 2**N).
    """
    if block.N > MAX_DENSE_GROUND_ATOMS:
        raise ValueError("dense ground vectors limited to 24 atoms")
    scheme = block.scheme
    z = _positions(block, d, geometry)
    vector = np.asarray(vector, dtype=complex)
    two_mg = np.array(scheme.excited_labels)[block.level] + 2 * q
    c = _clebsch_array(scheme, two_mg, q)
    new_mask = block.mask.astype(np.int64) | (np.where(two_mg == scheme.ground_labels[1], 1, 0) << block.atom)
    amp = vector * c * np.exp(-1j * k * z[block.atom]) / np.sqrt(block.N)
    out = np.zeros(1 << block.N, dtype=complex)
    np.add.at(out, new_mask[c != 0], amp[c != 0])
    return out


def raise_spin_wave(block: FzBlock, k: float, q: int, ground_vector, d: float | None = None,
                    geometry: ChainGeometry | None = None) -> np.ndarray:
    """S^dag_{k,q} applied to a dense ground vector, projected onto ``block``."""
    scheme = block.scheme
    z = _positions(block, d, geometry)
    g = np.asarray(ground_vector, dtype=complex)
    two_mg = np.array(scheme.excited_labels)[block.level] + 2 * q
    c = _clebsch_array(scheme, two_mg, q)
    src_mask = block.mask.astype(np.int64) | (np.where(two_mg == scheme.ground_labels[1], 1, 0) << block.atom)
    return c * np.exp(1j * k * z[block.atom]) * g[src_mask] / np.sqrt(block.N)
