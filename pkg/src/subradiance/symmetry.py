"""Reflection and m -> -m symmetry sectors of a block.

For an on-axis chain whose positions are mirror symmetric the Hamiltonian
commutes with the reflection j -> N-1-j.  In the F_z = 0 block it also
commutes with flipping every projection (the same map that relates the
+F_z and -F_z blocks).  Splitting a block into the joint eigenspaces of these
operators shrinks the matrices the eigensolvers have to handle by up to 4x.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hilbert import FzBlock


def _reverse_bits(mask, N):
    out = np.zeros_like(mask)
    for i in range(N):
        out |= ((mask >> i) & 1) << (N - 1 - i)
    return out


def reflection_map(block: FzBlock) -> np.ndarray:
    """Index permutation of the reflection j -> N-1-j."""
    N = block.N
    mask = np.asarray(block.mask)
    idx = block.lookup(N - 1 - block.atom, block.level, _reverse_bits(mask, N))
    if np.any(idx < 0):
        raise AssertionError("reflection left the block")
    return idx


def flip_map(block: FzBlock) -> np.ndarray:
    """Index permutation of m -> -m on every atom (F_z = 0 blocks only)."""
    if block.two_fz != 0:
        raise ValueError("projection flip maps F_z to -F_z; only F_z = 0 is invariant")
    N = block.N
    full = (1 << N) - 1
    mask = np.asarray(block.mask)
    new_mask = (~mask & full) & ~(np.ones_like(mask) << block.atom)
    idx = block.lookup(block.atom, block.scheme.n_excited - 1 - block.level, new_mask)
    if np.any(idx < 0):
        raise AssertionError("flip left the block")
    return idx


@dataclass(frozen=True)
class Sector:
    """Joint eigenspace: ``basis`` has orthonormal real columns in block coordinates."""

    label: tuple
    basis: sp.csc_matrix

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, H: sp.spmatrix) -> sp.csr_matrix:
        return (self.basis.T @ H @ self.basis).tocsr()

    def lift(self, v: np.ndarray) -> np.ndarray:
        return self.basis @ v


def _sectors_from_generators(dim, generators, names):
    """Build character-labelled orbit bases for commuting involutions."""
    n = len(generators)
    # group elements as products of subsets of generators
    elements = []
    for bits in range(1 << n):
        perm = np.arange(dim)
        for g in range(n):
            if bits >> g & 1:
                perm = generators[g][perm]
        elements.append((bits, perm))
    rep = np.min(np.stack([p for _, p in elements]), axis=0)
    reps = np.nonzero(rep == np.arange(dim))[0]
    sectors = []
    for chars in range(1 << n):
        rows, cols, vals = [], [], []
        acc = {}
        for bits, perm in elements:
            sign = -1.0 if bin(bits & chars).count("1") % 2 else 1.0
            # coefficient of state perm[r] in the vector built from rep r
            acc.setdefault("r", []).append(perm[reps])
            acc.setdefault("s", []).append(np.full(reps.size, sign))
        img = np.stack(acc["r"])
        sgn = np.stack(acc["s"])
        col = np.broadcast_to(np.arange(reps.size), img.shape)
        M = sp.coo_matrix((sgn.ravel(), (img.ravel(), col.ravel())), shape=(dim, reps.size)).tocsc()
        M.sum_duplicates()
        M.eliminate_zeros()
        norms = np.sqrt(np.asarray(M.multiply(M).sum(axis=0))).ravel()
        keep = norms > 0
        M = M[:, np.nonzero(keep)[0]] @ sp.diags(1.0 / norms[keep])
        label = tuple((name, -1 if chars >> g & 1 else 1) for g, name in enumerate(names))
        if M.shape[1]:
            sectors.append(Sector(label, sp.csc_matrix(M)))
    if sum(s.dim for s in sectors) != dim:
        raise AssertionError("symmetry sectors do not span the block")
    return sectors


def symmetry_sectors(block: FzBlock, reflection: bool = True, flip: bool | None = None) -> list[Sector]:
    """Sectors of ``block`` under the requested symmetries (flip defaults to F_z == 0)."""
    if flip is None:
        flip = block.two_fz == 0
    gens, names = [], []
    if reflection and block.N > 1:
        gens.append(reflection_map(block))
        names.append("R")
    if flip:
        gens.append(flip_map(block))
        names.append("P")
    if not gens or block.dim == 0:
        return [Sector((), sp.identity(block.dim, format="csc"))]
    return _sectors_from_generators(block.dim, gens, names)
