"""Single-excitation many-body basis organised by total angular momentum F_z.

A basis state is one excited atom ``j`` in excited sublevel ``level`` (index
into ``LevelScheme.excited_labels``) plus a ground configuration ``mask``:
bit ``i`` of the mask is 1 when ground atom ``i`` sits in m_g = +1/2 (|1>)
and 0 for m_g = -1/2 (|0>).  Bits are indexed by physical atom position and
the excited atom's own bit is always 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .angular import TOY_ATOM, LevelScheme, twice

MAX_BLOCK_DIM = 5_000_000
_INT64_KEY_MAX_N = 55
_BYTES_PER_STATE = 24


class BlockTooLargeError(MemoryError):
    pass


@dataclass(frozen=True)
class BasisState:
    N: int
    excited_atom: int
    excited_level: int
    ground_config: int
    scheme: LevelScheme = TOY_ATOM

    def __post_init__(self):
        if not 0 <= self.excited_atom < self.N:
            raise ValueError("excited atom out of range")
        if self.ground_config >> self.excited_atom & 1:
            raise ValueError("the excited atom's ground bit must be 0")
        if self.ground_config >> self.N:
            raise ValueError("ground configuration has bits beyond N atoms")

    @property
    def two_fz(self) -> int:
        n_up = bin(self.ground_config).count("1")
        n_down = self.N - 1 - n_up
        return self.scheme.excited_labels[self.excited_level] + n_up - n_down

    def conjugate(self) -> "BasisState":
        """Flip every projection m -> -m (|0>,|1> swap; |2>..|5> reverse)."""
        full = (1 << self.N) - 1
        mask = ~self.ground_config & full & ~(1 << self.excited_atom)
        return BasisState(self.N, self.excited_atom,
                          self.scheme.n_excited - 1 - self.excited_level, mask, self.scheme)


def fz_of(state: BasisState) -> Fraction:
    return Fraction(state.two_fz, 2)


def two_fz_max(N: int, scheme: LevelScheme = TOY_ATOM) -> int:
    return twice(scheme.F_e) + (N - 1) * twice(scheme.F_g)


def fz_max(N: int, scheme: LevelScheme = TOY_ATOM) -> Fraction:
    """F_e + (N - 1) F_g."""
    return Fraction(two_fz_max(N, scheme), 2)


def _check_scheme(scheme):
    if scheme.n_ground != 2:
        raise NotImplementedError("packed ground bits require F_g = 1/2")


def _segment_sizes(N, two_fz, scheme):
    """Number of ground configurations for each (atom, level) segment."""
    sizes = []
    for two_me in scheme.excited_labels:
        twice_up = N - 1 + two_fz - two_me
        if twice_up % 2:
            sizes.append(0)
            continue
        n_up = twice_up // 2
        sizes.append(comb(N - 1, n_up) if 0 <= n_up <= N - 1 else 0)
    return sizes


def block_dimension(N: int, fz, scheme: LevelScheme = TOY_ATOM) -> int:
    _check_scheme(scheme)
    return N * sum(_segment_sizes(N, twice(fz), scheme))


class FzBlock:
    """Ordered basis of the single-excitation sector with fixed F_z.

    States are ordered by (excited_atom, excited_level, ground_config).
    """

    def __init__(self, N: int, fz, scheme: LevelScheme = TOY_ATOM):
        _check_scheme(scheme)
        if N < 1:
            raise ValueError("need at least one atom")
        self.N = N
        self.scheme = scheme
        self.two_fz = twice(fz)
        if abs(self.two_fz) > two_fz_max(N, scheme):
            raise ValueError(f"|F_z| exceeds F_z^max = {fz_max(N, scheme)}")
        sizes = _segment_sizes(N, self.two_fz, scheme)
        dim = N * sum(sizes)
        if dim > MAX_BLOCK_DIM:
            raise BlockTooLargeError(
                f"F_z = {self.fz} block for N = {N} has {dim} states "
                f"(~{dim * _BYTES_PER_STATE / 1e9:.1f} GB for the basis alone; "
                f"limit {MAX_BLOCK_DIM})")
        wide = N > 62
        mask_dtype = object if wide else np.int64
        atoms, levels, masks = [], [], []
        for j in range(N):
            others = [i for i in range(N) if i != j]
            for lev, two_me in enumerate(scheme.excited_labels):
                if not sizes[lev]:
                    continue
                n_up = (N - 1 + self.two_fz - two_me) // 2
                seg = sorted(sum(1 << i for i in c) for c in combinations(others, n_up))
                atoms.append(np.full(len(seg), j, dtype=np.int64))
                levels.append(np.full(len(seg), lev, dtype=np.int64))
                masks.append(np.array(seg, dtype=mask_dtype))
        if atoms:
            self.atom = np.concatenate(atoms)
            self.level = np.concatenate(levels)
            self.mask = np.concatenate(masks)
        else:
            self.atom = np.zeros(0, dtype=np.int64)
            self.level = np.zeros(0, dtype=np.int64)
            self.mask = np.zeros(0, dtype=mask_dtype)
        for arr in (self.atom, self.level, self.mask):
            arr.setflags(write=False)
        self._dict = None
        self._keys = None
        if N <= _INT64_KEY_MAX_N:
            self._keys = self._int_keys(self.atom, self.level, self.mask)
            if self._keys.size > 1 and np.any(np.diff(self._keys) <= 0):
                raise AssertionError("block keys not strictly increasing")

    @property
    def fz(self) -> Fraction:
        return Fraction(self.two_fz, 2)

    @property
    def dim(self) -> int:
        return int(self.atom.size)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"FzBlock(N={self.N}, F_z={self.fz}, dim={self.dim})"

    def _int_keys(self, atom, level, mask):
        seg = atom * self.scheme.n_excited + level
        return (seg.astype(np.int64) << self.N) | mask.astype(np.int64)

    def state(self, index: int) -> BasisState:
        return BasisState(self.N, int(self.atom[index]), int(self.level[index]),
                          int(self.mask[index]), self.scheme)

    def states(self):
        return [self.state(i) for i in range(self.dim)]

    def index_of(self, state: BasisState) -> int:
        idx = self.lookup(np.array([state.excited_atom]), np.array([state.excited_level]),
                          np.array([state.ground_config], dtype=self.mask.dtype))
        if idx[0] < 0:
            raise KeyError(f"{state} not in {self!r}")
        return int(idx[0])

    def lookup(self, atom, level, mask) -> np.ndarray:
        """Vectorised reverse lookup; -1 for states outside the block."""
        if self._keys is not None:
            keys = self._int_keys(np.asarray(atom), np.asarray(level),
                                  np.asarray(mask, dtype=np.int64))
            pos = np.searchsorted(self._keys, keys)
            pos = np.minimum(pos, max(self.dim - 1, 0))
            ok = self._keys[pos] == keys if self.dim else np.zeros(keys.shape, bool)
            return np.where(ok, pos, -1)
        if self._dict is None:
            self._dict = {(int(a), int(lv), int(m)): i
                          for i, (a, lv, m) in enumerate(zip(self.atom, self.level, self.mask))}
        return np.array([self._dict.get((int(a), int(lv), int(m)), -1)
                         for a, lv, m in zip(atom, level, mask)], dtype=np.int64)

    def ground_bits(self) -> np.ndarray:
        """(dim, N) array of 0/1 ground occupations; the excited atom reads 0."""
        if self.mask.dtype == object:
            return np.array([[(int(m) >> i) & 1 for i in range(self.N)] for m in self.mask],
                            dtype=np.int8).reshape(self.dim, self.N)
        return ((self.mask[:, None] >> np.arange(self.N)) & 1).astype(np.int8)

    def level_occupation(self) -> np.ndarray:
        """(dim, N) array of global level numbers 0..5 for every atom."""
        occ = self.ground_bits().astype(np.int64)
        occ[np.arange(self.dim), self.atom] = self.scheme.n_ground + self.level
        return occ


def enumerate_block(N: int, fz, scheme: LevelScheme = TOY_ATOM) -> FzBlock:
    return FzBlock(N, fz, scheme)


def all_two_fz(N: int, scheme: LevelScheme = TOY_ATOM) -> list[int]:
    top = two_fz_max(N, scheme)
    return list(range(-top, top + 1, 2))


def dicke_vector(n_atoms: int, alpha) -> np.ndarray:
    """Normalized Dicke state of ``n_atoms`` ground atoms with total projection alpha.

    Returned as a dense vector indexed by ground mask (length 2**n_atoms).
    """
    two_alpha = twice(alpha)
    twice_zeros = n_atoms - two_alpha
    if twice_zeros % 2:
        raise ValueError(f"alpha = {alpha} incompatible with {n_atoms} spin-1/2 atoms")
    n0 = twice_zeros // 2
    if not 0 <= n0 <= n_atoms:
        raise ValueError(f"|alpha| exceeds {n_atoms}/2")
    if n_atoms > 24:
        raise BlockTooLargeError("dense Dicke vector limited to 24 atoms")
    n1 = n_atoms - n0
    masks = np.arange(1 << n_atoms)
    pop = np.array([bin(m).count("1") for m in range(1 << n_atoms)])
    vec = np.where(pop == n1, 1.0, 0.0)
    return vec / np.sqrt(comb(n_atoms, n0))
