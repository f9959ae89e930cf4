"""Entangled symmetric spin-wave state of the F_z = 0 block and its toy-model checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import POLARIZATIONS, TOY_ATOM, clebsch_twice
from .hamiltonian import EffectiveHamiltonian, apply_spin_wave, toy_wavevectors
from .hilbert import FzBlock

GRID_TOL = 1e-9


def clebsch_ratio(scheme=TOY_ATOM) -> float:
    """beta = C_{-1/2,1} / C_{1/2,1}, signed, from the same 3j routine as everything else."""
    lo, hi = scheme.ground_labels
    return clebsch_twice(scheme, lo, 1) / clebsch_twice(scheme, hi, 1)


def level_weights(scheme=TOY_ATOM) -> np.ndarray:
    """Relative weight of each excited sublevel: 1 for stretched, beta for inner ones."""
    beta = clebsch_ratio(scheme)
    top = max(scheme.excited_labels)
    return np.array([1.0 if abs(m) == top else beta for m in scheme.excited_labels])


def _grid_index(N, k_tilde, d):
    ks = toy_wavevectors(N, d)
    # pi/d and -pi/d are the same point of the zone
    period = 2 * np.pi / d
    diff = np.abs((ks - k_tilde + np.pi / d) % period - np.pi / d)
    n = int(np.argmin(diff))
    if diff[n] > GRID_TOL * period:
        raise ValueError(f"k_tilde = {k_tilde} is not on the grid 2 pi n / (N d)")
    return n


@dataclass(frozen=True, eq=False)
class SymmetricAnsatz:
    N: int
    k_tilde: float
    d: float
    beta: float
    block: FzBlock
    amplitudes: np.ndarray

    @property
    def grid_index(self) -> int:
        return _grid_index(self.N, self.k_tilde, self.d)


def symmetric_state(N: int, k_tilde: float, d: float, block: FzBlock | None = None) -> SymmetricAnsatz:
    """sum_j e^{i k z_j} (|2_j>D_{3/2} + beta|3_j>D_{1/2} + beta|4_j>D_{-1/2} + |5_j>D_{-3/2}).

    Each Dicke factor enters with unit amplitude per ground configuration,
    which is what makes the state annihilated by every off-resonant spin wave;
    the sum is normalized once at the end.
    """
    if N % 2:
        raise ValueError("the symmetric state needs an even number of atoms")
    _grid_index(N, k_tilde, d)
    block = block if block is not None else FzBlock(N, 0)
    if block.N != N or block.two_fz != 0:
        raise ValueError("symmetric state lives in the F_z = 0 block of the same chain")
    w = level_weights(block.scheme)
    z = np.arange(N) * d
    amps = np.exp(1j * k_tilde * z[block.atom]) * w[block.level]
    amps = amps / np.linalg.norm(amps)
    amps.setflags(write=False)
    return SymmetricAnsatz(N, float(k_tilde), float(d), clebsch_ratio(block.scheme), block, amps)


def spin_wave_residuals(ansatz: SymmetricAnsatz) -> dict:
    """||S_{k',q} psi|| for every grid k' and polarization q."""
    out = {}
    for n, k in enumerate(toy_wavevectors(ansatz.N, ansatz.d)):
        for q in POLARIZATIONS:
            v = apply_spin_wave(ansatz.block, k, q, ansatz.amplitudes, d=ansatz.d)
            out[(n, q)] = float(np.linalg.norm(v))
    return out


def max_off_resonant_residual(ansatz: SymmetricAnsatz) -> float:
    n0 = ansatz.grid_index
    return max(v for (n, _), v in spin_wave_residuals(ansatz).items() if n != n0)


def toy_eigencheck(ansatz: SymmetricAnsatz, H: EffectiveHamiltonian):
    """(||H psi - lambda psi||, lambda) with lambda the Rayleigh quotient."""
    if H.block.two_fz != 0 or H.block.dim != ansatz.block.dim:
        raise ValueError("Hamiltonian and ansatz live in different blocks")
    psi = ansatz.amplitudes
    Hpsi = H.matrix @ psi
    lam = complex(np.vdot(psi, Hpsi))
    return float(np.linalg.norm(Hpsi - lam * psi)), lam


def expected_eigenvalue(ansatz: SymmetricAnsatz, engineering: bool = True) -> float:
    """C^2_{-1/2,1} J_k (with J_k the common value of the two bands when they coincide)."""
    from .bloch import dispersion
    scheme = ansatz.block.scheme
    J, _ = dispersion(abs(ansatz.k_tilde), 1, ansatz.d, engineering, scheme)
    return clebsch_twice(scheme, scheme.ground_labels[0], 1) ** 2 * float(J)
