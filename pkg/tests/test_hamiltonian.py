from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg as sla

from subradiance.angular import TOY_ATOM, clebsch_coefficient
from subradiance.bloch import dispersion
from subradiance.greens import ChainGeometry, coupling_rates
from subradiance.hamiltonian import (apply_spin_wave, assemble, raise_spin_wave, toy_hamiltonian,
                                     toy_wavevectors)
from subradiance.hilbert import FzBlock, all_two_fz, fz_max

HALF = Fraction(1, 2)


def test_single_atom_block_diagonal():
    for two_fz in all_two_fz(1):
        H = assemble(ChainGeometry.ideal(1, 0.3), FzBlock(1, Fraction(two_fz, 2)))
        assert np.allclose(H.toarray(), -0.5j * np.eye(H.dim))


def test_two_atom_stretched_hand_oracle():
    d = 0.3
    g = ChainGeometry.ideal(2, d)
    H = assemble(g, FzBlock(2, -fz_max(2))).toarray()
    c = coupling_rates(g, 0, 1, 1, 1)
    off = (c.J - 0.5j * c.Gamma) * clebsch_coefficient(TOY_ATOM, -HALF, 1) ** 2
    oracle = np.array([[-0.5j, off], [off, -0.5j]])
    assert np.allclose(H, oracle, atol=1e-14)
    gam = np.sort(-2 * np.linalg.eigvals(H).imag)
    assert gam.mean() == pytest.approx(1.0)
    assert gam[1] - gam[0] == pytest.approx(2 * abs(c.Gamma) / 4, rel=1e-12)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_diagonal_and_symmetry(N):
    g = ChainGeometry.ideal(N, 0.27)
    for two_fz in all_two_fz(N):
        H = assemble(g, FzBlock(N, Fraction(two_fz, 2))).matrix
        assert np.allclose(H.diagonal(), -0.5j)
        assert abs(H - H.T).max() < 1e-15


def _dense_from_couplings(N, d, fz):
    """Brute-force H over the full 6^N-free single-excitation space, then restricted."""
    g = ChainGeometry.ideal(N, d)
    block = FzBlock(N, fz)
    H = np.zeros((block.dim, block.dim), complex)
    ex = TOY_ATOM.excited_labels
    for a, s in enumerate(block.states()):
        j, me = s.excited_atom, ex[s.excited_level]
        for q in (-1, 0, 1):
            mg_j = me + 2 * q
            if mg_j not in (-1, 1):
                continue
            c_j = clebsch_coefficient(TOY_ATOM, Fraction(mg_j, 2), q)
            mask = s.ground_config | ((1 << j) if mg_j == 1 else 0)
            for i in range(N):
                mg_i = 1 if mask >> i & 1 else -1
                me_i = mg_i - 2 * q
                if me_i not in ex:
                    continue
                c_i = clebsch_coefficient(TOY_ATOM, Fraction(mg_i, 2), q)
                r = coupling_rates(g, i, j, q, q)
                k = r.J - 0.5j * r.Gamma if i != j else -0.5j * r.Gamma
                tgt = block.lookup(np.array([i]), np.array([ex.index(me_i)]),
                                   np.array([mask & ~(1 << i)]))[0]
                H[tgt, a] += k * c_i * c_j
    return H


@pytest.mark.parametrize("N,fz", [(3, 0.5), (4, 0), (4, -1), (5, 1.5)])
def test_assembly_against_state_by_state_build(N, fz):
    H = assemble(ChainGeometry.ideal(N, 0.3), FzBlock(N, fz)).toarray()
    assert np.allclose(H, _dense_from_couplings(N, 0.3, fz), atol=1e-14)


@pytest.mark.parametrize("N", [4, 6])
def test_dissipative_spectrum(N):
    g = ChainGeometry.ideal(N, 0.3)
    for two_fz in all_two_fz(N):
        b = FzBlock(N, Fraction(two_fz, 2))
        for H in (assemble(g, b), toy_hamiltonian(N, 0.31, False, b)):
            w = np.linalg.eigvals(H.toarray())
            assert np.all(-2 * w.imag >= -1e-10)


def test_plus_minus_fz_spectra_equal():
    for N in (4, 7, 10):
        g = ChainGeometry.ideal(N, 0.3)
        for two_fz in all_two_fz(N):
            if two_fz <= 0 or (N == 10 and two_fz < 6):
                continue
            a = np.linalg.eigvals(assemble(g, FzBlock(N, Fraction(two_fz, 2))).toarray())
            b = np.linalg.eigvals(assemble(g, FzBlock(N, Fraction(-two_fz, 2))).toarray())
            key = lambda w: np.lexsort((w.imag, w.real))
            assert np.allclose(a[key(a)], b[key(b)], atol=1e-10)


def test_spin_wave_two_atoms():
    d, k = 0.3, 1.3
    b = FzBlock(2, -fz_max(2))
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    out = apply_spin_wave(b, k, 1, v, d=d)
    c = clebsch_coefficient(TOY_ATOM, -HALF, 1)
    expected = c * (np.exp(-1j * k * 0) + np.exp(-1j * k * d)) / 2
    assert out[0] == pytest.approx(expected)
    assert np.count_nonzero(out) == 1
    assert not np.any(apply_spin_wave(b, k, 1, np.zeros(2), d=d))


def _toy_by_spin_waves(N, d, engineering, block):
    """Dense sum_{k,q} omega_kq S^dag S built by applying the spin-wave operators column by column."""
    H = np.zeros((block.dim, block.dim), complex)
    for k in toy_wavevectors(N, d):
        for q in (-1, 0, 1):
            J, G = dispersion(k, q, d, engineering)
            for col in range(block.dim):
                e = np.zeros(block.dim)
                e[col] = 1
                down = apply_spin_wave(block, k, q, e, d=d)
                H[:, col] += (J - 0.5j * G) * raise_spin_wave(block, k, q, down, d=d)
    return H


@pytest.mark.parametrize("engineering", [False, True])
def test_toy_circulant_matches_spin_wave_build(engineering):
    N, d = 6, 0.3
    b = FzBlock(N, 0)
    H = toy_hamiltonian(N, d, engineering, b).toarray()
    assert np.allclose(H, _toy_by_spin_waves(N, d, engineering, b), atol=1e-12)


def test_toy_grid_on_light_line_rejected():
    with pytest.raises(ValueError, match="light line"):
        toy_hamiltonian(10, 0.3, False, FzBlock(10, 6))


def test_toy_and_chain_converge_in_stretched_block():
    d = 0.3
    diffs = []
    for N in (8, 12, 16, 22):
        b = FzBlock(N, -fz_max(N))
        wc = np.linalg.eigvals(assemble(ChainGeometry.ideal(N, d), b).toarray())
        wt = np.linalg.eigvals(toy_hamiltonian(N, d, False, b).toarray())
        # compare the bandwidth of the coherent part, a bulk quantity
        diffs.append(abs(np.ptp(wc.real) - np.ptp(wt.real)) / np.ptp(wt.real))
    assert diffs[-1] < diffs[0]


def test_block_preserved_and_dump(tmp_path):
    H = assemble(ChainGeometry.ideal(4, 0.3), FzBlock(4, 0), engineering=True)
    path = tmp_path / "h.txt"
    H.dump_coo(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# dim 32")
    assert len(lines) - 1 == H.matrix.nnz
    with pytest.raises(ValueError):
        assemble(ChainGeometry.ideal(3, 0.3), FzBlock(4, 0))
