import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subradiance.greens import K0, SPHERICAL_BASIS, ChainGeometry, greens_tensor
from subradiance.hamiltonian import assemble
from subradiance.hilbert import FzBlock, fz_max
from subradiance.observables import (connected_correlation, correlation_matrix, default_grid,
                                     field_intensity, field_intensity_at, intensity_at_atoms,
                                     overlap_fidelity, populations, power_law_fit, two_point_matrix)
from subradiance.spectra import eigendecompose, most_subradiant


class FakeMode:
    """Arbitrary state in a block, bypassing the eigensolver."""

    def __init__(self, H, amps):
        self.H = H
        self.block = H.block
        self.amplitudes = amps / np.linalg.norm(amps)


@pytest.fixture(scope="module")
def stretched50():
    H = assemble(ChainGeometry.ideal(50, 0.3), FzBlock(50, -fz_max(50)))
    return H, most_subradiant(H)[0]


def test_populations_sum_and_block_content(stretched50):
    _, m = stretched50
    p = populations(m)
    assert p.sum(axis=1) == pytest.approx(np.ones(50), abs=1e-12)
    assert p[:, 2:].sum() == pytest.approx(1.0, abs=1e-10)
    assert np.abs(p[:, [1, 3, 4, 5]]).max() == 0.0


def test_defect_population_near_edge():
    N = 30
    H = assemble(ChainGeometry.ideal(N, 0.3), FzBlock(N, -fz_max(N) + 1))
    m = most_subradiant(H)[0]
    p1 = populations(m)[:, 1]
    top = int(np.argmax(p1))
    assert min(top, N - 1 - top) == 2
    # |3> population follows |1> population times the field seen by each atom
    I = intensity_at_atoms(m)
    p = populations(m)
    r = np.corrcoef(p[:, 3], p[:, 1] * I)[0, 1]
    assert r > 0.9


def test_product_state_has_no_connected_correlations():
    H = assemble(ChainGeometry.ideal(4, 0.3), FzBlock(4, -fz_max(4)))
    amps = np.zeros(4)
    amps[1] = 1
    C = correlation_matrix(FakeMode(H, amps), 0, 2)
    off = ~np.eye(4, dtype=bool)
    assert np.abs(C[off]).max() < 1e-15
    with pytest.raises(ValueError):
        connected_correlation(FakeMode(H, amps), 0, 0, 1, 1)


def test_correlation_transpose_symmetry():
    H = assemble(ChainGeometry.ideal(6, 0.3), FzBlock(6, 0))
    m = eigendecompose(H)[5]
    for a, b in ((0, 1), (0, 3), (2, 4)):
        Cab, Cba = correlation_matrix(m, a, b), correlation_matrix(m, b, a)
        off = ~np.eye(6, dtype=bool)
        assert np.allclose(Cab[off], Cba.T[off], atol=1e-14)


def test_single_atom_dipole_pattern():
    H = assemble(ChainGeometry.ideal(1, 0.3), FzBlock(1, -fz_max(1)))
    m = eigendecompose(H)[0]
    pts = np.array([[0.3, 0.2, 0.5], [0, 1.1, -0.4], [0.7, 0, 0]])
    I = field_intensity_at(m, pts)
    # atom in |2> (m_e = -3/2) lowers only with q = +1, C^2 = 1/4
    ref = [0.25 * np.linalg.norm(greens_tensor(p) @ np.conj(SPHERICAL_BASIS[1])) ** 2 for p in pts]
    assert np.allclose(I, ref, rtol=1e-12)


def test_intensity_nonnegative_and_rejects_atoms():
    H = assemble(ChainGeometry.ideal(6, 0.3), FzBlock(6, 0))
    m = eigendecompose(H)[0]
    y, z = np.linspace(-1, 1, 11), np.linspace(-0.5, 2, 17)
    imap = field_intensity(m, y, z)
    assert imap.values.shape == (11, 17) and np.all(imap.values >= 0)
    with pytest.raises(ValueError):
        field_intensity_at(m, np.array([[0, 0, 0.3 + 1e-8]]))
    rho = two_point_matrix(m)
    assert np.all(np.linalg.eigvalsh(rho) > -1e-14)


def test_intensity_symmetric_for_reflection_symmetric_mode(stretched50):
    H, m = stretched50
    L = 49 * 0.3
    y = np.array([0.4, 1.0])
    z = np.linspace(-0.2, L + 0.2, 31)
    imap = field_intensity(m, y, z)
    assert np.allclose(imap.values, imap.values[:, ::-1], rtol=1e-8)


def test_waveguide_like_emission(stretched50):
    H, m = stretched50
    y, z = default_grid(H.geometry, 41, 120)
    imap = field_intensity(m, y, z)
    L = 49 * 0.3
    near = np.abs(imap.y) <= 0.1
    far = np.abs(imap.y) >= 1.0
    # evanescent away from the chain
    assert imap.values[far].max() < 1e-4 * imap.values[near].max()
    # away from the near field, emission leaves through the ends
    sub = imap.values[far]
    zpk = imap.z[np.unravel_index(sub.argmax(), sub.shape)[1]]
    assert zpk <= 2 * 0.3 or zpk >= L - 2 * 0.3


def test_overlap_fidelity():
    H = assemble(ChainGeometry.ideal(4, 0.3), FzBlock(4, 0))
    m = eigendecompose(H)[0]
    assert overlap_fidelity(m, m) == pytest.approx(1.0, abs=1e-12)
    assert overlap_fidelity(m, 2j * m.amplitudes) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        overlap_fidelity(m, np.ones(3))


def test_power_law_fit_exact():
    N = np.arange(10, 101, 10)
    f = power_law_fit(list(zip(N, N ** -3.0)))
    assert abs(f.exponent + 3) < 1e-6 and f.r2 == pytest.approx(1)
    f = power_law_fit(list(zip(N, 5 * N ** -2.0)), discard=0)
    assert f.exponent == pytest.approx(-2) and f.prefactor == pytest.approx(5)
    with pytest.raises(ValueError):
        power_law_fit([(1, 1), (2, 0), (3, 1), (4, 1)])
    with pytest.raises(ValueError):
        power_law_fit([(1, 1), (2, 1), (3, 1)])
    # discard never leaves fewer than four points
    assert power_law_fit(list(zip(N[:5], N[:5] ** -1.0))).n_points == 4


@settings(max_examples=40)
@given(st.floats(-4, 4), st.floats(0.1, 10))
def test_power_law_fit_recovers_exponent(a, c):
    N = np.array([8, 12, 20, 33, 50, 71])
    f = power_law_fit(list(zip(N, c * N ** a)))
    assert f.exponent == pytest.approx(a, abs=1e-9)
    assert f.prefactor == pytest.approx(c, rel=1e-9)
