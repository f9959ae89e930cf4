import numpy as np
import pytest

from subradiance.disorder import (DisorderSpec, decay_floor, disorder_ensemble, jitter,
                                  jitter_positions, lamb_dicke_rate)
from subradiance.greens import ChainGeometry
from subradiance.hamiltonian import assemble
from subradiance.hilbert import FzBlock, fz_max
from subradiance.spectra import most_subradiant


def test_zero_sigma_is_identity():
    g = ChainGeometry.ideal(10, 0.3)
    out = jitter_positions(g, DisorderSpec(0.0, 1, 5), 0)
    assert np.array_equal(out.positions, g.positions)


def test_distribution():
    g = ChainGeometry.ideal(10_000, 1.0)
    z = jitter_positions(g, DisorderSpec(0.05, 1, 11), 0).positions
    delta = z - np.arange(10_000)
    se = 0.05 / np.sqrt(delta.size)
    assert abs(delta.mean()) < 3 * se
    assert abs(delta.std(ddof=1) - 0.05) < 3 * 0.05 / np.sqrt(2 * delta.size)


def test_deterministic_and_order_independent():
    g = ChainGeometry.ideal(20, 0.3)
    spec = DisorderSpec(0.1, 5, 123)
    a = [jitter_positions(g, spec, r).positions for r in (4, 0, 2)]
    b = [jitter_positions(g, spec, r).positions for r in (0, 2, 4)]
    assert np.array_equal(a[0], b[2]) and np.array_equal(a[1], b[0])
    assert not np.array_equal(b[0], b[1])


def test_resampling_keeps_chain_ordered():
    g = ChainGeometry.ideal(30, 0.3)
    spec = DisorderSpec(0.4, 1, 1)
    jc = jitter(g, spec, 0)
    assert np.all(np.diff(jc.geometry.positions) >= 1e-4 * 0.3)
    assert jc.resamples >= 0


def test_spec_validation():
    with pytest.raises(ValueError):
        DisorderSpec(-0.1)
    with pytest.raises(ValueError):
        DisorderSpec(0.1, 0)


def test_clean_ensemble_reproduces_clean_chain():
    N = 12
    clean = most_subradiant(assemble(ChainGeometry.ideal(N, 0.3), FzBlock(N, -fz_max(N))))[0].gamma
    res = disorder_ensemble(N, 0.3, -fz_max(N), DisorderSpec(0.0, 3, 0))
    assert np.all(res.gammas == clean)
    assert res.stderr == 0


def test_ensemble_bit_identical_and_thread_independent():
    spec = DisorderSpec(0.05, 6, 99)
    a = disorder_ensemble(10, 0.3, -fz_max(10), spec)
    b = disorder_ensemble(10, 0.3, -fz_max(10), spec, workers=3)
    assert a.gammas.tobytes() == b.gammas.tobytes()
    assert a.min <= a.mean <= a.max


def test_lamb_dicke():
    assert lamb_dicke_rate(0) == 0
    assert lamb_dicke_rate(0.1) == pytest.approx(0.01)
    assert decay_floor(0.002, 0.1) == pytest.approx(0.012)
