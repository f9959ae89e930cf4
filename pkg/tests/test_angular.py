from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subradiance.angular import (TOY_ATOM, LevelScheme, branching_sums, clebsch_coefficient,
                                 transition_table, twice, wigner3j, wigner3j_squared)
from oracles import ladder_3j, racah_3j

HALF = Fraction(1, 2)


def all_args(jmax=Fraction(5, 2)):
    js = [Fraction(n, 2) for n in range(0, twice(jmax) + 1)]
    for j1, j2, j3 in product(js, repeat=3):
        for m1 in np.arange(-j1, j1 + 1):
            for m2 in np.arange(-j2, j2 + 1):
                m3 = -(m1 + m2)
                if abs(m3) <= j3 and (j3 - m3).denominator == 1:
                    yield j1, j2, j3, Fraction(m1), Fraction(m2), Fraction(m3)


def test_stretched_value():
    assert wigner3j(HALF, 1, Fraction(3, 2), HALF, 1, Fraction(-3, 2)) == pytest.approx(-0.5, abs=1e-15)
    assert wigner3j_squared(HALF, 1, Fraction(3, 2), HALF, 1, Fraction(-3, 2)) == Fraction(1, 4)


def test_projection_sum_nonzero_gives_exact_zero():
    assert wigner3j(HALF, 1, Fraction(3, 2), HALF, 1, -HALF) == 0.0


def test_triangle_violation_is_zero():
    assert wigner3j(HALF, HALF, 2, HALF, -HALF, 0) == 0.0


def test_racah_oracle_small_case():
    v = wigner3j(HALF, 1, HALF, HALF, 0, -HALF)
    assert v == pytest.approx(racah_3j(0.5, 1, 0.5, 0.5, 0, -0.5), abs=1e-12)


def test_rejects_half_integer_mismatch():
    with pytest.raises(ValueError):
        wigner3j(HALF, 1, HALF, 0, 0, 0)


def test_agrees_with_two_oracles_up_to_five_halves():
    n = 0
    for args in all_args():
        v = wigner3j(*args)
        f = [float(a) for a in args]
        assert v == pytest.approx(racah_3j(*f), abs=1e-12)
        assert v == pytest.approx(ladder_3j(*f), abs=1e-12)
        n += 1
    assert n > 700


def test_agrees_with_sympy():
    from sympy.physics.wigner import wigner_3j
    for args in list(all_args(Fraction(2)))[::7]:
        s = float(wigner_3j(*[Fraction(a) for a in args]))
        assert wigner3j(*args) == pytest.approx(s, abs=1e-12)


@given(st.sampled_from(list(all_args(Fraction(2)))))
def test_column_permutation_symmetry(args):
    j1, j2, j3, m1, m2, m3 = args
    v = wigner3j(*args)
    phase = (-1) ** int(j1 + j2 + j3)
    assert wigner3j(j2, j3, j1, m2, m3, m1) == pytest.approx(v, abs=1e-12)
    assert wigner3j(j2, j1, j3, m2, m1, m3) == pytest.approx(phase * v, abs=1e-12)
    assert wigner3j(j1, j2, j3, -m1, -m2, -m3) == pytest.approx(phase * v, abs=1e-12)


def test_clebsch_values_toy_atom():
    assert clebsch_coefficient(TOY_ATOM, -HALF, 1) ** 2 == pytest.approx(0.25, abs=1e-15)
    c = clebsch_coefficient(TOY_ATOM, HALF, 1)
    assert c ** 2 == pytest.approx(1 / 12, abs=1e-15)
    assert c ** 2 * 4 == pytest.approx(1 / 3, abs=1e-15)
    assert clebsch_coefficient(TOY_ATOM, HALF, -1) != 0
    assert clebsch_coefficient(TOY_ATOM, -HALF, -1) != 0
    # m_e = m_g - q = -1/2 - 2 is not a sublevel for any q; q=+1 from -1/2 gives -3/2 (valid)
    assert clebsch_coefficient(TOY_ATOM, HALF, 1) != 0


def test_clebsch_matches_racah_oracle():
    for t in transition_table(TOY_ATOM):
        mg, q = float(t.m_g), t.q
        ref = (-1) ** int(round(0.5 - mg)) * racah_3j(0.5, 1, 1.5, -mg, q, mg - q)
        assert t.coefficient == pytest.approx(ref, abs=1e-12)


def test_transition_table_toy_atom():
    table = transition_table(TOY_ATOM)
    assert len(table) == 6
    for q in (-1, 0, 1):
        assert sum(t.q == q for t in table) == 2
    for t in table:
        assert t.two_me == t.two_mg - 2 * t.q
    keys = [(t.two_mg, t.q) for t in table]
    assert keys == sorted(keys)


def test_branching_sum_rule():
    for scheme in (TOY_ATOM, LevelScheme(Fraction(0), Fraction(1)), LevelScheme(Fraction(1), Fraction(1)),
                   LevelScheme(Fraction(3, 2), Fraction(5, 2))):
        for s in branching_sums(scheme).values():
            assert s == pytest.approx(1 / (2 * scheme.F_e + 1), abs=1e-12)


def test_zero_to_one_reference_scheme():
    table = transition_table(LevelScheme(Fraction(0), Fraction(1)))
    assert len(table) == 3
    for t in table:
        assert t.coefficient ** 2 == pytest.approx(1 / 3, abs=1e-12)


def test_level_scheme_labels_and_validation():
    assert TOY_ATOM.ground_labels == (-1, 1)
    assert TOY_ATOM.excited_labels == (-3, -1, 1, 3)
    assert TOY_ATOM.level_index(-3, excited=True) == 2
    with pytest.raises(ValueError):
        LevelScheme(Fraction(1, 2), Fraction(5, 2))


def test_beta_sign_and_square():
    beta = clebsch_coefficient(TOY_ATOM, -HALF, 1) / clebsch_coefficient(TOY_ATOM, HALF, 1)
    assert beta ** 2 == pytest.approx(3, abs=1e-12)
    # mirror relation C_{-m,-q} = C_{m,q} keeps beta the same for q = -1
    beta_m = clebsch_coefficient(TOY_ATOM, HALF, -1) / clebsch_coefficient(TOY_ATOM, -HALF, -1)
    assert beta_m == pytest.approx(beta, abs=1e-12)
