"""Angular-momentum algebra for the hyperfine level scheme.

Half-integer quantum numbers are handled internally as doubled integers so
that sublevel identity never depends on floating point comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, isqrt

POLARIZATIONS = (-1, 0, 1)


def twice(x) -> int:
    """Return 2*x as an int, rejecting anything that is not a half-integer."""
    two_x = Fraction(x) * 2 if not isinstance(x, float) else Fraction(x).limit_denominator(8) * 2
    if two_x.denominator != 1:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(two_x)


@lru_cache(maxsize=None)
def _racah_squared(tj1, tj2, tj3, tm1, tm2, tm3):
    """Exact (sign, value**2) of the 3j symbol from doubled arguments."""
    a = (tj1 + tj2 - tj3) // 2
    b = (tj1 - tj2 + tj3) // 2
    c = (-tj1 + tj2 + tj3) // 2
    delta = Fraction(factorial(a) * factorial(b) * factorial(c),
                     factorial((tj1 + tj2 + tj3) // 2 + 1))
    pref = (factorial((tj1 + tm1) // 2) * factorial((tj1 - tm1) // 2)
            * factorial((tj2 + tm2) // 2) * factorial((tj2 - tm2) // 2)
            * factorial((tj3 + tm3) // 2) * factorial((tj3 - tm3) // 2))
    # Racah sum over t with all factorial arguments non-negative
    k1 = (tj3 - tj2 + tm1) // 2
    k2 = (tj3 - tj1 - tm2) // 2
    n1 = a
    n2 = (tj1 - tm1) // 2
    n3 = (tj2 + tm2) // 2
    total = Fraction(0)
    for t in range(max(0, -k1, -k2), min(n1, n2, n3) + 1):
        den = (factorial(t) * factorial(k1 + t) * factorial(k2 + t)
               * factorial(n1 - t) * factorial(n2 - t) * factorial(n3 - t))
        total += Fraction((-1) ** t, den)
    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    value_sq = delta * pref * total * total
    sign = phase * (1 if total >= 0 else -1)
    return sign, value_sq


def _sqrt_fraction(q: Fraction) -> float:
    p, r = q.numerator, q.denominator
    # exact when both are perfect squares, float otherwise
    sp, sr = isqrt(p), isqrt(r)
    if sp * sp == p and sr * sr == r:
        return sp / sr
    return (p / r) ** 0.5


def wigner3j_squared(j1, j2, j3, m1, m2, m3) -> Fraction:
    """Exact square of the Wigner 3j symbol as a Fraction."""
    args = _validated(j1, j2, j3, m1, m2, m3)
    if args is None:
        return Fraction(0)
    return _racah_squared(*args)[1]


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol via the Racah closed-form sum.

    Returns exactly 0.0 when the projections do not sum to zero, when the
    triangle condition fails, or when some |m_i| > j_i.
    """
    args = _validated(j1, j2, j3, m1, m2, m3)
    if args is None:
        return 0.0
    sign, value_sq = _racah_squared(*args)
    if value_sq == 0:
        return 0.0
    return sign * _sqrt_fraction(value_sq)


def _validated(j1, j2, j3, m1, m2, m3):
    tj = [twice(j) for j in (j1, j2, j3)]
    tm = [twice(m) for m in (m1, m2, m3)]
    for j, m in zip(tj, tm):
        if j < 0:
            raise ValueError("angular momenta must be non-negative")
        if (j - m) % 2:
            raise ValueError("j and m must differ by an integer")
    if sum(tm) != 0:
        return None
    if any(abs(m) > j for j, m in zip(tj, tm)):
        return None
    if not abs(tj[0] - tj[1]) <= tj[2] <= tj[0] + tj[1] or (sum(tj) % 2):
        return None
    return (*tj, *tm)


@dataclass(frozen=True)
class LevelScheme:
    """Ground manifold F_g and excited manifold F_e of a dipole transition.

    Sublevels are stored as doubled projections in ascending order, so for
    the default 1/2 -> 3/2 atom ``ground_labels == (-1, 1)`` corresponds to
    levels |0>, |1> and ``excited_labels == (-3, -1, 1, 3)`` to |2>..|5>.
    """

    F_g: Fraction = Fraction(1, 2)
    F_e: Fraction = Fraction(3, 2)
    ground_labels: tuple = field(init=False)
    excited_labels: tuple = field(init=False)

    def __post_init__(self):
        tg, te = twice(self.F_g), twice(self.F_e)
        if tg < 0 or te < 0:
            raise ValueError("F must be non-negative")
        if abs(te - tg) > 2 or (te - tg) % 2:
            raise ValueError("F_g -> F_e is not a dipole-allowed manifold pair")
        if tg == 0 and te == 0:
            raise ValueError("0 -> 0 transition is dipole forbidden")
        object.__setattr__(self, "F_g", Fraction(tg, 2))
        object.__setattr__(self, "F_e", Fraction(te, 2))
        object.__setattr__(self, "ground_labels", tuple(range(-tg, tg + 1, 2)))
        object.__setattr__(self, "excited_labels", tuple(range(-te, te + 1, 2)))

    @property
    def n_ground(self) -> int:
        return len(self.ground_labels)

    @property
    def n_excited(self) -> int:
        return len(self.excited_labels)

    def level_index(self, two_m: int, excited: bool) -> int:
        """Global level number: ground sublevels first, then excited ones."""
        if excited:
            return self.n_ground + self.excited_labels.index(two_m)
        return self.ground_labels.index(two_m)


TOY_ATOM = LevelScheme()


def clebsch_coefficient(scheme: LevelScheme, m_g, q: int) -> float:
    """Coupling C_{m_g,q} of ground |m_g> to excited |m_g - q>.

    Zero whenever m_g - q is not an excited sublevel.
    """
    return _clebsch_twice(scheme, twice(m_g), q)


def clebsch_twice(scheme: LevelScheme, two_mg: int, q: int) -> float:
    """Same as :func:`clebsch_coefficient` with a doubled ground projection."""
    return _clebsch_twice(scheme, two_mg, q)


@lru_cache(maxsize=None)
def _clebsch_twice(scheme, two_mg, q):
    if q not in POLARIZATIONS:
        raise ValueError(f"polarization must be one of {POLARIZATIONS}, got {q}")
    if two_mg not in scheme.ground_labels:
        raise ValueError(f"m_g = {two_mg}/2 is not a ground sublevel")
    two_me = two_mg - 2 * q
    if two_me not in scheme.excited_labels:
        return 0.0
    tg = twice(scheme.F_g)
    phase = -1 if ((tg - two_mg) // 2) % 2 else 1
    return phase * wigner3j(scheme.F_g, 1, scheme.F_e,
                            Fraction(-two_mg, 2), q, Fraction(two_me, 2))


@dataclass(frozen=True)
class Transition:
    two_mg: int
    q: int
    two_me: int
    coefficient: float

    @property
    def m_g(self) -> Fraction:
        return Fraction(self.two_mg, 2)

    @property
    def m_e(self) -> Fraction:
        return Fraction(self.two_me, 2)


def transition_table(scheme: LevelScheme = TOY_ATOM) -> list[Transition]:
    """All non-zero (m_g, q, m_e = m_g - q, C) entries, ascending m_g then q."""
    table = []
    for two_mg in scheme.ground_labels:
        for q in POLARIZATIONS:
            c = _clebsch_twice(scheme, two_mg, q)
            if c != 0.0:
                table.append(Transition(two_mg, q, two_mg - 2 * q, c))
    return table


def branching_sums(scheme: LevelScheme = TOY_ATOM) -> dict[int, float]:
    """Sum over q of C^2 for each excited sublevel (keys are doubled m_e)."""
    sums = {two_me: 0.0 for two_me in scheme.excited_labels}
    for t in transition_table(scheme):
        sums[t.two_me] += t.coefficient ** 2
    return sums
