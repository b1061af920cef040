import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bostconnes.errors import LevelMismatch
from bostconnes.numtower import (
    BigComplex,
    Cyclotomic,
    QmodZ,
    ResidueEndo,
    cyclotomic_eq,
    cyclotomic_mul,
    cyclotomic_polynomial,
    divisors,
    hurwitz_zeta,
    qmodz_add,
    residue_apply,
    units_mod,
)

zeta = Cyclotomic.root_of_unity


# ---------------------------------------------------------------- Q/Z


@pytest.mark.parametrize("a, b, expected", [
    (QmodZ(1, 2), QmodZ(1, 2), QmodZ(0, 1)),
    (QmodZ(1, 3), QmodZ(1, 2), QmodZ(5, 6)),
    (QmodZ(0, 1), QmodZ(3, 4), QmodZ(3, 4)),
])
def test_qmodz_add_examples(a, b, expected):
    assert qmodz_add(a, b) == expected


def test_qmodz_canonical_form():
    assert QmodZ(3, 6) == QmodZ(1, 2)
    assert QmodZ(5, 4) == QmodZ(1, 4)
    assert QmodZ(-1, 3) == QmodZ(2, 3)
    assert QmodZ(7, 1) == QmodZ(0, 1)
    assert str(QmodZ(0, 1)) == "0/1"


small = st.builds(lambda d, n: QmodZ(n % d, d), st.integers(1, 24), st.integers(0, 1000))


@given(small, small, small)
def test_qmodz_group_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a + QmodZ(0, 1) == a
    assert a + (-a) == QmodZ(0, 1)
    assert (-a) == QmodZ((a.den - a.num) % a.den, a.den)


def test_qmodz_exhaustive_small():
    elems = [QmodZ(n, d) for d in range(1, 13) for n in range(d) if math.gcd(n, d) == 1]
    for a in elems:
        assert 0 <= a.num < a.den and math.gcd(a.num, a.den) == 1
        for b in elems:
            s = a + b
            assert s.as_fraction() == (a.as_fraction() + b.as_fraction()) % 1


@given(small)
def test_qmodz_json_roundtrip(a):
    assert QmodZ.from_json(a.to_json()) == a


# ---------------------------------------------------------------- residues


def test_residue_apply_examples():
    assert residue_apply(ResidueEndo(6, 5), QmodZ(1, 3)) == QmodZ(2, 3)
    assert residue_apply(ResidueEndo(6, 0), QmodZ(1, 2)) == QmodZ(0, 1)
    with pytest.raises(LevelMismatch):
        residue_apply(ResidueEndo(4, 1), QmodZ(1, 3))


def test_level_lower_after_raise_is_identity():
    for n in range(1, 145):
        for big in range(n, 145, n):
            for k in range(n):
                rho = ResidueEndo(n, k)
                for refined in rho.refinements(big):
                    assert refined.project(n) == rho
                assert rho.lift(big).project(n) == rho


def test_residue_times_divide_and_agreement():
    rho = ResidueEndo(12, 6)
    assert rho.times(2).level == 24 and rho.times(2).residue == 12
    assert rho.divisible_by(3)
    d = rho.divide(3)
    assert d.level == 4 and d.residue == 2
    assert ResidueEndo(12, 5).agrees_with(ResidueEndo(8, 1))
    assert not ResidueEndo(12, 5).agrees_with(ResidueEndo(8, 2))


@given(st.integers(1, 30), st.integers(0, 10 ** 6))
def test_residue_json_roundtrip(level, k):
    rho = ResidueEndo(level, k % level)
    assert ResidueEndo.from_json(rho.to_json()) == rho


# ---------------------------------------------------------------- cyclotomics


def test_cyclotomic_examples():
    assert cyclotomic_mul(zeta(4), zeta(4)) == zeta(2)
    assert zeta(4) * zeta(4) == Cyclotomic.rational(-1)
    assert (zeta(3) + zeta(3, 2) + 1).is_zero()
    assert cyclotomic_eq(zeta(6), -zeta(3, 2))
    with mpmath.workprec(128):
        assert abs(zeta(6).embed() - (-zeta(3, 2)).embed()) < mpmath.mpf(2) ** -120


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(6) == (1, -1, 1)
    assert cyclotomic_polynomial(12) == (1, 0, -1, 0, 1)


def test_cyclotomic_str():
    assert str(zeta(4)) == "zeta_4^1"
    assert str(-zeta(4)) == "-zeta_4^1"
    assert str(Cyclotomic.zero()) == "0"


def test_cyclotomic_unhashable_and_immutable():
    with pytest.raises(TypeError):
        hash(zeta(5))
    with pytest.raises(AttributeError):
        zeta(5).conductor = 7


def test_vanishing_sums_of_roots():
    for n in range(2, 25):
        total = Cyclotomic.zero()
        for k in range(n):
            total = total + zeta(n, k)
        assert total.is_zero(), n


def test_conductor_raising_preserves_value():
    for n in (3, 4, 6, 8, 12):
        x = zeta(n) + Cyclotomic.rational(Fraction(2, 3)) * zeta(n, 2)
        for m in (2, 3, 5):
            assert x.raise_to(n * m) == x


cyclos = st.builds(
    lambda n, cs: Cyclotomic(n, {k: Fraction(c, 3) for k, c in enumerate(cs)}),
    st.integers(1, 24), st.lists(st.integers(-5, 5), max_size=8))


@settings(max_examples=60, deadline=None)
@given(cyclos, cyclos, cyclos)
def test_cyclotomic_ring_laws(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == Cyclotomic.zero()
    assert x * Cyclotomic.one() == x


@settings(max_examples=60, deadline=None)
@given(cyclos, cyclos)
def test_embedding_is_ring_homomorphism(x, y):
    n = math.lcm(x.conductor, y.conductor)
    for u in units_mod(n)[:4] or [1]:
        with mpmath.workprec(140):
            tol = mpmath.mpf(2) ** -120 * (1 + abs(x.embed(u)) * abs(y.embed(u)))
            assert abs((x * y).embed(u) - x.embed(u) * y.embed(u)) <= tol
            assert abs((x + y).embed(u) - x.embed(u) - y.embed(u)) <= tol


@given(cyclos)
def test_cyclotomic_json_roundtrip(x):
    assert Cyclotomic.from_json(x.to_json()) == x


def test_galois_on_cyclotomic_is_conjugation_for_minus_one():
    for n in (3, 4, 5, 8, 12):
        x = zeta(n) + 2 * zeta(n, 2) if n > 2 else zeta(n)
        assert x.galois(n - 1) == x.conjugate()


# ---------------------------------------------------------------- analytic


def test_bigcomplex_agreement_and_json():
    a = BigComplex.from_value(mpmath.mpf(1), 128, mpmath.mpf("1e-10"))
    assert a.agrees_with(BigComplex.from_value(mpmath.mpf(1) + mpmath.mpf("5e-11")))
    assert not a.agrees_with(BigComplex.from_value(mpmath.mpf(1) + mpmath.mpf("2e-10")))
    assert BigComplex.from_json(a.to_json()).agrees_with(a)


def _direct_zeta(beta, a, terms=10 ** 5):
    """Truncated sum plus the integral tail bound, in 200-bit arithmetic."""
    with mpmath.workprec(200):
        a = mpmath.mpf(a.numerator) / a.denominator
        s = mpmath.fsum((n + a) ** -beta for n in range(terms))
        tail_lo = (terms + a) ** (1 - beta) / (beta - 1)
        tail_hi = (terms - 1 + a) ** (1 - beta) / (beta - 1)
        return s + (tail_lo + tail_hi) / 2, (tail_hi - tail_lo) / 2


@pytest.mark.parametrize("beta, a, closed_form", [
    (2, Fraction(1), lambda: mpmath.pi ** 2 / 6),
    (2, Fraction(1, 2), lambda: mpmath.pi ** 2 / 2),
    (3, Fraction(1), lambda: mpmath.zeta(3)),
])
def test_hurwitz_examples(beta, a, closed_form):
    h = hurwitz_zeta(beta, a)
    with mpmath.workprec(200):
        exact = closed_form()
        assert abs(h.value - exact) <= h.error_bound + mpmath.mpf(2) ** -120
        direct, bound = _direct_zeta(beta, a)
        assert abs(h.value - direct) <= h.error_bound + bound
    assert h.error_bound < 1e-30
    assert abs(float(h.re) - float(closed_form())) < 1e-9


@pytest.mark.parametrize("beta", [Fraction(3, 2), 2, Fraction(5, 2), 3, 7])
@pytest.mark.parametrize("a", [Fraction(1, 7), Fraction(1, 3), Fraction(5, 6), Fraction(1)])
def test_hurwitz_against_mpmath(beta, a):
    h = hurwitz_zeta(beta, a)
    with mpmath.workprec(200):
        ref = mpmath.zeta(mpmath.mpf(beta.numerator if isinstance(beta, Fraction) else beta)
                          / (beta.denominator if isinstance(beta, Fraction) else 1),
                          mpmath.mpf(a.numerator) / a.denominator)
        assert abs(h.value - ref) <= h.error_bound + mpmath.mpf(2) ** -118


def test_hurwitz_domain():
    with pytest.raises(Exception):
        hurwitz_zeta(1, 1)
    with pytest.raises(Exception):
        hurwitz_zeta(2, 0)


def test_number_helpers():
    assert divisors(24) == [1, 2, 3, 4, 6, 8, 12, 24]
    assert units_mod(12) == [1, 5, 7, 11]
