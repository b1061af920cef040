import random
from fractions import Fraction

import mpmath
import pytest

from bostconnes.errors import DegenerateInput, DeterminantBoundExceeded, ModeMismatch, NotInSpace
from bostconnes.gl2 import (
    EXACT,
    NUMERIC,
    S_MATRIX,
    T_MATRIX,
    DoubleCoset,
    GL2AlgebraElement,
    Mat2Q,
    Mat2Residue,
    UpperHalfPoint,
    alpha_of,
    commensurable_2d,
    cstar_embed,
    eta2,
    gamma_action,
    gl2_convolve,
    gl2_involution,
    gl2_time_evolve,
    hecke_cosets,
    random_element,
    random_point,
    random_sl2,
    reduce_to_fundamental_domain,
    sigma1,
)

from oracles import brute_force_coset_count

AMBIENT = 12 * 60 ** 4
I = UpperHalfPoint.of(0, 1)


# ---------------------------------------------------------------- Hecke cosets


@pytest.mark.parametrize("n", range(1, 11))
def test_hecke_counts_match_brute_force(n):
    assert len(hecke_cosets(n)) == brute_force_coset_count(n) == sigma1(n)


def test_hecke_examples():
    assert hecke_cosets(1) == [Mat2Q.identity()]
    assert len(hecke_cosets(4)) == 7
    assert len(hecke_cosets(6)) == 12 == sigma1(6)


def test_hecke_up_to_fifty_distinct():
    for n in range(1, 51):
        reps = hecke_cosets(n)
        assert len(reps) == sigma1(n)
        assert len({m.left_coset_rep() for m in reps}) == len(reps)
        assert all(m.det == n for m in reps)


def test_left_coset_rep_is_gamma_invariant():
    rng = random.Random(0)
    for n in (2, 6, 12):
        for m in hecke_cosets(n):
            assert (random_sl2(rng) * m).left_coset_rep() == m.left_coset_rep()


def test_double_coset_canonical_form():
    rng = random.Random(1)
    for h in (DoubleCoset(1, 6), DoubleCoset(Fraction(1, 2), 3), DoubleCoset(2, 1)):
        m = random_sl2(rng) * h.rep * random_sl2(rng)
        assert m.double_coset() == h
        assert h.inverse().inverse() == h
        assert len(h.left_cosets()) >= 1


# ---------------------------------------------------------------- actions


def test_gamma_action_examples():
    one = Mat2Q.identity()
    g, rho = Mat2Q.diag(2, 1), Mat2Residue(12, (2, 4, 6, 8))
    assert gamma_action(one, one, g, rho, I) == (g, rho, I)
    _, _, z = gamma_action(one, T_MATRIX_Q, g, rho, I)
    assert z == UpperHalfPoint.of(1, 1)
    _, _, z = gamma_action(one, S_MATRIX_Q, g, rho, I)
    assert z == I


S_MATRIX_Q = Mat2Q(*S_MATRIX)
T_MATRIX_Q = Mat2Q(*T_MATRIX)


def test_fundamental_domain_reduction_is_canonical():
    rng = random.Random(2)
    for _ in range(100):
        z = UpperHalfPoint.of(Fraction(rng.randint(-30, 30), rng.randint(1, 9)), Fraction(rng.randint(1, 20), rng.randint(1, 9)))
        w, gamma = reduce_to_fundamental_domain(z)
        assert -Fraction(1, 2) <= w.x < Fraction(1, 2)
        assert w.x * w.x + w.y * w.y >= 1
        assert Mat2Q(*gamma).act_z(z) == w
        w2, _ = reduce_to_fundamental_domain(random_sl2(rng).act_z(z))
        assert w2 == w


# ---------------------------------------------------------------- C^* fibre


def test_cstar_examples():
    with mpmath.workprec(128):
        from bostconnes.gl2 import quotient_to_h
        assert quotient_to_h(cstar_embed(1, 0)) == mpmath.mpc(0, 1)
        assert quotient_to_h(Mat2Q.identity()) == mpmath.mpc(0, 1)
        assert quotient_to_h(Mat2Q.diag(2, 1)) == mpmath.mpc(0, 2)
        rng = random.Random(3)
        for _ in range(1000):
            a, b = mpmath.mpf(rng.uniform(-5, 5)), mpmath.mpf(rng.uniform(-5, 5))
            assert abs(quotient_to_h(cstar_embed(a, b)) - 1j) <= mpmath.mpf(2) ** -120
    with pytest.raises(DegenerateInput):
        cstar_embed(0, 0)


def test_alpha_of_maps_i_to_z():
    z = UpperHalfPoint.of(Fraction(1, 3), Fraction(5, 2))
    assert alpha_of(z).act_z(I) == z


# ---------------------------------------------------------------- eta


def test_eta2_examples():
    rho = Mat2Residue(12, (2, 4, 6, 8))
    first, second = eta2(Mat2Q.identity(), rho, Mat2Q.identity())
    assert first == second
    g = Mat2Q.diag(2, 1)
    first, second = eta2(g, rho, Mat2Q.identity())
    assert first.basis == (Fraction(1, 2), 0, 0, 1)
    assert second.basis == (1, 0, 0, 1)
    assert commensurable_2d(first, second)
    with pytest.raises(NotInSpace):
        eta2(Mat2Q.diag(Fraction(1, 2), 1), Mat2Residue(12, (1, 0, 0, 1)), Mat2Q.identity())


def test_eta2_is_gamma_invariant():
    rng = random.Random(4)
    for _ in range(50):
        h = DoubleCoset(rng.choice([1, Fraction(1, 2), 2]), rng.choice([1, 2, 3, 6]))
        g = random_sl2(rng) * rng.choice(h.left_cosets()) * random_sl2(rng)
        rho = Mat2Residue(AMBIENT, tuple(g.den * 6 * v for v in Mat2Residue.random(rng, AMBIENT).entries))
        alpha = Mat2Q.of(rng.randint(1, 5), rng.randint(-3, 3), 0, rng.randint(1, 4))
        g1, g2 = random_sl2(rng), random_sl2(rng)
        # (gamma1 g gamma2^-1, gamma2 rho, gamma2 alpha)
        moved = eta2(g1 * g * g2.inverse(), rho.image(g2), g2 * alpha)
        assert moved == eta2(g, rho, alpha)
        assert commensurable_2d(*eta2(g, rho, alpha))


# ---------------------------------------------------------------- algebra


def _point_in(rng, h):
    g = random_sl2(rng) * rng.choice(h.left_cosets()) * random_sl2(rng)
    rho = Mat2Residue(AMBIENT, tuple(g.den * v for v in Mat2Residue.random(rng, AMBIENT).entries))
    z = UpperHalfPoint.of(Fraction(rng.randint(-9, 9), rng.randint(1, 5)), Fraction(rng.randint(1, 9), rng.randint(1, 5)))
    return g, rho, z


def test_base_elements_are_invariant():
    rng = random.Random(5)
    for h in (DoubleCoset(1, 1), DoubleCoset(1, 2), DoubleCoset(Fraction(1, 2), 6)):
        f = GL2AlgebraElement.base(h, 17)
        values = []
        for _ in range(20):
            g, rho, z = _point_in(rng, h)
            value = f(g, rho, z)
            assert f(*gamma_action(random_sl2(rng), random_sl2(rng), g, rho, z)) == value
            values.append(value)
        assert any(values)


def test_identity_element():
    one = GL2AlgebraElement.identity()
    rng = random.Random(6)
    f = random_element(rng)
    for _ in range(10):
        p = random_point(rng, [f], AMBIENT)
        assert gl2_convolve(one, f)(p.g, p.rho, p.z) == f(p.g, p.rho, p.z) == gl2_convolve(f, one)(p.g, p.rho, p.z)
    assert gl2_involution(one)(Mat2Q.identity(), Mat2Residue(12, (1, 0, 0, 1)), I) == 1


def test_det_two_product_by_hand():
    h = DoubleCoset(1, 2)
    assert len(h.left_cosets()) == sigma1(2) == 3
    f1, f2 = GL2AlgebraElement.base(h, 1), GL2AlgebraElement.base(h, 2)
    prod = gl2_convolve(f1, f2)
    assert {c.det for c in prod.support} == {4}
    rng = random.Random(7)
    seen = []
    for _ in range(20):
        g, rho, z = _point_in(rng, rng.choice(sorted(prod.support)))
        expected = 0
        for s in h.left_cosets():
            s_rho = rho.image(s)
            if s_rho is None:
                continue
            expected += f1(g * s.inverse(), s_rho, s.act_z(z)) * f2(s, rho, z)
        assert prod(g, rho, z) == expected
        seen.append(expected)
    assert any(seen)


def test_associativity_and_anti_automorphism():
    rng = random.Random(7)
    nonzero = 0
    for _ in range(20):
        f1, f2, f3 = (random_element(rng, 6, 3, 12) for _ in range(3))
        p = random_point(rng, [f1, f2, f3], AMBIENT)
        lhs = gl2_convolve(gl2_convolve(f1, f2), f3)
        rhs = gl2_convolve(f1, gl2_convolve(f2, f3))
        assert lhs(p.g, p.rho, p.z) == rhs(p.g, p.rho, p.z)
        nonzero += lhs(p.g, p.rho, p.z) != 0
        star_l = gl2_involution(gl2_convolve(f1, f2))
        star_r = gl2_convolve(gl2_involution(f2), gl2_involution(f1))
        q = random_point(rng, [star_r], AMBIENT)
        assert star_l(q.g, q.rho, q.z) == star_r(q.g, q.rho, q.z)
    assert nonzero >= 10


def test_involution_support():
    f = GL2AlgebraElement.base(DoubleCoset(1, 2), 3)
    star = gl2_involution(f)
    assert star.support == frozenset([DoubleCoset(Fraction(1, 2), 2)])
    assert next(iter(star.support)).det == Fraction(1, 2)


def test_time_evolution():
    rng = random.Random(8)
    h = DoubleCoset(1, 6)
    f = GL2AlgebraElement.base(h, 9)
    assert gl2_time_evolve(f, 0) is f
    for _ in range(10):
        g, rho, z = _point_in(rng, h)
        assert gl2_time_evolve(f, 1j)(g, rho, z) == f(g, rho, z) / 6
    with pytest.raises(ModeMismatch):
        gl2_time_evolve(f, 0.5)


def test_time_evolution_multiplicative_exact():
    rng = random.Random(9)
    for _ in range(10):
        f1, f2 = random_element(rng), random_element(rng)
        p = random_point(rng, [f1, f2], AMBIENT)
        lhs = gl2_time_evolve(gl2_convolve(f1, f2), 1j)
        rhs = gl2_convolve(gl2_time_evolve(f1, 1j), gl2_time_evolve(f2, 1j))
        assert lhs(p.g, p.rho, p.z) == rhs(p.g, p.rho, p.z)


def test_time_evolution_group_numeric():
    rng = random.Random(10)
    f = random_element(rng, mode=NUMERIC)
    with mpmath.workprec(128):
        for _ in range(5):
            p = random_point(rng, [f], AMBIENT)
            s, t = rng.uniform(-2, 2), rng.uniform(-2, 2)
            a = gl2_time_evolve(gl2_time_evolve(f, s), t)(p.g, p.rho, p.z)
            b = gl2_time_evolve(f, s + t)(p.g, p.rho, p.z)
            assert abs(a - b) <= mpmath.mpf(2) ** -110 * (1 + abs(b))


def test_determinant_cap():
    f = GL2AlgebraElement.base(DoubleCoset(1, 101), 1)
    with pytest.raises(DeterminantBoundExceeded):
        gl2_convolve(f, f)


def test_modes_do_not_mix():
    with pytest.raises(ModeMismatch):
        gl2_convolve(GL2AlgebraElement.identity(EXACT), GL2AlgebraElement.identity(NUMERIC))


def test_json_shape():
    rng = random.Random(11)
    f = random_element(rng)
    p = random_point(rng, [f], AMBIENT)
    data = f.to_json([p])
    assert data["level"] == 12 and "z_samples" in data and len(data["values"]) == 1
    term = DoubleCoset(1, 6).to_json()
    assert term == {"scalar": "1/1", "a": 1, "b": 0, "d": 6}
