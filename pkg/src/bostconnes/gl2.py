"""The two-dimensional system: GL2 data at finite level.

Points of U are triples (g, rho, z) with g in GL2+(Q), rho in M2(Z-hat) known
modulo a level and z in the upper half plane, subject to g*rho integral.
Gamma x Gamma (Gamma = SL2(Z)) acts by (g1 g g2^-1, g2 rho, g2 z).

Functions on U are evaluated pointwise.  A base function is supported on one
double coset Gamma h Gamma and is made invariant by construction: the point is
moved so that z lies in a fixed fundamental domain and g is replaced by the
Hermite normal form of its left coset; a table is then read and averaged over
the stabilizer of the reduced z.  Convolutions, involutions, time evolutions
and sums of such functions are kept as expression trees and evaluated by
summing over left cosets, which keeps every identity exact.

z carries exact rational coordinates so that the reduction to the
fundamental domain is a decision rather than a float comparison.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Optional

import mpmath

from .errors import DegenerateInput, DeterminantBoundExceeded, LevelMismatch, ModeMismatch, NotInSpace
from .numtower import DEFAULT_PRECISION, as_fraction, divisors, fraction_str, lcm

EXACT = "exact"
NUMERIC = "numeric"
DEFAULT_TABLE_LEVEL = 12
DEFAULT_DET_CAP = 10 ** 4


# ---------------------------------------------------------------- integer 2x2 helpers


def _mat_mul(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _left_hnf(m):
    """Canonical representative of SL2(Z)*m for an integer matrix with det > 0.

    Row operations reduce to (a b; 0 d) with a, d > 0 and 0 <= b < d.
    """
    a, b, c, d = m
    while c != 0:
        q = a // c
        # (r1, r2) -> (r2, -(r1 - q r2)) keeps the determinant
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    if a < 0:
        a, b, d = -a, -b, -d
    if d <= 0:
        raise DegenerateInput("determinant must be positive")
    b %= d
    return a, b, 0, d


def _lattice_hnf(rows):
    """Row HNF (a b; 0 d) of the integer lattice spanned by 2-vectors, GL2(Z) allowed."""
    rows = [list(r) for r in rows if r[0] or r[1]]
    pivot = None
    rest = []
    for r in rows:
        if pivot is None:
            if r[0]:
                pivot = r
            else:
                rest.append(r)
            continue
        while r[0]:
            q = pivot[0] // r[0]
            pivot, r = r, [pivot[0] - q * r[0], pivot[1] - q * r[1]]
        rest.append(r)
    if pivot is None:
        raise DegenerateInput("generators do not span a rank-2 lattice")
    d = 0
    for r in rest:
        d = math.gcd(d, r[1])
    if d == 0:
        raise DegenerateInput("generators do not span a rank-2 lattice")
    if pivot[0] < 0:
        pivot = [-pivot[0], -pivot[1]]
    return pivot[0], pivot[1] % d, 0, d


# ---------------------------------------------------------------- rational matrices


@dataclass(frozen=True)
class Mat2Q:
    """(1/den) * (a b; c d) with integer entries, den > 0 and gcd(content, den) = 1."""

    a: int
    b: int
    c: int
    d: int
    den: int = 1

    def __post_init__(self):
        if self.den <= 0:
            raise DegenerateInput("denominator must be positive")
        g = math.gcd(math.gcd(self.a, self.b), math.gcd(self.c, self.d))
        g = math.gcd(g, self.den)
        if g > 1:
            for name in ("a", "b", "c", "d", "den"):
                object.__setattr__(self, name, getattr(self, name) // g)
        if self.a * self.d - self.b * self.c <= 0:
            raise DegenerateInput("GL2+(Q) requires a positive determinant")

    @classmethod
    def of(cls, a, b, c, d) -> Mat2Q:
        fa, fb, fc, fd = (as_fraction(v) for v in (a, b, c, d))
        den = lcm(fa.denominator, fb.denominator, fc.denominator, fd.denominator)
        return cls(*(int(v * den) for v in (fa, fb, fc, fd)), den)

    @classmethod
    def identity(cls) -> Mat2Q:
        return cls(1, 0, 0, 1)

    @classmethod
    def diag(cls, x, y) -> Mat2Q:
        return cls.of(x, 0, 0, y)

    @property
    def integer_part(self) -> tuple[int, int, int, int]:
        return self.a, self.b, self.c, self.d

    @property
    def entries(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self.den) for v in self.integer_part)

    @property
    def det(self) -> Fraction:
        return Fraction(self.a * self.d - self.b * self.c, self.den * self.den)

    def is_integral(self) -> bool:
        return self.den == 1

    def __mul__(self, other: Mat2Q) -> Mat2Q:
        if not isinstance(other, Mat2Q):
            return NotImplemented
        return Mat2Q(*_mat_mul(self.integer_part, other.integer_part), self.den * other.den)

    def inverse(self) -> Mat2Q:
        # (A/den)^-1 = den * adj(A) / det(A)
        det_a = self.a * self.d - self.b * self.c
        return Mat2Q(self.d * self.den, -self.b * self.den, -self.c * self.den, self.a * self.den, det_a)

    def scaled(self, s: Fraction) -> Mat2Q:
        s = as_fraction(s)
        return Mat2Q(self.a * s.numerator, self.b * s.numerator, self.c * s.numerator, self.d * s.numerator,
                     self.den * s.denominator)

    def left_coset_rep(self) -> Mat2Q:
        """Hermite normal form of Gamma*g (the rational scalar is kept aside)."""
        return Mat2Q(*_left_hnf(self.integer_part), self.den)

    def double_coset(self) -> DoubleCoset:
        content = math.gcd(math.gcd(self.a, self.b), math.gcd(self.c, self.d))
        det_a = self.a * self.d - self.b * self.c
        return DoubleCoset(Fraction(content, self.den), det_a // (content * content))

    def act_z(self, z: UpperHalfPoint) -> UpperHalfPoint:
        return z.moebius(self.integer_part)

    def to_mp(self, precision: int = DEFAULT_PRECISION) -> mpmath.matrix:
        with mpmath.workprec(precision):
            return mpmath.matrix([[mpmath.mpf(v.numerator) / v.denominator for v in self.entries[:2]],
                                  [mpmath.mpf(v.numerator) / v.denominator for v in self.entries[2:]]])

    def __str__(self) -> str:
        e = [fraction_str(v) for v in self.entries]
        return f"({e[0]} {e[1]}; {e[2]} {e[3]})"

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d, "den": self.den}

    @classmethod
    def from_json(cls, data) -> Mat2Q:
        return cls(int(data["a"]), int(data["b"]), int(data["c"]), int(data["d"]), int(data.get("den", 1)))


S_MATRIX = (0, -1, 1, 0)
T_MATRIX = (1, 1, 0, 1)


@dataclass(frozen=True, order=True)
class DoubleCoset:
    """Gamma (scalar * diag(1, n)) Gamma; every double coset has exactly one such form."""

    scalar: Fraction
    n: int

    def __post_init__(self):
        object.__setattr__(self, "scalar", as_fraction(self.scalar))
        if self.scalar <= 0 or self.n < 1:
            raise DegenerateInput("scalar must be positive and n a positive integer")

    @property
    def rep(self) -> Mat2Q:
        return Mat2Q.diag(1, self.n).scaled(self.scalar)

    @property
    def det(self) -> Fraction:
        return self.scalar * self.scalar * self.n

    @property
    def height(self) -> int:
        """max(numerator, denominator) of the determinant, the quantity capped by det bounds."""
        return max(self.det.numerator, self.det.denominator)

    def inverse(self) -> DoubleCoset:
        return self.rep.inverse().double_coset()

    def left_cosets(self) -> tuple[Mat2Q, ...]:
        return _left_cosets(self.scalar, self.n)

    def to_json(self) -> dict:
        # HNF representative of the double coset: scalar * (1 0; 0 n)
        return {"scalar": fraction_str(self.scalar), "a": 1, "b": 0, "d": self.n}

    def __str__(self) -> str:
        return f"{fraction_str(self.scalar)}*diag(1,{self.n})"


@lru_cache(maxsize=None)
def _left_cosets(scalar: Fraction, n: int) -> tuple[Mat2Q, ...]:
    out = []
    for a in divisors(n):
        d = n // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                out.append(Mat2Q(a, b, 0, d).scaled(scalar))
    return tuple(out)


def hecke_cosets(n: int) -> list[Mat2Q]:
    """Representatives (a b; 0 d), ad = n, 0 <= b < d of Gamma \\ {integer matrices of det n}."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return [Mat2Q(a, b, 0, n // a) for a in divisors(n) for b in range(n // a)]


def sigma1(n: int) -> int:
    return sum(divisors(n))


# ---------------------------------------------------------------- residues and the upper half plane


@dataclass(frozen=True)
class Mat2Residue:
    """rho in M2(Z-hat) known modulo ``level``; entries (r11, r12, r21, r22)."""

    level: int
    entries: tuple

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be positive")
        object.__setattr__(self, "entries", tuple(int(v) % self.level for v in self.entries))
        if len(self.entries) != 4:
            raise ValueError("a 2x2 residue needs four entries")

    @classmethod
    def random(cls, rng: random.Random, level: int) -> Mat2Residue:
        return cls(level, tuple(rng.randrange(level) for _ in range(4)))

    def reduce(self, level: int) -> Mat2Residue:
        if self.level % level:
            raise LevelMismatch(f"rho known mod {self.level}, need mod {level}")
        return Mat2Residue(level, self.entries)

    def image(self, g: Mat2Q) -> Optional[Mat2Residue]:
        """g*rho if it is integral (known modulo level/den), else None."""
        if self.level % g.den:
            raise LevelMismatch(f"deciding g*rho for denominator {g.den} needs it to divide the level {self.level}")
        x = _mat_mul(g.integer_part, self.entries)
        x = tuple(v % self.level for v in x)
        if any(v % g.den for v in x):
            return None
        return Mat2Residue(self.level // g.den, tuple(v // g.den for v in x))

    def in_space(self, g: Mat2Q) -> bool:
        return self.image(g) is not None

    def to_json(self) -> dict:
        return {"level": self.level, "entries": list(self.entries)}


@dataclass(frozen=True)
class UpperHalfPoint:
    """x + iy with y > 0; exact when both coordinates are Fractions."""

    x: object
    y: object

    def __post_init__(self):
        if self.y <= 0:
            raise DegenerateInput("a point of the upper half plane needs Im z > 0")

    @classmethod
    def of(cls, x, y) -> UpperHalfPoint:
        return cls(as_fraction(x), as_fraction(y))

    @property
    def exact(self) -> bool:
        return isinstance(self.x, Fraction) and isinstance(self.y, Fraction)

    def moebius(self, m) -> UpperHalfPoint:
        a, b, c, d = m
        x, y = self.x, self.y
        norm = (c * x + d) ** 2 + (c * y) ** 2
        re = ((a * x + b) * (c * x + d) + a * c * y * y) / norm
        im = (a * d - b * c) * y / norm
        return UpperHalfPoint(re, im)

    def value(self, precision: int = DEFAULT_PRECISION) -> mpmath.mpc:
        with mpmath.workprec(precision):
            if self.exact:
                return mpmath.mpc(mpmath.mpf(self.x.numerator) / self.x.denominator,
                                  mpmath.mpf(self.y.numerator) / self.y.denominator)
            return mpmath.mpc(self.x, self.y)

    def to_json(self) -> dict:
        if self.exact:
            return {"re": fraction_str(self.x), "im": fraction_str(self.y)}
        return {"re": mpmath.nstr(self.x, 40), "im": mpmath.nstr(self.y, 40)}


def reduce_to_fundamental_domain(z: UpperHalfPoint) -> tuple[UpperHalfPoint, tuple]:
    """(w, gamma) with w = gamma z in the canonical fundamental domain.

    The domain is -1/2 <= Re w < 1/2, |w| >= 1, and Re w <= 0 when |w| = 1, so
    Gamma-equivalent exact points reduce to the same w.
    """
    if not z.exact:
        raise DegenerateInput("exact reduction needs rational coordinates")
    gamma = (1, 0, 0, 1)
    w = z
    while True:
        k = math.floor(w.x + Fraction(1, 2))
        if k:
            w = UpperHalfPoint(w.x - k, w.y)
            gamma = _mat_mul((1, -k, 0, 1), gamma)
        if w.x * w.x + w.y * w.y < 1:
            w = w.moebius(S_MATRIX)
            gamma = _mat_mul(S_MATRIX, gamma)
            continue
        break
    if w.x * w.x + w.y * w.y == 1 and w.x > 0:
        w = w.moebius(S_MATRIX)
        gamma = _mat_mul(S_MATRIX, gamma)
    return w, gamma


def stabilizer(w: UpperHalfPoint) -> tuple:
    """Stabilizer in SL2(Z) of a reduced exact point (the point e^{2 pi i/3} is irrational)."""
    ident, minus = (1, 0, 0, 1), (-1, 0, 0, -1)
    if w.x == 0 and w.y == 1:
        return ident, minus, S_MATRIX, (0, 1, -1, 0)
    return ident, minus


def z_cell(w: UpperHalfPoint) -> tuple[int, int]:
    """A coarse cell of the fundamental domain; base functions are constant on cells."""
    col = 0 if w.x < 0 else 1
    row = 0 if w.y < Fraction(5, 4) else 1 if w.y < 2 else 2
    return col, row


def gamma_action(g1: Mat2Q, g2: Mat2Q, g: Mat2Q, rho: Mat2Residue, z: UpperHalfPoint):
    """(g1 g g2^-1, g2 rho, g2 z) for g1, g2 in SL2(Z)."""
    for m in (g1, g2):
        if not m.is_integral() or m.det != 1:
            raise DegenerateInput("gamma_action needs elements of SL2(Z)")
    new_rho = rho.image(g2)
    return g1 * g * g2.inverse(), new_rho, g2.act_z(z)


def random_sl2(rng: random.Random, steps: int = 6) -> Mat2Q:
    m = (1, 0, 0, 1)
    for _ in range(steps):
        k = rng.randint(-3, 3)
        m = _mat_mul(m, (1, k, 0, 1) if rng.random() < 0.5 else (1, 0, k, 1))
        if rng.random() < 0.3:
            m = _mat_mul(m, S_MATRIX)
    return Mat2Q(*m)


# ---------------------------------------------------------------- C^* fibre and the quotient map


def cstar_embed(a, b, precision: int = DEFAULT_PRECISION) -> mpmath.matrix:
    """a + ib -> (a b; -b a)."""
    with mpmath.workprec(precision):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        if a == 0 and b == 0:
            raise DegenerateInput("0 is not in C^*")
        return mpmath.matrix([[a, b], [-b, a]])


def quotient_to_h(alpha, precision: int = DEFAULT_PRECISION) -> mpmath.mpc:
    """(a b; c d) -> (a i + b) / (c i + d) for det > 0."""
    with mpmath.workprec(precision + 10):
        if isinstance(alpha, Mat2Q):
            alpha = alpha.to_mp(precision + 10)
        m = mpmath.matrix(alpha)
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        if a * d - b * c <= 0:
            raise DegenerateInput("the quotient map needs det > 0")
        w = (a * 1j + b) / (c * 1j + d)
    with mpmath.workprec(precision):
        return +w


def alpha_of(z: UpperHalfPoint) -> Mat2Q:
    """The section alpha_z = (y x; 0 1), which maps i to z."""
    if not z.exact:
        raise DegenerateInput("alpha_of needs an exact point")
    return Mat2Q.of(z.y, z.x, 0, 1)


# ---------------------------------------------------------------- 2-d lattice data and eta


def _reduce_mod_lattice(v, basis):
    """Canonical representative of a rational vector modulo the lattice with row-HNF basis (a b; 0 d)."""
    a, b, _, d = basis
    k = math.floor(v[0] / a)
    x, y = v[0] - k * a, v[1] - k * b
    return x, y - math.floor(y / d) * d


def _rational_lattice_hnf(vectors):
    den = lcm(*(Fraction(c).denominator for v in vectors for c in v))
    rows = [(int(Fraction(v[0]) * den), int(Fraction(v[1]) * den)) for v in vectors]
    a, b, c, d = _lattice_hnf(rows)
    return tuple(Fraction(x, den) for x in (a, b, c, d))


@dataclass(frozen=True)
class Lattice2DData:
    """A 2-d Q-lattice: Lambda (row-HNF basis) and the images of e1/M, e2/M modulo Lambda."""

    basis: tuple
    label_level: int
    labels: tuple

    def contains(self, v) -> bool:
        return _reduce_mod_lattice(v, self.basis) == (0, 0)

    def to_json(self) -> dict:
        return {"basis": [fraction_str(x) for x in self.basis], "label_level": self.label_level,
                "labels": [[fraction_str(x) for x in v] for v in self.labels]}


def _lattice_data(m: Mat2Q, label_vectors, level: int) -> Lattice2DData:
    """Lattice m Z^2 (columns of m) with labels reduced modulo it."""
    e = m.entries
    basis = _rational_lattice_hnf([(e[0], e[2]), (e[1], e[3])])
    labels = tuple(_reduce_mod_lattice(v, basis) for v in label_vectors)
    return Lattice2DData(basis, level, labels)


def _apply(m: Mat2Q, v):
    e = m.entries
    return e[0] * v[0] + e[1] * v[1], e[2] * v[0] + e[3] * v[1]


def eta2(g: Mat2Q, rho: Mat2Residue, alpha) -> tuple[Lattice2DData, Lattice2DData]:
    """(g, rho, alpha) -> ((alpha^-1 g^-1 Z^2, alpha^-1 rho), (alpha^-1 Z^2, alpha^-1 rho)).

    ``alpha`` is a Mat2Q or an exact UpperHalfPoint z (then alpha = (y x; 0 1)).
    In the first datum rho is read through g*rho, which is where the
    integrality g*rho in M2(Z-hat) is used.
    """
    if isinstance(alpha, UpperHalfPoint):
        alpha = alpha_of(alpha)
    g_rho = rho.image(g)
    if g_rho is None:
        raise NotInSpace(f"g*rho is not integral for g = {g}")
    level = g_rho.level
    r = rho.reduce(level).entries
    gr = g_rho.entries
    cols = [(Fraction(r[0], level), Fraction(r[2], level)), (Fraction(r[1], level), Fraction(r[3], level))]
    gcols = [(Fraction(gr[0], level), Fraction(gr[2], level)), (Fraction(gr[1], level), Fraction(gr[3], level))]
    a_inv = alpha.inverse()
    first_map = a_inv * g.inverse()
    first = _lattice_data(first_map, [_apply(first_map, v) for v in gcols], level)
    second = _lattice_data(a_inv, [_apply(a_inv, v) for v in cols], level)
    return first, second


def commensurable_2d(l1: Lattice2DData, l2: Lattice2DData) -> bool:
    """Q Lambda1 = Q Lambda2 and phi1 - phi2 in Lambda1 + Lambda2.

    Both lattices here are rational of rank 2, so their rational spans agree;
    the label condition is checked against the HNF of the sum lattice.
    """
    if l1.label_level != l2.label_level:
        return False
    b1, b2 = l1.basis, l2.basis
    total = _rational_lattice_hnf([(b1[0], b1[1]), (b1[2], b1[3]), (b2[0], b2[1]), (b2[2], b2[3])])
    for u, v in zip(l1.labels, l2.labels):
        if _reduce_mod_lattice((u[0] - v[0], u[1] - v[1]), total) != (0, 0):
            return False
    return True


# ---------------------------------------------------------------- the convolution algebra


def _table_value(seed: int, key) -> int:
    digest = hashlib.blake2b(repr((seed, key)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") % 7 - 3


def _is_zero(v) -> bool:
    return v == 0


def _conj(v):
    return v.conjugate() if isinstance(v, mpmath.mpc) else v


@dataclass(frozen=True)
class Point:
    g: Mat2Q
    rho: Mat2Residue
    z: UpperHalfPoint

    def to_json(self) -> dict:
        return {"g": self.g.to_json(), "rho": self.rho.to_json(), "z": self.z.to_json()}


class GL2AlgebraElement:
    """A Gamma x Gamma-invariant, finitely supported function on U, evaluated lazily.

    Build base elements with ``base`` or ``identity`` and combine with +,
    scalar *, ``gl2_convolve``, ``gl2_involution`` and ``gl2_time_evolve``.
    """

    def __init__(self, op: str, args: tuple, mode: str, level: int, det_bound: int, data=None):
        self.op = op
        self.args = args
        self.mode = mode
        self.level = level
        self.det_bound = det_bound
        self.data = data

    # -- constructors

    @classmethod
    def base(cls, coset: DoubleCoset, seed: int, level: int = DEFAULT_TABLE_LEVEL, mode: str = EXACT,
             weight=1, table: Optional[Callable] = None) -> GL2AlgebraElement:
        """A function supported on one double coset, pseudo-random on (left coset, rho mod level, z cell)."""
        if mode not in (EXACT, NUMERIC):
            raise ValueError(f"unknown mode {mode!r}")
        weight = as_fraction(weight) if mode == EXACT else mpmath.mpc(weight)
        return cls("base", (), mode, level, coset.height,
                   {"coset": coset, "seed": seed, "weight": weight, "table": table})

    @classmethod
    def identity(cls, mode: str = EXACT) -> GL2AlgebraElement:
        """Supported on Gamma with constant value 1."""
        return cls.base(DoubleCoset(Fraction(1), 1), 0, 1, mode, 1, table=lambda k, rho, cell: 1)

    # -- structure

    @cached_property
    def support(self) -> frozenset:
        """Double cosets outside of which the function vanishes (possibly a superset)."""
        if self.op == "base":
            return frozenset([self.data["coset"]])
        if self.op in ("scale", "evolve"):
            return self.args[0].support
        if self.op == "sum":
            return self.args[0].support | self.args[1].support
        if self.op == "star":
            return frozenset(h.inverse() for h in self.args[0].support)
        f1, f2 = self.args
        out = set()
        for h1 in f1.support:
            for k in h1.left_cosets():
                for h2 in f2.support:
                    out.add((k * h2.rep).double_coset())
        return frozenset(out)

    def __add__(self, other: GL2AlgebraElement) -> GL2AlgebraElement:
        if self.mode != other.mode:
            raise ModeMismatch("cannot add exact and numeric elements")
        return GL2AlgebraElement("sum", (self, other), self.mode, lcm(self.level, other.level),
                                 max(self.det_bound, other.det_bound))

    def scale(self, c) -> GL2AlgebraElement:
        if self.mode == EXACT:
            if not isinstance(c, (int, Fraction)):
                raise ModeMismatch("exact elements take rational scalars")
            c = Fraction(c)
        else:
            c = mpmath.mpc(c)
        return GL2AlgebraElement("scale", (self,), self.mode, self.level, self.det_bound, c)

    def __mul__(self, other):
        if isinstance(other, GL2AlgebraElement):
            return gl2_convolve(self, other)
        return self.scale(other)

    def star(self) -> GL2AlgebraElement:
        return gl2_involution(self)

    def __call__(self, g: Mat2Q, rho: Mat2Residue, z: UpperHalfPoint):
        return self.evaluate(g, rho, z)

    def zero(self):
        return Fraction(0) if self.mode == EXACT else mpmath.mpc(0)

    # -- evaluation

    def evaluate(self, g: Mat2Q, rho: Mat2Residue, z: UpperHalfPoint):
        if self.mode == NUMERIC:
            with mpmath.workprec(DEFAULT_PRECISION + 16):
                return self._evaluate(g, rho, z)
        return self._evaluate(g, rho, z)

    def _evaluate(self, g: Mat2Q, rho: Mat2Residue, z: UpperHalfPoint):
        if g.double_coset() not in self.support:
            return self.zero()
        op = self.op
        if op == "base":
            return self._eval_base(g, rho, z)
        if op == "scale":
            return self.data * self.args[0].evaluate(g, rho, z)
        if op == "sum":
            return self.args[0].evaluate(g, rho, z) + self.args[1].evaluate(g, rho, z)
        if op == "evolve":
            return _det_power(g.det, self.data, self.mode) * self.args[0].evaluate(g, rho, z)
        if op == "star":
            g_rho = rho.image(g)
            if g_rho is None:
                return self.zero()
            return _conj(self.args[0].evaluate(g.inverse(), g_rho, g.act_z(z)))
        return self._eval_convolve(g, rho, z)

    def _eval_convolve(self, g, rho, z):
        f1, f2 = self.args
        total = self.zero()
        supp1 = f1.support
        for h2 in sorted(f2.support):
            for s in h2.left_cosets():
                rest = g * s.inverse()
                if rest.double_coset() not in supp1:
                    continue
                s_rho = rho.image(s)
                if s_rho is None:
                    continue
                v2 = f2.evaluate(s, rho, z)
                if _is_zero(v2):
                    continue
                total = total + f1.evaluate(rest, s_rho, s.act_z(z)) * v2
        return total

    def _eval_base(self, g, rho, z):
        if rho.image(g) is None:
            return self.zero()
        w, gamma_z = reduce_to_fundamental_domain(z)
        gz = Mat2Q(*gamma_z)
        moved = g * gz.inverse()
        rho_moved = rho.image(gz)
        data = self.data
        table = data["table"]
        cell = z_cell(w)
        stab = stabilizer(w)
        acc = 0
        for delta in stab:
            dm = Mat2Q(*delta)
            k = (moved * dm.inverse()).left_coset_rep()
            r = rho_moved.image(dm).reduce(self.level)
            if table is not None:
                acc += table(k, r.entries, cell)
            else:
                acc += _table_value(data["seed"], (k.integer_part, k.den, r.entries, cell))
        value = Fraction(acc, len(stab)) * data["weight"] if self.mode == EXACT else \
            mpmath.mpf(acc) / len(stab) * data["weight"]
        return value

    def to_json(self, points: Iterable[Point] = ()) -> dict:
        out = self._structure()
        points = list(points)
        if points:
            out["z_samples"] = [p.z.to_json() for p in points]
            out["points"] = [p.to_json() for p in points]
            out["values"] = [_value_json(self.evaluate(p.g, p.rho, p.z)) for p in points]
        return out

    def _structure(self) -> dict:
        base = {"op": self.op, "mode": self.mode, "level": self.level, "det_bound": self.det_bound}
        if self.op == "base":
            base["terms"] = [{**self.data["coset"].to_json(), "seed": self.data["seed"],
                              "weight": _value_json(self.data["weight"])}]
        elif self.op in ("scale", "evolve"):
            base["parameter"] = _value_json(self.data)
        if self.args:
            base["args"] = [a._structure() for a in self.args]
        return base

    def __repr__(self) -> str:
        return f"GL2AlgebraElement(op={self.op!r}, support={sorted(str(h) for h in self.support)})"


def _value_json(v):
    if isinstance(v, Fraction):
        return fraction_str(v)
    if isinstance(v, int):
        return str(v)
    with mpmath.workprec(DEFAULT_PRECISION):
        v = mpmath.mpc(v)
        return {"re": mpmath.nstr(v.real, 30), "im": mpmath.nstr(v.imag, 30)}


def _det_power(det: Fraction, t, mode: str):
    """det^{it}: exact rational for t = i*beta with integer beta."""
    beta = _imaginary_integer(t)
    if beta is not None:
        p = det ** (-beta)
        return p if mode == EXACT else mpmath.mpf(p.numerator) / p.denominator
    with mpmath.workprec(DEFAULT_PRECISION + 16):
        return mpmath.exp(1j * mpmath.mpc(t) * mpmath.log(mpmath.mpf(det.numerator) / det.denominator))


def _imaginary_integer(t) -> Optional[int]:
    z = mpmath.mpc(t)
    if z.real == 0 and z.imag == int(z.imag):
        return int(z.imag)
    return None


def gl2_convolve(f1: GL2AlgebraElement, f2: GL2AlgebraElement, det_cap: Optional[int] = DEFAULT_DET_CAP
                 ) -> GL2AlgebraElement:
    """(f1 * f2)(g, rho, z) = sum over s in Gamma\\GL2+(Q) with s rho integral of f1(g s^-1, s rho, s z) f2(s, rho, z)."""
    if f1.mode != f2.mode:
        raise ModeMismatch("cannot convolve exact and numeric elements")
    bound = f1.det_bound * f2.det_bound
    if det_cap is not None and bound > det_cap:
        raise DeterminantBoundExceeded(f"product determinant bound {bound} exceeds cap {det_cap}")
    return GL2AlgebraElement("convolve", (f1, f2), f1.mode, lcm(f1.level, f2.level), bound)


def gl2_involution(f: GL2AlgebraElement) -> GL2AlgebraElement:
    """f^*(g, rho, z) = conj f(g^-1, g rho, g z)."""
    return GL2AlgebraElement("star", (f,), f.mode, f.level, f.det_bound)


def gl2_time_evolve(f: GL2AlgebraElement, t) -> GL2AlgebraElement:
    """sigma_t(f)(g, rho, z) = det(g)^{it} f(g, rho, z)."""
    if _imaginary_integer(t) == 0:
        return f
    if f.mode == EXACT and _imaginary_integer(t) is None:
        raise ModeMismatch("det(g)^{it} is not rational for this t; use numeric elements")
    return GL2AlgebraElement("evolve", (f,), f.mode, f.level, f.det_bound, t)


# ---------------------------------------------------------------- random data for checks


def double_cosets_up_to(bound: int) -> list[DoubleCoset]:
    """Double cosets with determinant height <= bound and scalar 1/m or an integer."""
    out = []
    for m in range(1, bound + 1):
        for scalar in {Fraction(1, m), Fraction(m)}:
            for n in range(1, bound + 1):
                h = DoubleCoset(scalar, n)
                if h.height <= bound:
                    out.append(h)
    return sorted(set(out))


def random_element(rng: random.Random, det_bound: int = 6, max_terms: int = 3, level: int = DEFAULT_TABLE_LEVEL,
                   mode: str = EXACT) -> GL2AlgebraElement:
    cosets = double_cosets_up_to(det_bound)
    terms = rng.sample(cosets, rng.randint(1, min(max_terms, len(cosets))))
    out = None
    for h in terms:
        w = Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 3))
        if mode == NUMERIC:
            w = mpmath.mpc(float(w), rng.uniform(-1, 1))
        term = GL2AlgebraElement.base(h, rng.getrandbits(32), level, mode, w)
        out = term if out is None else out + term
    return out


def random_point(rng: random.Random, elements: Iterable[GL2AlgebraElement], ambient_level: int) -> Point:
    """A point whose g lies in the double coset of a product of support elements, in that order."""
    g = Mat2Q.identity()
    dens = 1
    for f in elements:
        h = rng.choice(sorted(f.support))
        k = rng.choice(h.left_cosets())
        g = g * k * random_sl2(rng)
        dens *= k.den
    g = random_sl2(rng) * g
    scale = rng.choice([d for d in divisors(dens * g.den) if ambient_level % d == 0])
    rho0 = Mat2Residue.random(rng, ambient_level)
    rho = Mat2Residue(ambient_level, tuple(scale * v for v in rho0.entries))
    z = UpperHalfPoint.of(Fraction(rng.randint(-20, 20), rng.randint(1, 7)), Fraction(rng.randint(1, 12), rng.randint(1, 7)))
    return Point(g, rho, z)
