"""Exact and high-precision arithmetic substrate.

Four value types live here:

``QmodZ``
    reduced fractions a/b standing for classes in Q/Z;
``ResidueEndo``
    an endomorphism of Q/Z (an element of Z-hat) known modulo a level N;
``Cyclotomic``
    exact elements of Q(zeta_N) kept in the power basis modulo the N-th
    cyclotomic polynomial;
``BigComplex``
    an mpmath complex value together with an error bound.

All of them are immutable.  ``hurwitz_zeta`` is an Euler-Maclaurin evaluation
that reports a rigorous remainder bound.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import mpmath

from .errors import DomainError, LevelMismatch, NonInvertible

DEFAULT_PRECISION = 128
DEFAULT_LEVEL = 24

RationalLike = Union[int, Fraction, str]


def as_fraction(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not a rational: {x!r}")


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def euler_phi(n: int) -> int:
    out = n
    for p in prime_factors(n):
        out -= out // p
    return out


def units_mod(n: int) -> list[int]:
    """Representatives of (Z/n)^*; for n = 1 this is [0]."""
    if n == 1:
        return [0]
    return [u for u in range(1, n) if math.gcd(u, n) == 1]


def to_mpf(x) -> mpmath.mpf:
    """Exact conversion of ints, Fractions and decimal strings to mpf."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        if "/" in x:
            return to_mpf(Fraction(x))
        return mpmath.mpf(x)
    return mpmath.mpf(x)


# ---------------------------------------------------------------- Q/Z


@dataclass(frozen=True, order=True)
class QmodZ:
    """A class in Q/Z stored as the reduced fraction num/den with 0 <= num < den."""

    num: int
    den: int = 1

    def __post_init__(self):
        num, den = self.num, self.den
        if den == 0:
            raise ValueError("zero denominator")
        if den < 0:
            num, den = -num, -den
        num %= den
        g = math.gcd(num, den)
        if g > 1:
            num, den = num // g, den // g
        if num == 0:
            den = 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def of(cls, x: RationalLike) -> QmodZ:
        x = as_fraction(x)
        return cls(x.numerator, x.denominator)

    @classmethod
    def level_elements(cls, level: int) -> tuple[QmodZ, ...]:
        """All of (1/level)Z/Z in the order k = 0, 1, ..., level - 1."""
        return tuple(cls(k, level) for k in range(level))

    def __add__(self, other: QmodZ) -> QmodZ:
        return QmodZ(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> QmodZ:
        return QmodZ(-self.num, self.den)

    def __sub__(self, other: QmodZ) -> QmodZ:
        return self + (-other)

    def __mul__(self, n: int) -> QmodZ:
        if not isinstance(n, int):
            return NotImplemented
        return QmodZ(self.num * n, self.den)

    __rmul__ = __mul__

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def is_zero(self) -> bool:
        return self.num == 0

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    def to_json(self) -> dict:
        return {"num": self.num, "den": self.den}

    @classmethod
    def from_json(cls, data: Mapping) -> QmodZ:
        return cls(int(data["num"]), int(data["den"]))


def qmodz_add(a: QmodZ, b: QmodZ) -> QmodZ:
    return a + b


# ---------------------------------------------------------------- Z-hat at level N


@dataclass(frozen=True)
class ResidueEndo:
    """rho in Hom(Q/Z, Q/Z) = Z-hat, known modulo ``level``."""

    level: int
    residue: int = 0

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be positive")
        object.__setattr__(self, "residue", self.residue % self.level)

    def apply(self, r: QmodZ) -> QmodZ:
        """rho(r), an element of (1/N)Z/Z."""
        if self.level % r.den:
            raise LevelMismatch(f"denominator {r.den} does not divide level {self.level}")
        return QmodZ(self.residue * r.num * (self.level // r.den), self.level)

    def refinements(self, level: int) -> tuple[ResidueEndo, ...]:
        """Every residue at the finer ``level`` that projects onto this one."""
        if level % self.level:
            raise LevelMismatch(f"{self.level} does not divide {level}")
        return tuple(ResidueEndo(level, self.residue + j * self.level) for j in range(level // self.level))

    def lift(self, level: int) -> ResidueEndo:
        """The smallest non-negative refinement (one choice among ``refinements``)."""
        if level % self.level:
            raise LevelMismatch(f"{self.level} does not divide {level}")
        return ResidueEndo(level, self.residue)

    def project(self, level: int) -> ResidueEndo:
        if self.level % level:
            raise LevelMismatch(f"{level} does not divide {self.level}")
        return ResidueEndo(level, self.residue)

    def times(self, n: int) -> ResidueEndo:
        """n*rho; multiplying by n makes the result known modulo n*N."""
        if n < 1:
            raise ValueError("multiplier must be positive")
        return ResidueEndo(self.level * n, self.residue * n)

    def divisible_by(self, q: int) -> bool:
        """Whether rho in qR, decided at this level (needs q | N)."""
        if self.level % q:
            raise LevelMismatch(f"cannot decide divisibility by {q} at level {self.level}")
        return self.residue % q == 0

    def divide(self, q: int) -> ResidueEndo:
        """rho/q, known modulo N/q."""
        if not self.divisible_by(q):
            raise ValueError(f"{self.residue} mod {self.level} is not divisible by {q}")
        return ResidueEndo(self.level // q, self.residue // q)

    def scale(self, r: RationalLike) -> ResidueEndo:
        """r*rho for positive rational r = p/q with r*rho in R."""
        r = as_fraction(r)
        return self.divide(r.denominator).times(r.numerator)

    def agrees_with(self, other: ResidueEndo) -> bool:
        """Equality modulo the gcd of the two levels (the finest common information)."""
        g = math.gcd(self.level, other.level)
        return (self.residue - other.residue) % g == 0

    def is_unit(self) -> bool:
        return math.gcd(self.residue, self.level) == 1

    def to_json(self) -> dict:
        return {"level": self.level, "residue": self.residue}

    @classmethod
    def from_json(cls, data: Mapping) -> ResidueEndo:
        return cls(int(data["level"]), int(data["residue"]))


def residue_apply(rho: ResidueEndo, r: QmodZ) -> QmodZ:
    return rho.apply(r)


# ---------------------------------------------------------------- cyclotomic numbers


@functools.lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, constant term first."""
    # x^n - 1 divided by Phi_d for every proper divisor d
    poly = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        div = cyclotomic_polynomial(d)
        quotient = [0] * (len(poly) - len(div) + 1)
        rem = list(poly)
        for i in range(len(quotient) - 1, -1, -1):
            c = rem[i + len(div) - 1]
            quotient[i] = c
            if c:
                for j, dj in enumerate(div):
                    rem[i + j] -= c * dj
        poly = quotient
    return tuple(poly)


@functools.lru_cache(maxsize=None)
def _power_rows(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Row k is x^k reduced modulo Phi_n, as sparse (exponent, coeff) pairs."""
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    rows = []
    cur = {0: 1}
    for _ in range(n):
        rows.append(tuple(sorted(cur.items())))
        nxt = {}
        for e, c in cur.items():
            e += 1
            if e == deg:
                for j in range(deg):
                    if phi[j]:
                        nxt[j] = nxt.get(j, 0) - c * phi[j]
            else:
                nxt[e] = nxt.get(e, 0) + c
        cur = {e: c for e, c in nxt.items() if c}
    return tuple(rows)


def _reduce(n: int, coeffs: Iterable[tuple[int, Fraction]]) -> tuple[tuple[int, Fraction], ...]:
    rows = _power_rows(n)
    acc: dict[int, Fraction] = {}
    for k, c in coeffs:
        if not c:
            continue
        for e, m in rows[k % n]:
            acc[e] = acc.get(e, 0) + c * m
    return tuple(sorted((e, c) for e, c in acc.items() if c))


class Cyclotomic:
    """An element sum_k c_k zeta_N^k of Q(zeta_N) with rational c_k.

    The stored form is the remainder modulo Phi_N, so two values of the same
    conductor are equal iff their stored tuples are.  Values of different
    conductors are compared in Q(zeta_lcm).

    >>> z4 = Cyclotomic.root_of_unity(4, 1)
    >>> z4 * z4 == Cyclotomic.rational(-1)
    True
    """

    __slots__ = ("conductor", "coeffs")

    def __init__(self, conductor: int, coeffs: Mapping[int, RationalLike] | Iterable = ()):
        if conductor < 1:
            raise ValueError("conductor must be positive")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        pairs = [(int(k), as_fraction(c) if not isinstance(c, int) else c) for k, c in items]
        object.__setattr__(self, "conductor", conductor)
        object.__setattr__(self, "coeffs", _reduce(conductor, pairs))

    def __setattr__(self, key, value):
        raise AttributeError("Cyclotomic is immutable")

    @classmethod
    def _raw(cls, conductor: int, reduced: tuple) -> Cyclotomic:
        obj = object.__new__(cls)
        object.__setattr__(obj, "conductor", conductor)
        object.__setattr__(obj, "coeffs", reduced)
        return obj

    @classmethod
    def rational(cls, x: RationalLike) -> Cyclotomic:
        x = as_fraction(x)
        return cls._raw(1, ((0, x),) if x else ())

    @classmethod
    def zero(cls) -> Cyclotomic:
        return cls._raw(1, ())

    @classmethod
    def one(cls) -> Cyclotomic:
        return cls._raw(1, ((0, 1),))

    @classmethod
    def root_of_unity(cls, n: int, k: int = 1) -> Cyclotomic:
        """zeta_n^k with zeta_n = exp(2 pi i / n) under the standard embedding."""
        return cls._raw(n, _power_rows(n)[k % n])

    @property
    def degree(self) -> int:
        return euler_phi(self.conductor)

    def raise_to(self, conductor: int) -> Cyclotomic:
        if conductor == self.conductor:
            return self
        if conductor % self.conductor:
            raise LevelMismatch(f"conductor {self.conductor} does not divide {conductor}")
        step = conductor // self.conductor
        return Cyclotomic._raw(conductor, _reduce(conductor, ((k * step, c) for k, c in self.coeffs)))

    def _common(self, other: Cyclotomic) -> tuple[Cyclotomic, Cyclotomic]:
        n = lcm(self.conductor, other.conductor)
        return self.raise_to(n), other.raise_to(n)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_rational(self) -> bool:
        return not self.coeffs or (len(self.coeffs) == 1 and self.coeffs[0][0] == 0)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.rational(other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        if self.conductor == other.conductor:
            return self.coeffs == other.coeffs
        a, b = self._common(other)
        return a.coeffs == b.coeffs

    __hash__ = None  # equality crosses conductors

    def __add__(self, other) -> Cyclotomic:
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.rational(other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._common(other) if self.conductor != other.conductor else (self, other)
        acc = dict(a.coeffs)
        for e, c in b.coeffs:
            acc[e] = acc.get(e, 0) + c
        return Cyclotomic._raw(a.conductor, tuple(sorted((e, c) for e, c in acc.items() if c)))

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic._raw(self.conductor, tuple((e, -c) for e, c in self.coeffs))

    def __sub__(self, other) -> Cyclotomic:
        return self + (-other)

    def __rsub__(self, other) -> Cyclotomic:
        return (-self) + other

    def __mul__(self, other) -> Cyclotomic:
        if isinstance(other, (int, Fraction)):
            if not other:
                return Cyclotomic._raw(self.conductor, ())
            return Cyclotomic._raw(self.conductor, tuple((e, c * other) for e, c in self.coeffs))
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        if other.is_rational():
            return self * (other.coeffs[0][1] if other.coeffs else 0)
        if self.is_rational():
            return other * (self.coeffs[0][1] if self.coeffs else 0)
        a, b = self._common(other) if self.conductor != other.conductor else (self, other)
        n = a.conductor
        prod: dict[int, Fraction] = {}
        for e1, c1 in a.coeffs:
            for e2, c2 in b.coeffs:
                e = (e1 + e2) % n
                prod[e] = prod.get(e, 0) + c1 * c2
        return Cyclotomic._raw(n, _reduce(n, prod.items()))

    __rmul__ = __mul__

    def conjugate(self) -> Cyclotomic:
        """Complex conjugation, zeta_N -> zeta_N^(N-1)."""
        return self.galois(-1)

    def galois(self, u: int) -> Cyclotomic:
        """The automorphism zeta_N -> zeta_N^u (u a unit mod N)."""
        n = self.conductor
        if n > 1 and math.gcd(u, n) != 1:
            raise NonInvertible(f"{u} is not a unit modulo {n}")
        return Cyclotomic._raw(n, _reduce(n, ((e * u % n, c) for e, c in self.coeffs)))

    def embed(self, u: int = 1, precision: int = DEFAULT_PRECISION) -> mpmath.mpc:
        """Complex value under zeta_N -> exp(2 pi i u / N)."""
        n = self.conductor
        with mpmath.workprec(precision + 10):
            total = mpmath.mpc(0)
            for e, c in self.coeffs:
                total += to_mpf(Fraction(c)) * mpmath.expjpi(mpmath.mpf(2 * e * u) / n)
            return total

    def __complex__(self) -> complex:
        return complex(self.embed(precision=64))

    def __repr__(self) -> str:
        return f"Cyclotomic({self.conductor}, {dict(self.coeffs)!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e, c in self.coeffs:
            c = Fraction(c)
            if e == 0:
                parts.append(str(c))
            else:
                mono = f"zeta_{self.conductor}^{e}"
                parts.append(mono if c == 1 else f"-{mono}" if c == -1 else f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "conductor": self.conductor,
            "coeffs": {str(e): fraction_str(Fraction(c)) for e, c in self.coeffs},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Cyclotomic:
        return cls(int(data["conductor"]), {int(k): Fraction(v) for k, v in data["coeffs"].items()})


def cyclotomic_mul(x: Cyclotomic, y: Cyclotomic) -> Cyclotomic:
    return x * y


def cyclotomic_eq(x: Cyclotomic, y: Cyclotomic) -> bool:
    return x == y


# ---------------------------------------------------------------- bounded complex values


@dataclass(frozen=True)
class BigComplex:
    """An arbitrary-precision complex number reported as value +- error_bound."""

    re: mpmath.mpf
    im: mpmath.mpf = field(default_factory=lambda: mpmath.mpf(0))
    precision: int = DEFAULT_PRECISION
    error_bound: mpmath.mpf = field(default_factory=lambda: mpmath.mpf(0))

    @classmethod
    def from_value(cls, z, precision: int = DEFAULT_PRECISION, error_bound=0) -> BigComplex:
        with mpmath.workprec(precision):
            z = mpmath.mpc(z)
            return cls(+z.real, +z.imag, precision, mpmath.mpf(error_bound))

    @property
    def value(self) -> mpmath.mpc:
        return mpmath.mpc(self.re, self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def distance(self, other) -> mpmath.mpf:
        with mpmath.workprec(self.precision + 10):
            z = other.value if isinstance(other, BigComplex) else mpmath.mpc(other)
            return abs(self.value - z)

    def agrees_with(self, other, slack=0) -> bool:
        """|self - other| <= sum of both error bounds (+ slack)."""
        other_bound = other.error_bound if isinstance(other, BigComplex) else 0
        return self.distance(other) <= self.error_bound + other_bound + slack

    def to_json(self) -> dict:
        digits = int(self.precision * 0.30103) + 2
        return {
            "re": mpmath.nstr(self.re, digits, min_fixed=-4, max_fixed=4),
            "im": mpmath.nstr(self.im, digits, min_fixed=-4, max_fixed=4),
            "precision": self.precision,
            "error_bound": mpmath.nstr(self.error_bound, 6),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> BigComplex:
        prec = int(data.get("precision", DEFAULT_PRECISION))
        with mpmath.workprec(prec):
            return cls(mpmath.mpf(data["re"]), mpmath.mpf(data["im"]), prec, mpmath.mpf(data.get("error_bound", 0)))


def hurwitz_zeta(beta, a: RationalLike = 1, *, precision: int = DEFAULT_PRECISION, tol=None) -> BigComplex:
    """sum_{n>=0} (n + a)^(-beta) for real beta > 1 and rational a in (0, 1].

    Euler-Maclaurin with N direct terms.  For real beta the derivatives of
    (x + a)^(-beta) alternate in sign and are monotone, so the remainder after
    the last Bernoulli correction is bounded by the first omitted one.
    """
    a = as_fraction(a)
    if not 0 < a <= 1:
        raise DomainError(f"shift must lie in (0, 1], got {a}")
    work = precision + 24
    with mpmath.workprec(work):
        s = to_mpf(beta)
        if s <= 1:
            raise DomainError(f"Hurwitz zeta series diverges for beta = {beta}")
        target = mpmath.mpf(2) ** (-(precision - 8)) if tol is None else mpmath.mpf(tol)
        shift = to_mpf(a)
        n_direct = max(10, precision // 4)
        while True:
            x = n_direct + shift
            head = mpmath.fsum((k + shift) ** (-s) for k in range(n_direct))
            total = head + x ** (1 - s) / (s - 1) + x ** (-s) / 2
            rising = s  # s (s+1) ... (s+2j-2)
            xpow = x ** (-s - 1)
            inv_x2 = 1 / (x * x)
            prev = None
            remainder = None
            for j in range(1, 4 * n_direct):
                term = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * xpow
                if abs(term) <= target / 4:
                    remainder = abs(term)
                    break
                if prev is not None and abs(term) >= abs(prev):
                    break  # asymptotic series turned around; need more direct terms
                total += term
                prev = term
                rising *= (s + 2 * j - 1) * (s + 2 * j)
                xpow *= inv_x2
            if remainder is not None:
                break
            n_direct *= 2
        rounding = abs(total) * mpmath.mpf(2) ** (-(precision + 4))
        bound = remainder + rounding
        return BigComplex(+total, mpmath.mpf(0), precision, bound)
