"""One-dimensional Q-lattices, commensurability and the groupoid G.

A 1-d Q-lattice is written (lambda Z, lambda rho) with lambda > 0 and
rho in Z-hat.  Here lambda is a positive rational and rho is known modulo a
finite level, which keeps every predicate decidable.

Finite-level caveat: products n*rho are known modulo n*N and quotients rho/q
modulo N/q; comparisons are made at the finest level at which both sides are
determined.  Because Z/N has torsion while Z-hat does not, transitivity of
commensurability can fail for arbitrary level-N data (see
``tests/test_qlat1d.py``); it holds for chains that come from genuine
elements of Z-hat, which is what ``commensurable_chain`` builds.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import NotComposable, NotInGroupoid
from .numtower import QmodZ, ResidueEndo, as_fraction, fraction_str, lcm


@dataclass(frozen=True)
class QLattice1D:
    scale: Fraction
    rho: ResidueEndo

    def __post_init__(self):
        scale = as_fraction(self.scale)
        if scale <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "scale", scale)

    @property
    def level(self) -> int:
        return self.rho.level

    def normalized(self) -> QLattice1D:
        """The representative with scale 1 (the point of L1/R+ = R)."""
        return QLattice1D(Fraction(1), self.rho)

    def label(self, x: Fraction) -> Fraction:
        """phi(x) = lambda*rho(x) as a rational, meaningful modulo lambda*Z."""
        return self.scale * self.rho.apply(QmodZ.of(x)).as_fraction()

    def to_json(self) -> dict:
        return {"scale": fraction_str(self.scale), "level": self.level, "residue": self.rho.residue}

    @classmethod
    def from_json(cls, data) -> QLattice1D:
        return cls(Fraction(data["scale"]), ResidueEndo(int(data["level"]), int(data["residue"])))


def _ratio_witness(l1: QLattice1D, l2: QLattice1D) -> tuple[int, int]:
    ratio = l2.scale / l1.scale
    return ratio.numerator, ratio.denominator


def _witness_holds(l1: QLattice1D, l2: QLattice1D, m: int, n: int) -> bool:
    # m*lambda1 = n*lambda2 and n*rho1 = m*rho2, the latter compared where both are known
    if m * l1.scale != n * l2.scale:
        return False
    return l1.rho.times(n).agrees_with(l2.rho.times(m))


def commensurable(l1: QLattice1D, l2: QLattice1D) -> bool:
    return commensurability_witness(l1, l2) is not None


def commensurability_witness(l1: QLattice1D, l2: QLattice1D) -> Optional[tuple[int, int]]:
    """The coprime pair (m, n) with m/n = lambda2/lambda1, if it certifies commensurability.

    The coprime pair is unique, so it is also the lexicographically smallest.
    """
    m, n = _ratio_witness(l1, l2)
    return (m, n) if _witness_holds(l1, l2, m, n) else None


def validate_witness(l1: QLattice1D, l2: QLattice1D, witness: tuple[int, int]) -> bool:
    """True iff (m, n) certifies l1 ~ l2: m*lambda1 = n*lambda2 and n*rho1 = m*rho2."""
    m, n = witness
    return _witness_holds(l1, l2, m, n)


def commensurable_by_definition(l1: QLattice1D, l2: QLattice1D) -> bool:
    """Check phi1 - phi2 in Lambda1 + Lambda2 on every x in (1/N)Z/Z directly.

    Independent of the closed-form criterion used by ``commensurable``; N is the common level.
    """
    n_level = math.gcd(l1.level, l2.level)
    # Lambda1 + Lambda2 = g Z with g the rational gcd of the two scales
    a, b = l1.scale, l2.scale
    den = lcm(a.denominator, b.denominator)
    g = Fraction(math.gcd(a.numerator * (den // a.denominator), b.numerator * (den // b.denominator)), den)
    for j in range(n_level):
        x = Fraction(j, n_level)
        diff = a * ((l1.rho.residue * x) % 1) - b * ((l2.rho.residue * x) % 1)
        if (diff / g).denominator != 1:
            return False
    return True


@dataclass(frozen=True)
class GroupoidPoint:
    """(r, rho) in G = {(r, rho) in Q+ x R : r*rho in R}."""

    ratio: Fraction
    rho: ResidueEndo

    def __post_init__(self):
        ratio = as_fraction(self.ratio)
        if ratio <= 0:
            raise ValueError("ratio must be positive")
        object.__setattr__(self, "ratio", ratio)

    def in_groupoid(self) -> bool:
        q = self.ratio.denominator
        return self.rho.level % q == 0 and self.rho.residue % q == 0

    def check(self) -> GroupoidPoint:
        if not self.in_groupoid():
            raise NotInGroupoid(f"({fraction_str(self.ratio)}, {self.rho.residue} mod {self.rho.level}) is not in G")
        return self

    def source(self) -> ResidueEndo:
        return self.rho

    def target(self) -> ResidueEndo:
        """r*rho, known modulo N*p/q for r = p/q."""
        return self.check().rho.scale(self.ratio)

    def to_json(self) -> dict:
        return {"ratio": fraction_str(self.ratio), "level": self.rho.level, "residue": self.rho.residue}

    @classmethod
    def from_json(cls, data) -> GroupoidPoint:
        return cls(Fraction(data["ratio"]), ResidueEndo(int(data["level"]), int(data["residue"])))


def eta(p: GroupoidPoint) -> tuple[QLattice1D, QLattice1D]:
    """(r, rho) -> ((r^-1 Z, rho), (Z, rho)).

    The first lattice, written as (lambda Z, lambda rho'), has lambda = 1/r and
    rho' = r*rho.
    """
    p.check()
    first = QLattice1D(1 / p.ratio, p.target())
    second = QLattice1D(Fraction(1), p.rho)
    return first, second


def groupoid_compose(p1: GroupoidPoint, p2: GroupoidPoint) -> GroupoidPoint:
    """(r1, rho1) o (r2, rho2) = (r1 r2, rho2), defined when r2*rho2 = rho1."""
    p1.check()
    if not p2.target().agrees_with(p1.rho):
        raise NotComposable("target of the right factor differs from source of the left factor")
    out = GroupoidPoint(p1.ratio * p2.ratio, p2.rho)
    if not out.in_groupoid():
        raise NotComposable("composite fails membership at this level")
    return out


def random_lattice(rng: random.Random, level: int, max_height: int = 12) -> QLattice1D:
    scale = Fraction(rng.randint(1, max_height), rng.randint(1, max_height))
    return QLattice1D(scale, ResidueEndo(level, rng.randrange(level)))


def _coprime_ratio(rng: random.Random, max_height: int) -> Fraction:
    while True:
        m, n = rng.randint(1, max_height), rng.randint(1, max_height)
        if math.gcd(m, n) == 1:
            return Fraction(m, n)


def commensurable_chain(rng: random.Random, level: int, length: int = 3, max_height: int = 12) -> list[QLattice1D]:
    """Lattices L1 ~ L2 ~ ... built by applying random witnesses.

    Each step multiplies the scale by a random m/n.  All labels are integer
    multiples c_i*tau of one tau in Z-hat with c_i*lambda_i constant, which is
    the shape of commensurable data in Z-hat (n rho_i = m rho_j over Z).
    """
    scales = [Fraction(rng.randint(1, max_height), rng.randint(1, max_height))]
    for _ in range(length - 1):
        scales.append(scales[-1] * _coprime_ratio(rng, max_height))
    # c_i = C / lambda_i must be integers
    c_const = lcm(*(s.numerator for s in scales))
    tau = rng.randrange(level)
    return [QLattice1D(s, ResidueEndo(level, (c_const / s).numerator * tau)) for s in scales]


def random_composable(rng: random.Random, level: int, count: int = 3, max_height: int = 6) -> list[GroupoidPoint]:
    """Points p1, ..., pk with p_i o p_{i+1} defined, listed left to right.

    The rightmost source is chosen divisible enough that every partial
    product stays inside G at the working level.
    """
    ratios = [_coprime_ratio(rng, max_height) for _ in range(count)]
    den_all = math.prod(r.denominator for r in ratios)
    work = level * den_all
    rho = ResidueEndo(work, den_all * rng.randrange(work))
    points = []
    for r in reversed(ratios):
        p = GroupoidPoint(r, rho).check()
        points.append(p)
        rho = p.target()
    return points[::-1]
