"""Cyclotomic Galois groups at finite conductor and the intertwining check.

(Z/b)^* appears twice: as Gal(Q(zeta_b)/Q) acting on coefficients, and as
symmetries of Q[Q/Z] acting on generators by e(a/b) -> e(u a/b).  The
reciprocity map between them is the identity on exponents; the two sides are
kept as separate types so the intertwining check compares genuinely
different computations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import mpmath

from .errors import LevelMismatch, NonInvertible
from .kms import beta_str, ground_state, hurwitz_expansion, low_temp_state
from .numtower import DEFAULT_PRECISION, Cyclotomic, QmodZ, lcm, units_mod


def unit_group(b: int) -> list[int]:
    """Representatives of (Z/b)^*; for b = 1 the trivial group {0}."""
    return [0] if b == 1 else units_mod(b)


@dataclass(frozen=True)
class GaloisElement:
    """zeta_b -> zeta_b^u in Gal(Q(zeta_b)/Q)."""

    conductor: int
    exponent: int

    def __post_init__(self):
        if self.conductor < 1:
            raise ValueError("conductor must be positive")
        u = self.exponent % self.conductor
        if math.gcd(u, self.conductor) != 1:
            raise NonInvertible(f"{self.exponent} is not a unit modulo {self.conductor}")
        object.__setattr__(self, "exponent", u)

    def __matmul__(self, other: GaloisElement) -> GaloisElement:
        """Composition (self after other)."""
        b = lcm(self.conductor, other.conductor)
        return GaloisElement(b, _lift_unit(self, b) * _lift_unit(other, b))

    def inverse(self) -> GaloisElement:
        if self.conductor == 1:
            return self
        return GaloisElement(self.conductor, pow(self.exponent, -1, self.conductor))

    def theta(self) -> SymmetryElement:
        """The reciprocity image, as a symmetry of Q[Q/Z]."""
        return SymmetryElement(self.conductor, self.exponent)


@dataclass(frozen=True)
class SymmetryElement:
    """u in (Z/b)^* acting on Q[Q/Z] by e(a/b) -> e(u a / b) on denominators dividing b."""

    conductor: int
    exponent: int

    def __post_init__(self):
        u = self.exponent % self.conductor
        if math.gcd(u, self.conductor) != 1:
            raise NonInvertible(f"{self.exponent} is not a unit modulo {self.conductor}")
        object.__setattr__(self, "exponent", u)


def _lift_unit(g: GaloisElement, b: int) -> int:
    """An exponent mod b (b a multiple of the conductor) restricting to g."""
    u = g.exponent
    if g.conductor == b:
        return u
    # any lift congruent to u mod conductor and coprime to b
    for k in range(b // g.conductor):
        cand = u + k * g.conductor
        if math.gcd(cand, b) == 1:
            return cand
    raise NonInvertible(f"no unit lift of {u} mod {g.conductor} to modulus {b}")


def galois_apply(g: GaloisElement, x: Cyclotomic) -> Cyclotomic:
    """zeta_b^k -> zeta_b^{uk}; x may have any conductor dividing a multiple of b."""
    b = lcm(g.conductor, x.conductor)
    return x.raise_to(b).galois(_lift_unit(g, b))


def theta_on_generator(g: GaloisElement | SymmetryElement, r: QmodZ) -> QmodZ:
    if not isinstance(r, QmodZ):
        r = QmodZ.of(r)
    if g.conductor % r.den:
        raise LevelMismatch(f"denominator {r.den} does not divide conductor {g.conductor}")
    return r * g.exponent


@dataclass
class IntertwiningRow:
    b: int
    beta: object
    u: int
    iota: int
    a: int
    lhs: object
    rhs: object
    passed: bool
    bound: mpmath.mpf

    def to_json(self) -> dict:
        def show(v):
            if isinstance(v, Cyclotomic):
                return str(v)
            return {"re": mpmath.nstr(v.real, 20), "im": mpmath.nstr(v.imag, 20)}

        return {"b": self.b, "beta": beta_str(self.beta), "u": self.u, "iota": self.iota, "a": self.a,
                "lhs": show(self.lhs), "rhs": show(self.rhs), "pass": self.passed,
                "bound": mpmath.nstr(self.bound, 6)}


def _is_infinite(beta) -> bool:
    if isinstance(beta, str):
        return beta.strip().lower() in ("inf", "infinity", "oo")
    return isinstance(beta, float) and math.isinf(beta)


def intertwining_check(b: int, beta, u: int, iota: int = 1, precision: int = DEFAULT_PRECISION,
                       tolerance: Optional[float] = None) -> list[IntertwiningRow]:
    """Compare gamma_u(phi(e(a/b))) with phi(e(u a/b)) for a = 0 and every unit a.

    At beta = infinity phi is the ground state and the comparison is exact.
    For finite beta > 1 the left side applies gamma_u to the root-of-unity
    symbols of the Hurwitz expansion of phi(e(a/b)); the right side evaluates
    phi(e(u a/b)) from scratch.  A row passes when the distance is within the
    summed bounds (and ``tolerance``, if given).
    """
    g = GaloisElement(b, u)
    sym = g.theta()
    if b > 1 and math.gcd(iota, b) != 1:
        raise NonInvertible(f"iota exponent {iota} is not a unit modulo {b}")
    rows = []
    for a in [0] + [a for a in unit_group(b) if a]:
        r = QmodZ(a, b)
        moved = theta_on_generator(sym, r)
        if _is_infinite(beta):
            lhs = galois_apply(g, ground_state(r, iota))
            rhs = ground_state(moved, iota)
            rows.append(IntertwiningRow(b, math.inf, g.exponent, iota, a, lhs, rhs, lhs == rhs, mpmath.mpf(0)))
            continue
        if r.den == 1:
            lhs_val, lhs_bound = mpmath.mpc(1), mpmath.mpf(0)
        else:
            expansion = hurwitz_expansion(r.den, beta, precision)
            # gamma_u acts on iota(zeta^{a k}) = zeta^{iota a k} by raising to the u-th power
            left = expansion.evaluate(r.num, (iota * g.exponent) % b)
            lhs_val, lhs_bound = left.value, left.error_bound
        right = low_temp_state(moved, beta, iota, precision=precision)
        rhs_val = right.complex_value(precision)
        bound = lhs_bound + right.error_bound
        dist = abs(lhs_val - rhs_val)
        ok = dist <= bound and (tolerance is None or dist <= tolerance)
        rows.append(IntertwiningRow(b, beta, g.exponent, iota, a, lhs_val, rhs_val, ok, bound))
    return rows


def verify_all(b: int, beta, iota: int = 1, precision: int = DEFAULT_PRECISION,
               tolerance: Optional[float] = None) -> list[IntertwiningRow]:
    rows = []
    for u in unit_group(b):
        rows.extend(intertwining_check(b, beta, u if b > 1 else 1, iota, precision, tolerance))
    return rows
