"""KMS and Gibbs states.

Two settings live here.  ``FiniteDynSystem`` is a matrix algebra with time
evolution sigma_t(x) = e^{itH} x e^{-itH}, its Gibbs states and the algebraic
KMS boundary identity phi(x sigma_{i beta}(y)) = phi(y x).  The rest evaluates
the equilibrium states of the Bost-Connes system on the generators e(a/b):

* 0 < beta <= 1: the closed product formula over the primes dividing b;
* beta > 1: Z(beta)^{-1} sum_n n^{-beta} iota(zeta_{a/b}^n), by a Hurwitz-zeta
  grouping (returned) cross-checked against a truncated Dirichlet sum;
* beta = infinity: the exact root of unity.

Every numeric value carries an error bound; float series from the kernels are
bounded by an integral tail estimate plus a rounding allowance.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import mpmath

from . import kernels
from .errors import ConsistencyError, DomainError, NonInvertible
from .numtower import (
    DEFAULT_PRECISION,
    BigComplex,
    Cyclotomic,
    QmodZ,
    RationalLike,
    hurwitz_zeta,
    prime_factors,
    to_mpf,
)

DEFAULT_TRUNCATION = 10 ** 5


def beta_str(beta) -> str:
    if isinstance(beta, float) and math.isinf(beta):
        return "inf"
    if isinstance(beta, Fraction):
        return str(beta.numerator) if beta.denominator == 1 else f"{beta.numerator}/{beta.denominator}"
    return str(beta)


def _as_element(r) -> QmodZ:
    return r if isinstance(r, QmodZ) else QmodZ.of(r)


def _check_unit(u: int, b: int):
    if math.gcd(u, b) != 1:
        raise NonInvertible(f"iota exponent {u} is not a unit modulo {b}")


@dataclass
class StateValue:
    """phi_beta(x) together with a bound on |reported - true|."""

    value: BigComplex | Cyclotomic
    error_bound: mpmath.mpf
    beta: object
    method: str = ""
    element: Optional[QmodZ] = None
    iota: Optional[int] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.value, Cyclotomic) and self.error_bound != 0:
            raise ValueError("exact values carry a zero error bound")
        self.error_bound = mpmath.mpf(self.error_bound)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Cyclotomic)

    def complex_value(self, precision: int = DEFAULT_PRECISION) -> mpmath.mpc:
        if isinstance(self.value, Cyclotomic):
            return self.value.embed(1, precision)
        return self.value.value

    def agrees_with(self, other: StateValue | complex, slack=0) -> bool:
        if isinstance(other, StateValue):
            dist = abs(self.complex_value() - other.complex_value())
            return dist <= self.error_bound + other.error_bound + slack
        return abs(self.complex_value() - mpmath.mpc(other)) <= self.error_bound + slack

    def to_json(self) -> dict:
        if isinstance(self.value, Cyclotomic):
            value = str(self.value)
        else:
            js = self.value.to_json()
            value = {"re": js["re"], "im": js["im"]}
        return {
            "beta": beta_str(self.beta),
            "element": None if self.element is None else str(self.element),
            "iota": self.iota,
            "value": value,
            "error_bound": mpmath.nstr(self.error_bound, 6),
            "method": self.method,
        }


@dataclass(frozen=True)
class TruncationPolicy:
    """Keep n <= max_terms; bound the rest of sum n^-beta by an integral."""

    max_terms: int = DEFAULT_TRUNCATION
    tail_bound_method: str = "integral"

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")
        if self.tail_bound_method != "integral":
            raise ValueError(f"unknown tail bound method {self.tail_bound_method!r}")

    def tail_bound(self, beta: float, rounding: float = 0.0) -> float:
        """Upper bound for sum_{n>M} n^-beta, absorbing ``rounding`` when possible.

        By convexity n^-beta <= integral over [n-1/2, n+1/2], so the tail is
        below (M+1/2)^{1-beta}/(beta-1).  The gap to the reported M^{1-beta}/(beta-1)
        is used to absorb float rounding of the partial sum.
        """
        if beta <= 1:
            raise DomainError("the tail of sum n^-beta diverges for beta <= 1")
        m = self.max_terms
        plain = m ** (1.0 - beta) / (beta - 1.0)
        tight = (m + 0.5) ** (1.0 - beta) / (beta - 1.0)
        return max(plain, tight + rounding)


def _rounding(sum_abs: float) -> float:
    return kernels.ROUNDING_ULPS * kernels.UNIT_ROUNDOFF * sum_abs


# ---------------------------------------------------------------- finite-dimensional systems


class FiniteDynSystem:
    """M_dim(C) with time evolution generated by a Hermitian H."""

    def __init__(self, H, precision: int = DEFAULT_PRECISION):
        self.precision = precision
        with mpmath.workprec(precision):
            H = mpmath.matrix(H)
            if H.rows != H.cols:
                raise ValueError("H must be square")
            tol = mpmath.mpf(2) ** (-(precision - 8))
            scale = max([1] + [abs(H[i, j]) for i in range(H.rows) for j in range(H.cols)])
            for i in range(H.rows):
                for j in range(H.cols):
                    if abs(H[i, j] - mpmath.conj(H[j, i])) > tol * scale:
                        raise ValueError("H is not Hermitian")
            self.H = H
            self.dim = H.rows
            with mpmath.workprec(precision + 32):
                E, Q = mpmath.eighe(H)
            self.eigenvalues = [mpmath.re(e) for e in E]
            self.eigenvectors = Q
        self._exp_cache: dict = {}

    @classmethod
    def diagonal(cls, entries, precision: int = DEFAULT_PRECISION) -> FiniteDynSystem:
        with mpmath.workprec(precision):
            return cls(mpmath.diag([to_mpf(e) for e in entries]), precision)

    @classmethod
    def random(cls, rng: random.Random, dim: int, precision: int = DEFAULT_PRECISION) -> FiniteDynSystem:
        return cls(random_hermitian(rng, dim, precision), precision)

    @property
    def spread(self) -> mpmath.mpf:
        return max(self.eigenvalues) - min(self.eigenvalues)

    def exp_h(self, s) -> mpmath.matrix:
        """e^{sH} by the spectral decomposition, for complex s."""
        key = complex(s) if not isinstance(s, mpmath.mpc) else (s.real, s.imag)
        hit = self._exp_cache.get(key)
        if hit is not None:
            return hit
        with mpmath.workprec(self.precision + 16):
            s = mpmath.mpc(s)
            Q = self.eigenvectors
            D = mpmath.diag([mpmath.exp(s * e) for e in self.eigenvalues])
            out = Q * D * Q.H
        self._exp_cache[key] = out
        return out

    def sigma(self, t, x) -> mpmath.matrix:
        """sigma_t(x) = e^{itH} x e^{-itH}; t may be complex (t = i beta gives e^{-beta H} x e^{beta H})."""
        with mpmath.workprec(self.precision + 16):
            x = mpmath.matrix(x)
            if _is_scalar(x):
                # the centre is fixed exactly
                return x
            t = mpmath.mpc(t) if isinstance(t, (complex, mpmath.mpc)) else to_mpf(t)
            return self.exp_h(1j * t) * x * self.exp_h(-1j * t)

    def density(self, beta) -> tuple[mpmath.matrix, mpmath.mpf]:
        """(e^{-beta (H - lambda_min)}, its trace); the shift cancels in every state value."""
        with mpmath.workprec(self.precision + 16):
            beta = to_mpf(beta)
            shift = min(self.eigenvalues)
            Q = self.eigenvectors
            weights = [mpmath.exp(-beta * (e - shift)) for e in self.eigenvalues]
            return Q * mpmath.diag(weights) * Q.H, mpmath.fsum(weights)

    def error_scale(self, beta, x) -> mpmath.mpf:
        """Accuracy allowance for one Gibbs evaluation against observable x.

        A backward-stable Hermitian eigensolver at working precision p gives
        eigenpairs with residual O(dim * 2^-p * ||H||); propagating through the
        exponential multiplies by at most 1 + beta * spread.
        """
        x = mpmath.matrix(x)
        xmax = max([mpmath.mpf(1)] + [abs(x[i, j]) for i in range(x.rows) for j in range(x.cols)])
        eps = mpmath.mpf(2) ** (-(self.precision - 8))
        return eps * self.dim ** 2 * (1 + abs(to_mpf(beta)) * self.spread) * xmax


def _is_scalar(x) -> bool:
    return all(x[i, j] == (x[0, 0] if i == j else 0) for i in range(x.rows) for j in range(x.cols))


def random_hermitian(rng: random.Random, dim: int, precision: int = DEFAULT_PRECISION) -> mpmath.matrix:
    with mpmath.workprec(precision):
        A = random_matrix(rng, dim, precision)
        return (A + A.H) / 2


def random_matrix(rng: random.Random, dim: int, precision: int = DEFAULT_PRECISION) -> mpmath.matrix:
    with mpmath.workprec(precision):
        A = mpmath.matrix(dim, dim)
        for i in range(dim):
            for j in range(dim):
                A[i, j] = mpmath.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1))
        return A


def _trace(m) -> mpmath.mpc:
    return mpmath.fsum(m[i, i] for i in range(m.rows))


def gibbs_functional(sys: FiniteDynSystem, beta) -> Callable:
    """x -> Tr(e^{-beta H} x) / Tr(e^{-beta H}) as a plain callable."""
    rho, z = sys.density(beta)

    def phi(x):
        with mpmath.workprec(sys.precision + 16):
            return _trace(rho * mpmath.matrix(x)) / z

    return phi


def gibbs_state(sys: FiniteDynSystem, beta, x) -> StateValue:
    value = gibbs_functional(sys, beta)(x)
    bound = sys.error_scale(beta, x)
    return StateValue(BigComplex.from_value(value, sys.precision), bound, beta, "gibbs")


def vector_state(index: int = 0) -> Callable:
    """x -> x[index, index]; not a Gibbs state unless H is a multiple of 1 (negative control)."""
    return lambda x: mpmath.matrix(x)[index, index]


def kms_boundary_check(sys: FiniteDynSystem, beta, x, y, state: Optional[Callable] = None) -> mpmath.mpf:
    """|phi(x sigma_{i beta}(y)) - phi(y x)|, with phi the Gibbs state unless given."""
    phi = state if state is not None else gibbs_functional(sys, beta)
    with mpmath.workprec(sys.precision + 16):
        x, y = mpmath.matrix(x), mpmath.matrix(y)
        shifted = sys.sigma(1j * to_mpf(beta), y)
        return abs(phi(x * shifted) - phi(y * x))


def invariance_residual(sys: FiniteDynSystem, beta, t, x) -> mpmath.mpf:
    """|phi_beta(sigma_t(x)) - phi_beta(x)| for real t."""
    phi = gibbs_functional(sys, beta)
    with mpmath.workprec(sys.precision + 16):
        return abs(phi(sys.sigma(to_mpf(t), x)) - phi(x))


# ---------------------------------------------------------------- partition functions


def partition_function(system_or_beta, beta=None, policy: Optional[TruncationPolicy] = None,
                       precision: int = DEFAULT_PRECISION) -> StateValue:
    """Tr(e^{-beta H}) for a finite system, or Z(beta) = sum n^-beta for the BC system.

    For the BC system the value is the partial sum up to ``policy.max_terms``
    and the bound is the integral tail bound; the partial sum always lies
    below the true value.
    """
    if isinstance(system_or_beta, FiniteDynSystem):
        sys = system_or_beta
        if beta is None:
            raise TypeError("beta is required for a finite system")
        with mpmath.workprec(sys.precision + 16):
            weights = [mpmath.exp(-to_mpf(beta) * e) for e in sys.eigenvalues]
            z = mpmath.fsum(weights)
        bound = z * mpmath.mpf(2) ** (-(sys.precision - 8)) * sys.dim * (1 + abs(to_mpf(beta)) * sys.spread)
        return StateValue(BigComplex.from_value(z, sys.precision), bound, beta, "trace")
    beta = system_or_beta
    b = float(to_mpf(beta))
    if b <= 1:
        raise DomainError(f"Z(beta) = sum n^-beta diverges for beta = {beta}")
    policy = policy or TruncationPolicy()
    total, sum_abs = kernels.power_sum(b, policy.max_terms)
    bound = policy.tail_bound(b, _rounding(sum_abs))
    return StateValue(BigComplex.from_value(total, precision), bound, beta, "truncated-series",
                      details={"max_terms": policy.max_terms, "backend": kernels.BACKEND})


# ---------------------------------------------------------------- BC states


def high_temp_state(r: QmodZ | RationalLike, beta, precision: int = DEFAULT_PRECISION) -> StateValue:
    """phi_beta(e(a/b)) = b^-beta prod_{p | b} (1 - p^{beta-1}) / (1 - p^-1) for 0 < beta <= 1."""
    r = _as_element(r)
    with mpmath.workprec(precision + 16):
        s = to_mpf(beta)
        if not 0 < s <= 1:
            raise DomainError(f"the high-temperature formula needs 0 < beta <= 1, got {beta}")
        b = r.den
        if b == 1:
            return StateValue(Cyclotomic.one(), 0, beta, "product-formula", r)
        if s == 1:
            return StateValue(Cyclotomic.zero(), 0, beta, "product-formula", r)
        value = mpmath.mpf(b) ** (-s)
        for p in prime_factors(b):
            value *= (1 - mpmath.mpf(p) ** (s - 1)) / (1 - mpmath.mpf(1) / p)
        bound = abs(value) * mpmath.mpf(2) ** (-(precision - 8))
        return StateValue(BigComplex.from_value(value, precision), bound, beta, "product-formula", r)


@dataclass(frozen=True)
class HurwitzExpansion:
    """phi_beta(e(a/b)) = sum_{k=1..b} c_k iota(zeta_b^{a k}) with real c_k.

    c_k = b^-beta zeta_H(beta, k/b) / zeta(beta).  Keeping the coefficients
    separate from the roots of unity lets a Galois element act on the roots
    alone.
    """

    conductor: int
    beta: object
    coeffs: tuple
    bound: mpmath.mpf
    precision: int

    def evaluate(self, a: int, u: int = 1) -> BigComplex:
        b = self.conductor
        with mpmath.workprec(self.precision + 16):
            total = mpmath.fsum(c * mpmath.expjpi(mpmath.mpf(2 * ((u * a * k) % b)) / b)
                                for k, c in enumerate(self.coeffs, start=1))
        rounding = mpmath.mpf(2) ** (-(self.precision - 4))
        return BigComplex.from_value(total, self.precision, self.bound + rounding)


@lru_cache(maxsize=256)
def _hurwitz_expansion(b: int, beta_key: str, precision: int) -> HurwitzExpansion:
    with mpmath.workprec(precision + 16):
        s = to_mpf(beta_key)
        zeta = hurwitz_zeta(beta_key, 1, precision=precision + 8)
        z, ez = zeta.re, zeta.error_bound
        scale = mpmath.mpf(b) ** (-s)
        coeffs, bound = [], mpmath.mpf(0)
        for k in range(1, b + 1):
            h = zeta if k == b else hurwitz_zeta(beta_key, Fraction(k, b), precision=precision + 8)
            c = scale * h.re / z
            coeffs.append(c)
            bound += (scale * h.error_bound + abs(c) * ez) / (z - ez)
    return HurwitzExpansion(b, beta_key, tuple(coeffs), bound, precision)


def hurwitz_expansion(b: int, beta, precision: int = DEFAULT_PRECISION) -> HurwitzExpansion:
    if to_mpf(beta) <= 1:
        raise DomainError(f"the low-temperature series needs beta > 1, got {beta}")
    return _hurwitz_expansion(b, beta_str(beta), precision)


def _twisted_series(r: QmodZ, beta: float, u: int, policy: TruncationPolicy, gibbs: bool):
    """Float partial sums for phi(e(a/b)) over n <= M with a rigorous bound.

    Returns (value, bound).  With S = partial twisted sum, Z_M = partial
    zeta sum, T_z and T_s bounds for their tails, |S/Z_M - true| is at most
    (T_s + |S/Z_M| T_z) / Z_M.  For a nontrivial phase, Abel summation bounds
    T_s by (M+1)^-beta / |sin(pi k / b)|.
    """
    b = r.den
    k = (u * r.num) % b
    m = policy.max_terms
    if gibbs:
        z, re, im = kernels.log_spectrum_gibbs(beta, m, k, b)
        sum_abs = z
    else:
        re, im, sum_abs = kernels.twisted_power_sum(beta, m, k, b)
        z = sum_abs
    rounding = _rounding(sum_abs)
    t_z = policy.tail_bound(beta)
    if k == 0:
        t_s = t_z
    else:
        t_s = min(t_z, (m + 1) ** -beta / abs(math.sin(math.pi * k / b)))
    value = complex(re, im) / z
    bound = (t_s + abs(value) * t_z + 2 * rounding) / (z - rounding)
    return value, bound


def low_temp_state(r: QmodZ | RationalLike, beta, iota_exponent: int = 1,
                   policy: Optional[TruncationPolicy] = None, precision: int = DEFAULT_PRECISION,
                   cross_check: bool = True) -> StateValue:
    """Z(beta)^-1 sum_n n^-beta iota_u(zeta_{a/b}^n) for beta > 1.

    The returned value comes from the Hurwitz grouping; with ``cross_check``
    a truncated Dirichlet sum is computed as well and a disagreement beyond
    the two bounds raises ConsistencyError.
    """
    r = _as_element(r)
    u = iota_exponent
    if to_mpf(beta) <= 1:
        raise DomainError(f"the low-temperature series needs beta > 1, got {beta}")
    _check_unit(u, r.den)
    if r.den == 1:
        return StateValue(Cyclotomic.one(), 0, beta, "hurwitz", r, u)
    expansion = hurwitz_expansion(r.den, beta, precision)
    value = expansion.evaluate(r.num, u)
    out = StateValue(value, value.error_bound, beta, "hurwitz", r, u)
    if cross_check:
        policy = policy or TruncationPolicy()
        direct, direct_bound = _twisted_series(r, float(to_mpf(beta)), u, policy, gibbs=False)
        out.details = {"direct": complex(direct), "direct_bound": direct_bound, "max_terms": policy.max_terms}
        if abs(value.value - mpmath.mpc(direct)) > value.error_bound + direct_bound:
            raise ConsistencyError(
                f"Hurwitz grouping {complex(value)} and direct sum {direct} disagree beyond {direct_bound}")
    return out


def dirichlet_state(r: QmodZ | RationalLike, beta, iota_exponent: int = 1,
                    policy: Optional[TruncationPolicy] = None) -> StateValue:
    """The truncated Dirichlet path on its own, with its bound."""
    r = _as_element(r)
    if to_mpf(beta) <= 1:
        raise DomainError(f"the low-temperature series needs beta > 1, got {beta}")
    _check_unit(iota_exponent, r.den)
    policy = policy or TruncationPolicy()
    value, bound = _twisted_series(r, float(to_mpf(beta)), iota_exponent, policy, gibbs=False)
    return StateValue(BigComplex.from_value(value, 53), bound, beta, "dirichlet", r, iota_exponent,
                      {"max_terms": policy.max_terms, "backend": kernels.BACKEND})


def ground_state(r: QmodZ | RationalLike, iota_exponent: int = 1) -> Cyclotomic:
    """The beta -> infinity limit: only n = 1 survives, leaving zeta_b^{u a}."""
    r = _as_element(r)
    _check_unit(iota_exponent, r.den)
    return Cyclotomic.root_of_unity(r.den, iota_exponent * r.num)


def truncated_bc_gibbs(r: QmodZ | RationalLike, beta, iota_exponent: int = 1,
                       max_terms: int = DEFAULT_TRUNCATION) -> StateValue:
    """Gibbs state of H = diag(log n), n <= M, on e(a/b) acting by iota_u(zeta_{a/b}^n).

    The bound is against the infinite series, so the value converges to
    ``low_temp_state`` as M grows.  For M = 1 the one-dimensional system's
    value zeta^{ua} is returned exactly; its distance bound to the infinite
    series is then kept in ``details["series_bound"]``.
    """
    r = _as_element(r)
    u = iota_exponent
    if to_mpf(beta) <= 1:
        raise DomainError(f"the truncated Gibbs oracle needs beta > 1, got {beta}")
    _check_unit(u, r.den)
    if r.den == 1:
        return StateValue(Cyclotomic.one(), 0, beta, "truncated-gibbs", r, u, {"max_terms": max_terms})
    if max_terms == 1:
        _, series_bound = _twisted_series(r, float(to_mpf(beta)), u, TruncationPolicy(1), gibbs=True)
        return StateValue(ground_state(r, u), 0, beta, "truncated-gibbs", r, u,
                          {"max_terms": 1, "series_bound": series_bound})
    policy = TruncationPolicy(max_terms)
    value, bound = _twisted_series(r, float(to_mpf(beta)), u, policy, gibbs=True)
    return StateValue(BigComplex.from_value(value, 53), bound, beta, "truncated-gibbs", r, u,
                      {"max_terms": max_terms, "backend": kernels.BACKEND})


def state_value(r: QmodZ | RationalLike, beta, iota_exponent: int = 1,
                policy: Optional[TruncationPolicy] = None, precision: int = DEFAULT_PRECISION) -> StateValue:
    """Route by temperature: (0,1] high, (1,inf) low, inf ground."""
    r = _as_element(r)
    if isinstance(beta, str) and beta.strip().lower() in ("inf", "infinity", "oo"):
        beta = math.inf
    if isinstance(beta, float) and math.isinf(beta):
        return StateValue(ground_state(r, iota_exponent), 0, beta, "ground", r, iota_exponent)
    if to_mpf(beta) <= 1:
        out = high_temp_state(r, beta, precision)
        out.iota = iota_exponent
        return out
    return low_temp_state(r, beta, iota_exponent, policy, precision)
