"""Batch verification runs shared by the CLI and the acceptance suite.

Each function returns a ``Report``: a pass flag, a list of JSON-ready rows and
a small summary dict.  Nothing here prints or exits.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import mpmath

from . import bcalg, galois, gl2, kernels, kms, qlat1d
from .errors import BostConnesError
from .numtower import Cyclotomic, QmodZ, divisors, to_mpf, units_mod


@dataclass
class Report:
    command: str
    passed: bool
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"command": self.command, "pass": self.passed, "summary": self.summary, "rows": self.rows}


def _num(x, digits: int = 17) -> str:
    with mpmath.workprec(max(53, int(digits * 3.33) + 8)):
        return mpmath.nstr(mpmath.mpf(x), digits)


# ---------------------------------------------------------------- BC relations and duality


def bc_relations(level: int, ns: Optional[Iterable[int]] = None, *, strict: bool = False,
                 corrupt: bool = False) -> Report:
    ns = [n for n in divisors(level) if n > 1] if ns is None else list(ns)
    results = bcalg.check_relations(level, ns, QmodZ.level_elements(level), raise_level=not strict,
                                    corrupt=corrupt)
    rows = [r.to_json() for r in results]
    passed = all(r.passed for r in results)
    counts = {}
    for r in results:
        counts[r.status] = counts.get(r.status, 0) + 1
    return Report("bc-relations", passed, rows, {"level": level, "ns": ns, "instances": len(rows), **counts})


def duality(max_n: int = 12, max_b: int = 12) -> Report:
    rows = []
    for n in range(1, max_n + 1):
        for b in range(1, max_b + 1):
            rows.append({"n": n, "b": b, "pass": bcalg.gelfand_square_check(n, b)})
    return Report("duality-check", all(r["pass"] for r in rows), rows, {"max_n": max_n, "max_b": max_b})


# ---------------------------------------------------------------- states


def parse_beta(text):
    if isinstance(text, (int, float, Fraction)):
        return text
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    return Fraction(t)


def kms_eval(betas, elements, iota: int = 1, truncation: int = kms.DEFAULT_TRUNCATION,
             precision: int = 128) -> Report:
    rows = []
    policy = kms.TruncationPolicy(truncation)
    for beta in betas:
        for r in elements:
            r = r if isinstance(r, QmodZ) else QmodZ.of(r)
            try:
                value = kms.state_value(r, beta, iota, policy, precision)
                row = value.to_json()
            except BostConnesError as exc:
                row = {"beta": kms.beta_str(beta), "element": str(r), "iota": iota, "value": None,
                       "error_bound": None, "method": None, "error": f"{type(exc).__name__}: {exc}"}
            rows.append(row)
    return Report("kms-eval", True, rows, {"iota": iota, "truncation": truncation})


def kms_agreement(beta=2, conductors=(2, 3, 5), truncation: int = kms.DEFAULT_TRUNCATION,
                  tolerance: float = 3e-5, precision: int = 128) -> Report:
    """Hurwitz grouping, truncated Dirichlet sum and truncated Gibbs trace on e(a/b), all units a, u."""
    rows = []
    policy = kms.TruncationPolicy(truncation)
    for b in conductors:
        for a in units_mod(b):
            for u in units_mod(b):
                r = QmodZ(a, b)
                hur = kms.low_temp_state(r, beta, u, policy, precision, cross_check=False)
                dirichlet = kms.dirichlet_state(r, beta, u, policy)
                gibbs = kms.truncated_bc_gibbs(r, beta, u, truncation)
                values = [hur.complex_value(), dirichlet.complex_value(), gibbs.complex_value()]
                bounds = [hur.error_bound, dirichlet.error_bound, gibbs.error_bound]
                spread = max(abs(x - y) for x in values for y in values)
                total = sum(bounds)
                ok = spread <= total and total <= tolerance
                row = {"b": b, "a": a, "u": u, "beta": kms.beta_str(beta),
                       "hurwitz": [_num(values[0].real), _num(values[0].imag)],
                       "dirichlet": [_num(values[1].real), _num(values[1].imag)],
                       "gibbs": [_num(values[2].real), _num(values[2].imag)],
                       "spread": _num(spread, 6), "bound": _num(total, 6), "pass": ok}
                if b == 2:
                    ok_half = abs(values[0] + mpmath.mpf(1) / 2) <= bounds[0]
                    row["equals_minus_half"] = ok_half
                    row["pass"] = ok and ok_half
                rows.append(row)
    return Report("kms-agree", all(r["pass"] for r in rows), rows,
                  {"truncation": truncation, "tolerance": tolerance, "backend": kernels.BACKEND})


def partition(beta=2, truncation: int = 10 ** 6, tolerance: float = 1e-6, precision: int = 128) -> Report:
    """Z(beta) by truncation plus tail bound, against an independent high-precision value."""
    value = kms.partition_function(beta, policy=kms.TruncationPolicy(truncation))
    with mpmath.workprec(precision):
        oracle = mpmath.zeta(to_mpf(beta))
        diff = abs(value.complex_value() - oracle)
    ok = diff <= value.error_bound and diff <= tolerance
    row = {"beta": kms.beta_str(beta), "truncation": truncation, "value": _num(value.value.re),
           "error_bound": _num(value.error_bound, 6), "oracle": _num(oracle, 30), "difference": _num(diff, 6),
           "pass": ok}
    return Report("partition", ok, [row], {"tolerance": tolerance, "backend": kernels.BACKEND})


def high_temp(max_b: int = 12, beta_half=Fraction(1, 2), tolerance: float = 1e-12, precision: int = 128) -> Report:
    """phi_1 vanishes exactly on every e(a/b), b > 1; phi_{1/2}(e(1/2)) is sqrt(2) - 1."""
    rows = []
    for b in range(2, max_b + 1):
        for a in range(1, b):
            r = QmodZ(a, b)
            value = kms.high_temp_state(r, 1, precision)
            rows.append({"beta": "1", "element": str(r), "value": str(value.value),
                         "pass": value.is_exact and value.value == Cyclotomic.zero()})
    half = kms.high_temp_state(QmodZ(1, 2), beta_half, precision)
    with mpmath.workprec(precision):
        diff = abs(half.complex_value() - (mpmath.sqrt(2) - 1))
    rows.append({"beta": kms.beta_str(beta_half), "element": "1/2", "value": _num(half.value.re, 20),
                 "expected": "sqrt(2)-1", "difference": _num(diff, 6), "pass": diff <= tolerance})
    return Report("high-temp-check", all(r["pass"] for r in rows), rows, {"max_b": max_b, "tolerance": tolerance})


def galois_verify(b, beta, iota: int = 1, tolerance: Optional[float] = None, precision: int = 128) -> Report:
    """b and beta may each be a single value or a list; every combination is checked."""
    bs = list(b) if isinstance(b, (list, tuple)) else [b]
    betas = list(beta) if isinstance(beta, (list, tuple)) else [beta]
    rows = [r.to_json() for bb in bs for be in betas for r in galois.verify_all(bb, be, iota, precision, tolerance)]
    return Report("galois-verify", all(r["pass"] for r in rows), rows,
                  {"b": bs, "beta": [kms.beta_str(x) for x in betas], "iota": iota, "tolerance": tolerance})


def gibbs_check(dim: int = 4, betas=(Fraction(1, 2), 1, 2), pairs: int = 20, seed: int = 42,
                non_gibbs: bool = False, times=(Fraction(3, 10), Fraction(17, 10)), threshold: float = 1e-10,
                precision: int = 128) -> Report:
    """KMS boundary and sigma_t-invariance residuals for a seeded Hermitian system.

    With ``non_gibbs`` the state is the vector state x -> x[0,0], which must
    fail the boundary identity; the report then fails by design.
    """
    rng = random.Random(seed)
    system = kms.FiniteDynSystem.random(rng, dim, precision)
    state = kms.vector_state(0) if non_gibbs else None
    rows, residuals = [], []
    for beta in betas:
        for i in range(pairs):
            x = kms.random_matrix(rng, dim, precision)
            y = kms.random_matrix(rng, dim, precision)
            residual = kms.kms_boundary_check(system, beta, x, y, state)
            inv = max(kms.invariance_residual(system, beta, t, x) for t in times)
            residuals.append(residual)
            rows.append({"beta": kms.beta_str(beta), "pair": i, "kms_residual": _num(residual, 6),
                         "invariance_residual": _num(inv, 6),
                         "pass": residual <= threshold and inv <= threshold})
    return Report("gibbs-check", all(r["pass"] for r in rows), rows,
                  {"dim": dim, "seed": seed, "state": "vector" if non_gibbs else "gibbs", "threshold": threshold,
                   "min_kms_residual": _num(min(residuals), 6), "max_kms_residual": _num(max(residuals), 6)})


def gibbs_negative_control(beta=2) -> Report:
    """H = diag(0, 1), phi(x) = x[0,0], x = E01, y = E10: the residual is exactly e^-beta."""
    system = kms.FiniteDynSystem.diagonal([0, 1])
    x = mpmath.matrix([[0, 1], [0, 0]])
    y = mpmath.matrix([[0, 0], [1, 0]])
    residual = kms.kms_boundary_check(system, beta, x, y, kms.vector_state(0))
    expected = mpmath.exp(-to_mpf(beta))
    ok = abs(residual - expected) <= mpmath.mpf(2) ** -100
    return Report("gibbs-negative-control", ok,
                  [{"beta": kms.beta_str(beta), "residual": _num(residual), "expected": _num(expected), "pass": ok}])


# ---------------------------------------------------------------- Q-lattices and the groupoid


def qlat_laws(level: int = 60, samples: int = 1000, seed: int = 0) -> Report:
    rng = random.Random(seed)
    counts = {"reflexive": 0, "symmetric": 0, "criterion_matches_definition": 0, "transitive": 0,
              "witness_roundtrip": 0, "associative": 0, "source_target": 0, "eta_commensurable": 0}
    failures = []
    for i in range(samples):
        l1 = qlat1d.random_lattice(rng, level)
        l2 = qlat1d.random_lattice(rng, level)
        if qlat1d.commensurable(l1, l1):
            counts["reflexive"] += 1
        else:
            failures.append({"case": "reflexive", "index": i})
        if qlat1d.commensurable(l1, l2) == qlat1d.commensurable(l2, l1):
            counts["symmetric"] += 1
        else:
            failures.append({"case": "symmetric", "index": i})
        if qlat1d.commensurable(l1, l2) == qlat1d.commensurable_by_definition(l1, l2):
            counts["criterion_matches_definition"] += 1
        else:
            failures.append({"case": "criterion_matches_definition", "index": i})

        chain = qlat1d.commensurable_chain(rng, level, 3)
        a, b, c = chain
        if qlat1d.commensurable(a, b) and qlat1d.commensurable(b, c) and qlat1d.commensurable(a, c):
            counts["transitive"] += 1
        else:
            failures.append({"case": "transitive", "index": i})
        w = qlat1d.commensurability_witness(a, b)
        back = [qlat1d.QLattice1D.from_json(x.to_json()) for x in (a, b)]
        if w is not None and qlat1d.validate_witness(*back, w) and back == [a, b]:
            counts["witness_roundtrip"] += 1
        else:
            failures.append({"case": "witness_roundtrip", "index": i})

        p1, p2, p3 = qlat1d.random_composable(rng, level, 3)
        compose = qlat1d.groupoid_compose
        left = compose(compose(p1, p2), p3)
        right = compose(p1, compose(p2, p3))
        if left.ratio == right.ratio and left.rho.agrees_with(right.rho):
            counts["associative"] += 1
        else:
            failures.append({"case": "associative", "index": i})
        p12 = compose(p1, p2)
        if p12.source().agrees_with(p2.source()) and p12.target().agrees_with(p1.target()):
            counts["source_target"] += 1
        else:
            failures.append({"case": "source_target", "index": i})
        if all(qlat1d.commensurable(*qlat1d.eta(p)) for p in (p1, p2, p12)):
            counts["eta_commensurable"] += 1
        else:
            failures.append({"case": "eta_commensurable", "index": i})
    rows = [{"law": k, "passed": v, "samples": samples, "pass": v == samples} for k, v in counts.items()]
    return Report("qlat-check", not failures, rows, {"level": level, "seed": seed, "failures": failures[:20]})


# ---------------------------------------------------------------- GL2


def gl2_hecke(max_n: int = 50) -> Report:
    rows = []
    for n in range(1, max_n + 1):
        reps = gl2.hecke_cosets(n)
        canonical = {m.left_coset_rep() for m in reps}
        distinct = len(canonical) == len(reps) and all(m.left_coset_rep() == m for m in reps)
        rows.append({"n": n, "count": len(reps), "sigma1": gl2.sigma1(n),
                     "representatives": " ".join(f"({m.a} {m.b}; 0 {m.d})" for m in reps),
                     "pass": distinct and len(reps) == gl2.sigma1(n)})
    return Report("gl2-hecke", all(r["pass"] for r in rows), rows, {"max_n": max_n})


GL2_AMBIENT_LEVEL = 12 * 60 ** 4


def gl2_conv_check(seed: int = 7, samples: int = 20, det_bound: int = 6, level: int = 12) -> Report:
    """Associativity, the anti-automorphism law, identity laws and sigma_i multiplicativity, exactly."""
    rng = random.Random(seed)
    one = gl2.GL2AlgebraElement.identity()
    rows = []
    for i in range(samples):
        f1, f2, f3 = (gl2.random_element(rng, det_bound, 3, level) for _ in range(3))
        checks = {}
        p = gl2.random_point(rng, [f1, f2, f3], GL2_AMBIENT_LEVEL)
        lhs = gl2.gl2_convolve(gl2.gl2_convolve(f1, f2), f3)
        rhs = gl2.gl2_convolve(f1, gl2.gl2_convolve(f2, f3))
        checks["associative"] = lhs(p.g, p.rho, p.z) == rhs(p.g, p.rho, p.z)
        star_lhs = gl2.gl2_involution(gl2.gl2_convolve(f1, f2))
        star_rhs = gl2.gl2_convolve(gl2.gl2_involution(f2), gl2.gl2_involution(f1))
        q = gl2.random_point(rng, [star_rhs], GL2_AMBIENT_LEVEL)
        checks["anti_automorphism"] = star_lhs(q.g, q.rho, q.z) == star_rhs(q.g, q.rho, q.z)
        q1 = gl2.random_point(rng, [f1], GL2_AMBIENT_LEVEL)
        checks["involutive"] = gl2.gl2_involution(gl2.gl2_involution(f1))(q1.g, q1.rho, q1.z) == f1(q1.g, q1.rho, q1.z)
        checks["identity"] = (gl2.gl2_convolve(one, f1)(q1.g, q1.rho, q1.z) == f1(q1.g, q1.rho, q1.z)
                              == gl2.gl2_convolve(f1, one)(q1.g, q1.rho, q1.z))
        p2 = gl2.random_point(rng, [f1, f2], GL2_AMBIENT_LEVEL)
        ev = gl2.gl2_time_evolve(gl2.gl2_convolve(f1, f2), 1j)
        ev2 = gl2.gl2_convolve(gl2.gl2_time_evolve(f1, 1j), gl2.gl2_time_evolve(f2, 1j))
        checks["time_evolution_multiplicative"] = ev(p2.g, p2.rho, p2.z) == ev2(p2.g, p2.rho, p2.z)
        g1, g2 = gl2.random_sl2(rng), gl2.random_sl2(rng)
        moved = gl2.gamma_action(g1, g2, p.g, p.rho, p.z)
        checks["invariant"] = lhs(*moved) == lhs(p.g, p.rho, p.z)
        value = lhs(p.g, p.rho, p.z)
        rows.append({"sample": i, **checks, "value": gl2.fraction_str(value), "pass": all(checks.values())})
    return Report("gl2-conv-check", all(r["pass"] for r in rows), rows,
                  {"seed": seed, "level": level, "det_bound": det_bound,
                   "nonzero_values": sum(r["value"] != "0" for r in rows)})


def gl2_fiber_check(samples: int = 1000, seed: int = 0, precision: int = 128) -> Report:
    rng = random.Random(seed)
    tol = mpmath.mpf(2) ** (-(precision - 8))
    worst = mpmath.mpf(0)
    with mpmath.workprec(precision):
        for _ in range(samples):
            a = mpmath.mpf(rng.uniform(-10, 10)) + mpmath.mpf(rng.getrandbits(60)) * mpmath.mpf(2) ** -80
            b = mpmath.mpf(rng.uniform(-10, 10)) + mpmath.mpf(rng.getrandbits(60)) * mpmath.mpf(2) ** -80
            w = gl2.quotient_to_h(gl2.cstar_embed(a, b, precision), precision)
            worst = max(worst, abs(w - 1j))
    ok = worst <= tol
    return Report("gl2-fiber-check", ok, [{"samples": samples, "max_residual": _num(worst, 6),
                                           "tolerance": _num(tol, 6), "pass": ok}], {"seed": seed})
