"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or directly with
``python3 tests/test_acceptance.py``.
"""
import math
import os
import sys
import time
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(__file__))
from oracles import brute_force_coset_count  # noqa: E402

from bostconnes import checks, gl2  # noqa: E402


def criterion_1():
    rep = checks.bc_relations(24)
    ns = rep.summary["ns"]
    ok = rep.passed and ns == [2, 3, 4, 6, 8, 12, 24]
    return ok, f"BC relations at level 24, n in {ns}: {rep.summary['instances']} instances, all exact", 30


def criterion_2():
    rep = checks.gibbs_check(4, [Fraction(1, 2), 1, 2], 20, 42)
    neg = checks.gibbs_check(4, [Fraction(1, 2), 1, 2], 20, 42, non_gibbs=True)
    worst_neg = float(neg.summary["min_kms_residual"])
    ok = rep.passed and worst_neg > 1e-3
    detail = (f"Gibbs KMS residual max {rep.summary['max_kms_residual']} (<= 1e-10), "
              f"non-Gibbs control min {worst_neg:.3g} (> 1e-3)")
    return ok, detail, 5


def criterion_3():
    rep = checks.high_temp(12, Fraction(1, 2), 1e-12)
    return rep.passed, "phi_1(e(a/b)) = 0 exactly for b = 2..12; phi_1/2(e(1/2)) = sqrt2 - 1 within 1e-12", None


def criterion_4():
    rep = checks.kms_agreement(2, (2, 3, 5), 10 ** 5, 3e-5)
    halves = [r for r in rep.rows if r["b"] == 2]
    ok = rep.passed and halves and all(r["equals_minus_half"] for r in halves)
    worst = max(float(r["bound"]) for r in rep.rows)
    return ok, f"three-path agreement at beta = 2, b in (2, 3, 5), summed bound max {worst:.3g} (<= 3e-5)", 60


def criterion_5():
    rep = checks.partition(2, 10 ** 6, 1e-6)
    row = rep.rows[0]
    return rep.passed, f"Z(2) at M = 10^6 vs zeta(2): difference {row['difference']} (<= 1e-6)", None


def criterion_6():
    exact = checks.galois_verify([3, 4, 5, 8, 12], [math.inf])
    numeric = checks.galois_verify(5, 3, tolerance=1e-8)
    ok = exact.passed and numeric.passed
    return ok, (f"Galois intertwining exact at beta = inf ({len(exact.rows)} cases), "
                f"beta = 3, b = 5 within 1e-8 ({len(numeric.rows)} cases)"), None


def criterion_7():
    rep = checks.qlat_laws(60, 1000, 0)
    laws = ("reflexive", "symmetric", "criterion_matches_definition", "transitive", "witness_roundtrip")
    rows = {r["law"]: r for r in rep.rows}
    ok = all(rows[k]["pass"] for k in laws)
    return ok, "commensurability laws at level 60: " + ", ".join(f"{k} {rows[k]['passed']}/1000" for k in laws), 10


def criterion_8():
    rep = checks.qlat_laws(60, 1000, 0)
    laws = ("associative", "source_target", "eta_commensurable")
    rows = {r["law"]: r for r in rep.rows}
    ok = all(rows[k]["pass"] for k in laws)
    return ok, "groupoid laws at level 60: " + ", ".join(f"{k} {rows[k]['passed']}/1000" for k in laws), None


def criterion_9():
    rep = checks.duality(12, 12)
    return rep.passed, f"duality square exact for n, b <= 12 ({len(rep.rows)} cases)", None


def criterion_10():
    hecke = checks.gl2_hecke(50)
    brute = all(brute_force_coset_count(n) == len(gl2.hecke_cosets(n)) for n in range(1, 11))
    conv = checks.gl2_conv_check(7, 20, 6, 12)
    fiber = checks.gl2_fiber_check(1000, 0, 128)
    ok = hecke.passed and brute and conv.passed and fiber.passed
    detail = (f"Hecke counts = sigma_1(n) for n <= 50 (brute force n <= 10: {brute}); "
              f"convolution laws {conv.passed} ({conv.summary['nonzero_values']}/20 nonzero); "
              f"C* fibre residual {fiber.rows[0]['max_residual']}")
    return ok, detail, 60


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def evaluate(index):
    start = time.perf_counter()
    ok, detail, limit = CRITERIA[index - 1]()
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed >= limit:
        ok = False
        detail += f"; runtime {elapsed:.1f} s exceeds {limit} s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {index}: {detail} [{elapsed:.1f} s]"
    return ok, line


@pytest.mark.parametrize("index", range(1, len(CRITERIA) + 1))
def test_criterion(index, capsys):
    ok, line = evaluate(index)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(i) for i in range(1, len(CRITERIA) + 1)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
