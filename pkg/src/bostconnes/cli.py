"""Command-line entry point.

Exit codes: 0 when every checked property holds, 1 when one fails, 2 for
usage errors.  Common options can also be set through BOSTCONNES_LEVEL,
BOSTCONNES_PRECISION, BOSTCONNES_SEED, BOSTCONNES_TRUNC, BOSTCONNES_FORMAT and
BOSTCONNES_OUT; an explicit flag always wins.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import checks
from .errors import BostConnesError, ConsistencyError
from .numtower import QmodZ

ENV_PREFIX = "BOSTCONNES_"


@dataclass(frozen=True)
class RunConfig:
    level: int = 24
    precision: int = 128
    seed: int = 0
    truncation: int = 10 ** 5
    output: str = "json"
    out_path: str | None = None


def _env(name, default, kind=str):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    try:
        return kind(raw)
    except ValueError:
        raise SystemExit(f"error: bad value for {ENV_PREFIX}{name}: {raw!r}") from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_list(text: str) -> list[int]:
    values = _int_list(text)
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"expected comma-separated positive integers, got {text!r}")
    return values


def _beta(text: str):
    try:
        return checks.parse_beta(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad beta {text!r}") from None


def _beta_list(text: str) -> list:
    return [_beta(t) for t in text.split(",") if t.strip()]


def _element_list(text: str) -> list[QmodZ]:
    try:
        return [QmodZ.of(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad element list {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--level", type=_positive_int, default=_env("LEVEL", 24, int), help="finite level N")
    p.add_argument("--precision", type=_positive_int, default=_env("PRECISION", 128, int), help="working bits")
    p.add_argument("--seed", type=int, default=_env("SEED", None, int), help="seed for random choices")
    p.add_argument("--trunc", type=_positive_int, default=_env("TRUNC", 10 ** 5, int), help="series cutoff M")
    p.add_argument("--format", choices=("json", "csv"), default=_env("FORMAT", "json"))
    p.add_argument("--out", default=_env("OUT", None), help="write the report here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="bostconnes", description="Finite-level Bost-Connes and GL2 checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bc-relations", parents=[common], help="exact check of the algebra relations")
    p.add_argument("--ns", type=_int_list, default=None, help="values of n (default: divisors of N above 1)")
    p.add_argument("--strict", action="store_true", help="report instances needing a higher level instead of raising it")
    p.add_argument("--corrupt", action="store_true", help="negative control: use a wrong e(r)")

    p = sub.add_parser("kms-eval", parents=[common], help="state values on e(a/b)")
    p.add_argument("--beta", type=_beta_list, required=True, help="comma-separated, 'inf' allowed")
    p.add_argument("--element", type=_element_list, required=True, help="comma-separated fractions a/b")
    p.add_argument("--iota", type=int, default=1)

    p = sub.add_parser("kms-agree", parents=[common], help="three-path agreement of low-temperature states")
    p.add_argument("--beta", type=_beta, default=Fraction(2))
    p.add_argument("--conductors", type=_int_list, default=[2, 3, 5])
    p.add_argument("--tol", type=float, default=3e-5)

    p = sub.add_parser("partition", parents=[common], help="Z(beta) against a high-precision oracle")
    p.add_argument("--beta", type=_beta, default=Fraction(2))
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("high-temp-check", parents=[common], help="exact zeros at beta = 1 and the value at 1/2")
    p.add_argument("--max-b", type=_positive_int, default=12)
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("galois-verify", parents=[common], help="Galois intertwining over all u")
    p.add_argument("--b", type=_positive_list, required=True, help="conductor(s), comma-separated")
    p.add_argument("--beta", type=_beta_list, default=[math.inf], help="comma-separated, 'inf' allowed")
    p.add_argument("--iota", type=int, default=1)
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("gibbs-check", parents=[common], help="KMS boundary residuals for Gibbs states")
    p.add_argument("--dim", type=_positive_int, default=4)
    p.add_argument("--betas", type=_beta_list, default=[Fraction(1, 2), Fraction(1), Fraction(2)])
    p.add_argument("--pairs", type=_positive_int, default=20)
    p.add_argument("--non-gibbs", action="store_true", help="negative control with a vector state")

    p = sub.add_parser("qlat-check", parents=[common], help="commensurability and groupoid laws")
    p.add_argument("--samples", type=_positive_int, default=1000)

    p = sub.add_parser("duality-check", parents=[common], help="alpha_n o Gamma = Gamma o beta_n")
    p.add_argument("--max-n", type=_positive_int, default=12)
    p.add_argument("--max-b", type=_positive_int, default=12)

    p = sub.add_parser("gl2", parents=[common], help="GL2 computations")
    p.add_argument("action", choices=("hecke", "conv-check", "fiber-check", "all"))
    p.add_argument("--max-n", type=_positive_int, default=50)
    p.add_argument("--samples", type=_positive_int, default=None)
    p.add_argument("--det-bound", type=_positive_int, default=6)
    return parser


def config_from(args) -> RunConfig:
    return RunConfig(args.level, args.precision, args.seed if args.seed is not None else 0, args.trunc,
                     args.format, args.out)


def run(args) -> list[checks.Report]:
    cfg = config_from(args)
    seed = args.seed
    cmd = args.command
    if cmd == "bc-relations":
        return [checks.bc_relations(cfg.level, args.ns, strict=args.strict, corrupt=args.corrupt)]
    if cmd == "kms-eval":
        return [checks.kms_eval(args.beta, args.element, args.iota, cfg.truncation, cfg.precision)]
    if cmd == "kms-agree":
        return [checks.kms_agreement(args.beta, args.conductors, cfg.truncation, args.tol, cfg.precision)]
    if cmd == "partition":
        return [checks.partition(args.beta, cfg.truncation, args.tol, cfg.precision)]
    if cmd == "high-temp-check":
        return [checks.high_temp(args.max_b, tolerance=args.tol, precision=cfg.precision)]
    if cmd == "galois-verify":
        return [checks.galois_verify(args.b, args.beta, args.iota, args.tol, cfg.precision)]
    if cmd == "gibbs-check":
        return [checks.gibbs_check(args.dim, args.betas, args.pairs, 42 if seed is None else seed,
                                   args.non_gibbs, precision=cfg.precision)]
    if cmd == "qlat-check":
        return [checks.qlat_laws(cfg.level, args.samples, cfg.seed)]
    if cmd == "duality-check":
        return [checks.duality(args.max_n, args.max_b)]
    if cmd == "gl2":
        out = []
        if args.action in ("hecke", "all"):
            out.append(checks.gl2_hecke(args.max_n))
        if args.action in ("conv-check", "all"):
            out.append(checks.gl2_conv_check(7 if seed is None else seed, args.samples or 20, args.det_bound))
        if args.action in ("fiber-check", "all"):
            out.append(checks.gl2_fiber_check(args.samples or 1000, cfg.seed, cfg.precision))
        return out
    raise AssertionError(cmd)


def _csv_text(reports) -> str:
    rows = []
    for rep in reports:
        for row in rep.rows:
            flat = {"command": rep.command}
            for k, v in row.items():
                if isinstance(v, dict):
                    flat.update({f"{k}.{kk}": vv for kk, vv in v.items()})
                elif isinstance(v, list):
                    flat[k] = json.dumps(v)
                else:
                    flat[k] = v
            rows.append(flat)
    fields = []
    for row in rows:
        for k in row:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def render(reports, fmt: str) -> str:
    if fmt == "csv":
        return _csv_text(reports)
    payload = reports[0].to_json() if len(reports) == 1 else {"reports": [r.to_json() for r in reports]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        reports = run(args)
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, BostConnesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(reports, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
