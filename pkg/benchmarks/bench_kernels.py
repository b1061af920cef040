"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--terms 1000000] [--repeat 3]
"""
import argparse
import timeit

from bostconnes import _kernels_py

try:
    from bostconnes import _kernels as compiled
except ImportError:
    compiled = None

CASES = [
    ("power_sum", lambda m: (2.0, m)),
    ("twisted_power_sum", lambda m: (2.0, m, 1, 5)),
    ("log_spectrum_gibbs", lambda m: (2.0, m, 1, 5)),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=10 ** 6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = [("python", _kernels_py)] + ([("compiled", compiled)] if compiled else [])
    print(f"{'kernel':<20} {'backend':<9} {'best (s)':>10} {'speedup':>8}")
    for name, make_args in CASES:
        call_args = make_args(args.terms)
        base = None
        for label, mod in backends:
            fn = getattr(mod, name)
            best = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat))
            base = base or best
            print(f"{name:<20} {label:<9} {best:>10.4f} {base / best:>7.2f}x")
    if compiled is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
