"""Pure-Python series kernels; the reference the compiled module must match.

Each kernel returns float partial sums together with the sum of absolute
values of the summed terms, which callers use to bound rounding error.
"""
import math


def _phase_table(b):
    return ([math.cos(2.0 * math.pi * j / b) for j in range(b)],
            [math.sin(2.0 * math.pi * j / b) for j in range(b)])


def power_sum(beta, stop, start=1):
    """sum_{n=start}^{stop} n^(-beta); returns (sum, sum of |terms|)."""
    s = math.fsum(n ** -beta for n in range(start, stop + 1))
    return s, s


def twisted_power_sum(beta, stop, k, b):
    """sum_{n<=stop} n^(-beta) exp(2 pi i k n / b) -> (re, im, sum |terms|)."""
    cos_t, sin_t = _phase_table(b)
    weights = [n ** -beta for n in range(1, stop + 1)]
    idx = [(k * n) % b for n in range(1, stop + 1)]
    re = math.fsum(w * cos_t[j] for w, j in zip(weights, idx))
    im = math.fsum(w * sin_t[j] for w, j in zip(weights, idx))
    return re, im, math.fsum(weights)


def log_spectrum_gibbs(beta, stop, k, b):
    """Diagonal Gibbs sums for H = diag(log 1, ..., log stop).

    Returns (Z, re, im) with Z = sum exp(-beta log n) and re + i im the same
    weights against the phases exp(2 pi i k n / b).  The lowest eigenvalue is
    log 1 = 0, so the weights need no shift.
    """
    cos_t, sin_t = _phase_table(b)
    weights = [math.exp(-beta * math.log(n)) for n in range(1, stop + 1)]
    idx = [(k * n) % b for n in range(1, stop + 1)]
    z = math.fsum(weights)
    re = math.fsum(w * cos_t[j] for w, j in zip(weights, idx))
    im = math.fsum(w * sin_t[j] for w, j in zip(weights, idx))
    return z, re, im
