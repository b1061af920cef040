import math
import os
import subprocess
import sys

import mpmath
import pytest

from bostconnes import _kernels_py, kernels

try:
    from bostconnes import _kernels as compiled
except ImportError:  # pragma: no cover - the fallback is then the only backend
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


def test_pure_python_switch():
    env = dict(os.environ, BOSTCONNES_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from bostconnes import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("beta", [1.5, 2.0, 3.0])
def test_power_sum_against_mpmath(beta):
    s, sum_abs = _kernels_py.power_sum(beta, 1000)
    with mpmath.workprec(100):
        ref = mpmath.fsum(mpmath.mpf(n) ** -beta for n in range(1, 1001))
    assert abs(s - ref) <= kernels.ROUNDING_ULPS * kernels.UNIT_ROUNDOFF * sum_abs
    assert sum_abs == s


def test_twisted_sum_against_mpmath():
    re, im, sum_abs = _kernels_py.twisted_power_sum(2.0, 500, 1, 3)
    with mpmath.workprec(100):
        ref = mpmath.fsum(mpmath.mpf(n) ** -2 * mpmath.expjpi(mpmath.mpf(2 * n) / 3) for n in range(1, 501))
    bound = kernels.ROUNDING_ULPS * kernels.UNIT_ROUNDOFF * sum_abs
    assert abs(re - ref.real) <= bound and abs(im - ref.imag) <= bound


@needs_compiled
@pytest.mark.parametrize("beta", [1.25, 2.0, 3.5])
@pytest.mark.parametrize("k, b", [(0, 1), (1, 2), (1, 3), (2, 5), (5, 12)])
def test_backends_agree(beta, k, b):
    m = 20000
    bound = 2 * kernels.ROUNDING_ULPS * kernels.UNIT_ROUNDOFF * _kernels_py.power_sum(beta, m)[1]
    for name, args in (("power_sum", (beta, m)), ("twisted_power_sum", (beta, m, k, b)),
                       ("log_spectrum_gibbs", (beta, m, k, b))):
        a = getattr(compiled, name)(*args)
        p = getattr(_kernels_py, name)(*args)
        assert len(a) == len(p)
        for x, y in zip(a, p):
            assert math.isclose(x, y, rel_tol=0, abs_tol=bound), name


@needs_compiled
def test_power_sum_start_argument():
    assert math.isclose(compiled.power_sum(2.0, 100, 50)[0], _kernels_py.power_sum(2.0, 100, 50)[0], rel_tol=1e-14)
