"""Backend selection for the float series kernels.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python module.  Setting ``BOSTCONNES_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("BOSTCONNES_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

power_sum = _impl.power_sum
twisted_power_sum = _impl.twisted_power_sum
log_spectrum_gibbs = _impl.log_spectrum_gibbs

# float rounding allowance per summed term (libm pow/exp/log/cos/sin are
# within a few ulp on glibc; 16 ulp leaves margin)
ROUNDING_ULPS = 16
UNIT_ROUNDOFF = 2.0 ** -53
