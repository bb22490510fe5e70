"""Numeric kernels with a compiled core and a pure-Python fallback.

The compiled extension ``_ckernel`` is used when it was built; set
``JETFACTOR_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernel

if os.environ.get("JETFACTOR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernel
else:
    try:
        from . import _ckernel as _impl
    except ImportError:  # extension not built
        _impl = _pykernel

BACKEND = "cython" if _impl is not _pykernel else "python"

eval_batch = _impl.eval_batch
rk4 = _impl.rk4


def available_backends():
    """Mapping of backend name to kernel module, for tests and benchmarks."""
    out = {"python": _pykernel}
    try:
        from . import _ckernel
    except ImportError:
        pass
    else:
        out["cython"] = _ckernel
    return out
