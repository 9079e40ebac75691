"""Select the PGD kernel backend at import time.

The compiled extension is used when it was built; set ``ALTNASH_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("ALTNASH_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND_NAME

MAX_REGRET = _kernels_py.MAX_REGRET
SUM_REGRET = _kernels_py.SUM_REGRET
CONSTANT = _kernels_py.CONSTANT
DIMINISHING = _kernels_py.DIMINISHING

project_simplex_raw = _impl.project_simplex
objective_and_gradient = _impl.objective_and_gradient
pgd_run = _impl.pgd_run


def backends():
    """All importable backends keyed by name (for parity tests and benchmarks)."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
