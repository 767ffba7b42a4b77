"""Select the greedy-scan backend at import time.

The compiled extension is preferred; the numpy fallback keeps the package
fully functional without a build step.  ``CLASMK_BACKEND=python`` forces
the fallback (used by the backend tests and the benchmark).
"""

import os

from . import _greedy_py

if os.environ.get("CLASMK_BACKEND", "").lower() == "python":
    _impl = _greedy_py
    BACKEND = "python"
else:
    try:
        from . import _greedy as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _greedy_py
        BACKEND = "python"

FAMILY_RBF = _greedy_py.FAMILY_RBF
FAMILY_POLY = _greedy_py.FAMILY_POLY

greedy_select = _impl.greedy_select


def backend_name() -> str:
    return BACKEND
