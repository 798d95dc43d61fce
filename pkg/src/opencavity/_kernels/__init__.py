"""Hot numerical kernels.

The compiled Cython module is used when it has been built; otherwise the
NumPy fallback is selected.  Set ``CAVITY_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _fallback

fallback = _fallback
compiled = None

if os.environ.get("CAVITY_PURE_PYTHON", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

backend = compiled if compiled is not None else _fallback
BACKEND_NAME = "cython" if compiled is not None else "numpy"

recursion = backend.recursion
outgoing = backend.outgoing
rk4_continuum = backend.rk4_continuum

__all__ = ["recursion", "outgoing", "rk4_continuum", "BACKEND_NAME", "fallback", "compiled"]
