"""Backend selection for the lattice kernels.

The compiled extension is used when it imports; ``LOCALHEIGHTS_PURE=1``
forces the pure-Python path.
"""

import os

from . import _hnf_py

BACKEND = "python"
_compiled = None

if os.environ.get("LOCALHEIGHTS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _hnf as _compiled

        BACKEND = "cython"
    except ImportError:
        _compiled = None

_LIMIT = 1 << 62


def hnf_mod(cols, n, p, e):
    """Column Hermite form of span(cols) in Z_(p)^n; see ``_hnf_py.hnf_mod``."""
    if _compiled is not None and p**e < _LIMIT:
        return _compiled.hnf_mod(cols, n, p, e)
    return _hnf_py.hnf_mod(cols, n, p, e)


def hnf_mod_python(cols, n, p, e):
    return _hnf_py.hnf_mod(cols, n, p, e)


def hnf_mod_compiled(cols, n, p, e):
    if _compiled is None:
        raise RuntimeError("compiled kernel not built")
    return _compiled.hnf_mod(cols, n, p, e)
