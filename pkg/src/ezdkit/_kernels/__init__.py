"""Kernel backend selection.

The compiled extension is used when it was built; otherwise (or when
``EZDKIT_PURE_PYTHON=1`` is set) the numpy fallback is loaded.  ``BACKEND``
records which one is active.
"""

import os

from . import _fallback

BACKEND = "python"
rref_inplace = _fallback.rref_inplace
first_invertible = _fallback.first_invertible

if os.environ.get("EZDKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _modp
    except ImportError:  # extension not built
        _modp = None
    if _modp is not None:
        rref_inplace = _modp.rref_inplace
        first_invertible = _modp.first_invertible
        BACKEND = "compiled"


def backends():
    """Map backend name to its (rref_inplace, first_invertible) pair."""
    out = {"python": (_fallback.rref_inplace, _fallback.first_invertible)}
    try:
        from . import _modp as mod
        out["compiled"] = (mod.rref_inplace, mod.first_invertible)
    except ImportError:
        pass
    return out
