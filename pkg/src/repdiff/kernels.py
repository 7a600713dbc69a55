"""Backend selection for the hot loops.

The compiled ``_core`` extension is used when it imports; setting the
environment variable ``REPDIFF_PURE=1`` forces the numpy fallback.
"""
import os

from . import _fallback

BACKEND = "numpy"
upwind_flux_difference = _fallback.upwind_flux_difference
pair_drift = _fallback.pair_drift

if os.environ.get("REPDIFF_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core
    except ImportError:
        pass
    else:
        BACKEND = "compiled"
        upwind_flux_difference = _core.upwind_flux_difference
        pair_drift = _core.pair_drift


def backends():
    """Return the available implementations keyed by name."""
    impls = {"numpy": _fallback}
    try:
        from . import _core
    except ImportError:
        return impls
    impls["compiled"] = _core
    return impls
