"""Hot loops with a compiled backend and a numpy fallback.

The compiled extension is used when it imports; setting ``CONDTEST_PURE=1``
forces the fallback. ``BACKEND`` names the active one.
"""
import os

from . import _fallback

if os.environ.get("CONDTEST_PURE", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _fast as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

probe_rounds = _impl.probe_rounds
sc_grid_count = _impl.sc_grid_count


def backend(name: str):
    """The kernel module called ``name`` (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _fast
        return _fast
    raise ValueError(f"unknown kernel backend {name!r}")
