"""Path-simulation kernels.

The compiled extension ``_cpaths`` is used when it imports; otherwise the
vectorized numpy stepper is used.  Set ``HJB_KERNEL=python`` to force the
fallback.  ``BACKEND`` names the active choice.
"""

from __future__ import annotations

import os

from . import _pypaths
from ._common import BLOCK, PathContext, pack_programs, path_rng

try:
    from . import _cpaths
except ImportError:  # extension not built
    _cpaths = None

_BACKENDS = {"python": _pypaths}
if _cpaths is not None:
    _BACKENDS["compiled"] = _cpaths


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    """Module with ``run_paths`` for ``name`` (``None`` picks the default)."""
    if name is None:
        name = BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; "
                         f"have {available_backends()}") from None


_forced = os.environ.get("HJB_KERNEL", "").strip().lower()
if _forced in ("python", "numpy"):
    BACKEND = "python"
elif _forced == "compiled" and _cpaths is None:
    raise ImportError("HJB_KERNEL=compiled but the extension hjb.kernels._cpaths is not built")
else:
    BACKEND = "compiled" if _cpaths is not None else "python"

__all__ = ["BACKEND", "BLOCK", "PathContext", "available_backends", "get_backend",
           "pack_programs", "path_rng"]
