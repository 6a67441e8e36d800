"""Candidate-scan kernels with two interchangeable backends.

``_core`` is a compiled Cython extension for the hot per-candidate loops;
``_ref`` is a vectorized numpy implementation of the same contracts.  The
compiled backend is preferred when the extension was built; set
``STCLAB_KERNELS=python`` (or ``compiled``) to force a choice.

Both backends implement:

    ml_scan(y, g, points)                     exhaustive argmin over points^k
    zf_scan(y, hsel, w, gr, points)           one zero-forcing recursion step
    sphere_scan(r, z, points, init_idx, nat)  depth-first sphere search

and agree on enumeration order and tie handling (first candidate in
lexicographic order over the sorted alphabet wins).
"""

from __future__ import annotations

import os

from . import _ref

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

_choice = os.environ.get("STCLAB_KERNELS", "auto").strip().lower()
if _choice == "compiled" and _compiled is None:
    raise ImportError("STCLAB_KERNELS=compiled, but the stclab.kernels._core extension is not built")
if _choice not in ("auto", "compiled", "python", ""):
    raise ValueError(f"STCLAB_KERNELS must be auto|compiled|python, got {_choice!r}")

_active = _ref if (_choice == "python" or _compiled is None) else _compiled

HAVE_COMPILED = _compiled is not None
BACKEND = "compiled" if _active is _compiled else "python"


def available_backends() -> tuple:
    return ("python", "compiled") if HAVE_COMPILED else ("python",)


def get_backend(name: str | None = None):
    """Backend module by name; None selects the import-time choice."""
    if name is None:
        return _active
    if name == "python":
        return _ref
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled kernel backend is not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


ml_scan = _active.ml_scan
zf_scan = _active.zf_scan
sphere_scan = _active.sphere_scan
