"""Solver backend selection.

The compiled extension is preferred when importable; the numpy module is
the always-available fallback and the reference for both.  Override with
the PACBOUND_BACKEND environment variable ("py" or "cy") or per call via
``train(..., backend=...)``.
"""

from __future__ import annotations

import os

from . import _smo_py

try:
    from . import _smo_cy
    HAVE_EXTENSION = True
except ImportError:
    _smo_cy = None
    HAVE_EXTENSION = False


def get_backend(name: str | None = None):
    """Return the solver module for ``name`` (or the default choice)."""
    if name is None:
        name = os.environ.get("PACBOUND_BACKEND")
    if name in (None, "auto"):
        return _smo_cy if HAVE_EXTENSION else _smo_py
    if name == "py":
        return _smo_py
    if name == "cy":
        if not HAVE_EXTENSION:
            raise RuntimeError("compiled backend requested but not built")
        return _smo_cy
    raise ValueError(f"unknown backend {name!r}")


def backend_name(module) -> str:
    return "cy" if module is _smo_cy else "py"
