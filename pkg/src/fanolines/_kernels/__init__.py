"""Counting kernels with a compiled core and a pure-python fallback.

The compiled module is optional: if it failed to build, the numpy backend
serves every call with identical semantics. FANOLINES_BACKEND=python|cython
forces the choice (forcing cython raises if the extension is missing).
"""

from __future__ import annotations

import importlib
import os

from . import pyback

_forced = os.environ.get("FANOLINES_BACKEND", "").strip().lower()
_fast = None
if _forced != "python":
    try:
        # explicit import: `from . import _fast` would read the None above
        _fast = importlib.import_module(__name__ + "._fast")
    except ImportError:
        _fast = None
        if _forced == "cython":
            raise ImportError(
                "FANOLINES_BACKEND=cython but the compiled extension is not available"
            )

if _fast is not None:
    impl = _fast
    BACKEND = "cython"
else:
    impl = pyback
    BACKEND = "python"


def available_backends():
    names = ["python"]
    if _fast is not None:
        names.append("cython")
    return names


def get_backend(name: str):
    if name == "python":
        return pyback
    if name == "cython":
        if _fast is None:
            raise ValueError("compiled backend is not available")
        return _fast
    raise ValueError(f"unknown backend {name!r}")
