"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``VTTRACE_PURE_PYTHON=1`` is set, the pure-Python implementations are used.
Both produce identical results.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

STATUS_REASONS = {1: "unresolvable-congestion", 2: "insertion-mismatch", 3: "no-codeword"}


def available() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])


def get_backend(name: str | None = None) -> ModuleType:
    """``"cython"``, ``"python"``, or ``None`` for the default."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


BACKEND = "cython" if _ckernels is not None and not os.environ.get("VTTRACE_PURE_PYTHON") else "python"


def class_targets(code) -> list[int]:
    """Integer class keys as the kernels expect them."""
    if code.q == 2:
        return [c.a for c in code.classes]
    return [c.a * code.q + c.c for c in code.classes]
