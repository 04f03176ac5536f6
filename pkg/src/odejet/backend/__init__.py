"""Kernel backend selection.

Two interchangeable implementations of the array kernels exist:

* ``odejet.backend._native`` — Cython extension with explicit C loops,
  faster on the small tensors this library works with;
* ``odejet.backend.py_kernels`` — pure numpy, always available.

The native module is preferred when importable.  Set ``ODEJET_BACKEND`` to
``python`` or ``native`` to force a choice (``native`` raises if the
extension failed to build).  The active module is exposed as ``kernels``;
``kernels.NAME`` identifies the winner and is recorded in run manifests.
"""

from __future__ import annotations

import os

from . import py_kernels


def _select():
    choice = os.environ.get("ODEJET_BACKEND", "").strip().lower()
    if choice == "python":
        return py_kernels
    try:
        from . import _native
    except ImportError:
        if choice == "native":
            raise ImportError(
                "ODEJET_BACKEND=native but the compiled extension is not "
                "available; reinstall with a working C toolchain"
            )
        return py_kernels
    return _native


kernels = _select()


def backend_name() -> str:
    return kernels.NAME


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _native  # noqa: F401

        names.append("native")
    except ImportError:
        pass
    return names


def get_backend(name: str):
    """Fetch a kernel module by name (for the backend benchmark)."""
    if name == "python":
        return py_kernels
    if name == "native":
        from . import _native

        return _native
    raise ValueError(f"unknown backend {name!r}")
