"""Simulation kernel selection.

The compiled extension is preferred when it imported cleanly; the numpy
kernel is the fallback.  Set CODEDSTREAM_BACKEND=python or =cython to force
a choice (forcing cython raises if the extension is missing).
"""

from __future__ import annotations

import os

_choice = os.environ.get("CODEDSTREAM_BACKEND", "").strip().lower()
if _choice == "python":
    from . import _kernel_py as _impl
elif _choice == "cython":
    from . import _kernel_c as _impl  # type: ignore[no-redef]
elif _choice == "":
    try:
        from . import _kernel_c as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernel_py as _impl
else:
    raise ImportError(f"unknown CODEDSTREAM_BACKEND {_choice!r}")

BACKEND: str = _impl.BACKEND
iteration_durations = _impl.iteration_durations


def available_backends() -> list[str]:
    """Names of the kernels importable in this installation."""
    names = []
    try:
        from . import _kernel_c  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    names.append("python")
    return names
