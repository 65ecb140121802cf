"""Pick the compiled kernels when available, else the numpy fallback.

Set ``DILUTEDMP_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as py

kernels = py
compiled = None

if os.environ.get("DILUTEDMP_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled = None
    else:
        kernels = compiled

NAME = kernels.BACKEND_NAME


def get(name: str):
    """Return the kernel module called ``name`` ("python" or "cython")."""
    if name == "python":
        return py
    if name == "cython":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
