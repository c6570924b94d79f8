"""Kernel backend selection.

The package ships two implementations of its numeric kernels: a compiled
extension (``swarmrig._kernels``) and a pure-Python reference
(``swarmrig._kernels_py``). They are bit-identical by construction; the
compiled one is just faster. Selection happens once at import:

* ``SWARMRIG_PURE=1`` in the environment forces the pure backend;
* otherwise the compiled extension is used when importable, with a
  silent fallback to pure when the build was skipped or failed.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SWARMRIG_PURE", "") == "1":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND: str = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
