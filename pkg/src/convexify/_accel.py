"""Kernel engine selection.

Imports the compiled extension when it was built, otherwise falls back to
the pure-Python implementations.  Both expose the same two functions with
bit-identical float64 behavior; ``ENGINE`` records which one is active.
"""

from __future__ import annotations

try:
    from . import _kernels as _impl

    COMPILED = True
except ImportError:
    from . import _kernels_py as _impl

    COMPILED = False

ENGINE = "compiled" if COMPILED else "python"
project_pairs = _impl.project_pairs
pivot_update = _impl.pivot_update

__all__ = ["COMPILED", "ENGINE", "pivot_update", "project_pairs"]
