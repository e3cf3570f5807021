"""Kernel backend selection: compiled extension with pure-Python fallback.

Set PHARDY_NO_EXT=1 to force the fallback (used by the equivalence tests
and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PHARDY_NO_EXT"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - build dependent
        _impl = _kernels_py
        BACKEND = "python"


def line_weight_graph(n_max: int, p: float):
    """Half-line Hardy weight table via the operator route, high precision."""
    return _impl.line_weight_graph(n_max, p)


def line_weight_formula(n_max: int, p: float):
    """Half-line Hardy weight table via the closed form, high precision."""
    return _impl.line_weight_formula(n_max, p)


def line_cutoff_energy(ncut: int, p: float):
    """(shifted energy, support top) of the log-cutoff function on the line."""
    return _impl.line_cutoff_energy(ncut, p)
