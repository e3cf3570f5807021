"""Pure-Python fallback for the compiled line-family kernels.

Weight tables go through gmpy2 (the precision argument is the same as the
binary128 route, see numerics.py); the cutoff energy is a chunked numpy
evaluation of the same sums.  Results agree with the compiled kernels to
float64 rounding; the energy fallback is ~10x slower.
"""

from __future__ import annotations

import numpy as np

from . import numerics

_CHUNK = 1 << 20


def line_weight_graph(n_max: int, p: float) -> np.ndarray:
    return numerics.line_weight_graph_mpfr(n_max, p)


def line_weight_formula(n_max: int, p: float) -> np.ndarray:
    return numerics.line_weight_formula_mpfr(n_max, p)


def _cutoff_bounds(ncut: int, p: float) -> tuple[int, int]:
    q = p / (p - 1.0)
    s = 1.0 / q
    xq = int(np.floor(float(ncut) ** q))
    while (xq + 1) ** s <= ncut:
        xq += 1
    while xq**s > ncut:
        xq -= 1
    xhi = int(np.floor(float(ncut) ** (2 * q)))
    while (xhi + 1) ** s < ncut * ncut:
        xhi += 1
    while xhi > xq and xhi**s >= ncut * ncut:
        xhi -= 1
    return xq, xhi


def line_cutoff_energy(ncut: int, p: float) -> tuple[float, int]:
    s = (p - 1.0) / p
    lnn = np.log(float(ncut))
    _, xhi = _cutoff_bounds(ncut, p)

    def f_of(x: np.ndarray) -> np.ndarray:
        v = x**s
        with np.errstate(divide="ignore"):
            psi = np.clip(2.0 - np.log(np.maximum(v, 1e-300)) / lnn, 0.0, 1.0)
        psi[x > xhi] = 0.0
        return v * psi

    kin = 0.0
    pot = 0.0
    lo = 0
    while lo <= xhi:
        hi = min(lo + _CHUNK, xhi + 1)
        x = np.arange(lo, hi + 1, dtype=float)  # one-element overlap
        f = f_of(x)
        if lo == 0:
            f[0] = 0.0
        kin += float(np.sum(np.abs(np.diff(f)) ** p))
        xin = x[:-1][x[:-1] >= 1.0]
        fin = f[:-1][x[:-1] >= 1.0]
        pot += float(np.sum(numerics.line_weight_stable(xin, p) * fin**p))
        lo = hi
    return kin - pot, xhi
