# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled line-family kernels (see _quadcore.c for the numerics)."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t

cdef extern from "_quadcore.h":
    void ph_line_weight_graph(int64_t N, double p, double *out) nogil
    void ph_line_weight_formula(int64_t N, double p, double *out) nogil
    double ph_line_cutoff_energy(int64_t ncut, double p,
                                 int64_t *support_out) nogil


def line_weight_graph(int64_t n_max, double p):
    """Hardy weight table on {1..n_max} via the Schrödinger operator route."""
    out = np.empty(n_max, dtype=np.float64)
    cdef double[::1] buf = out
    with nogil:
        ph_line_weight_graph(n_max, p, &buf[0])
    return out


def line_weight_formula(int64_t n_max, double p):
    """Hardy weight table on {1..n_max} via the closed-form route."""
    out = np.empty(n_max, dtype=np.float64)
    cdef double[::1] buf = out
    with nogil:
        ph_line_weight_formula(n_max, p, &buf[0])
    return out


def line_cutoff_energy(int64_t ncut, double p):
    """Shifted energy of the log-cutoff test function on the half line.

    Returns (energy, support_top).
    """
    cdef int64_t sup = 0
    cdef double e
    with nogil:
        e = ph_line_cutoff_energy(ncut, p, &sup)
    return e, sup
