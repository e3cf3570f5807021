"""Shared fixtures: seeded random hosts and slow independent oracles.

The oracles reimplement the operators with plain Python loops over edge
dictionaries so that identity tests never share code with the vectorized
paths they check.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from phardy.graphs import FinGraph, build_graph


def random_host(rng, n_interior=None, n_boundary=None, signed_c=True):
    """Connected random weighted host with an interior/boundary split."""
    ni = int(rng.integers(4, 16)) if n_interior is None else n_interior
    nb = int(rng.integers(1, 4)) if n_boundary is None else n_boundary
    n = ni + nb
    edges = {}
    order = rng.permutation(ni)
    for a, b in zip(order, order[1:]):          # interior spanning tree
        edges[(min(a, b), max(a, b))] = float(rng.uniform(0.2, 2.0))
    extra = int(rng.integers(0, 2 * ni))
    for _ in range(extra):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            edges[(min(a, b), max(a, b))] = float(rng.uniform(0.2, 2.0))
    for j in range(ni, n):                      # hook every boundary vertex
        a = int(rng.integers(0, ni))
        edges[(min(a, j), max(a, j))] = float(rng.uniform(0.2, 2.0))
    m = rng.uniform(0.4, 2.5, size=n)
    c = rng.uniform(-0.4, 1.0, size=n) if signed_c else rng.uniform(0.0, 1.0, size=n)
    g = build_graph([(a, b, w) for (a, b), w in edges.items()], m, c,
                    interior=range(ni), n_vertices=n)
    return g


def interior_fn(rng, g: FinGraph, nonneg=False):
    v = rng.standard_normal(g.n_vertices)
    if nonneg:
        v = np.abs(v)
    v[g.boundary] = 0.0
    return v


# ---------------------------------------------------------------------------
# loop oracles


def phi_p_slow(a: float, p: float) -> float:
    if a == 0:
        return 0.0
    return abs(a) ** (p - 1.0) * (1.0 if a > 0 else -1.0)


def edge_list(g: FinGraph):
    coo = g.b.tocoo()
    return [(int(x), int(y), float(w))
            for x, y, w in zip(coo.row, coo.col, coo.data) if x < y]


def energy_slow(g: FinGraph, f, p: float) -> float:
    total = 0.0
    for x, y, w in edge_list(g):
        total += w * abs(f[x] - f[y]) ** p
    for x in np.flatnonzero(g.interior):
        total += g.c[x] * abs(f[x]) ** p
    return total


def schrodinger_slow(g: FinGraph, f, p: float):
    out = np.zeros(g.n_vertices)
    adj = {x: [] for x in range(g.n_vertices)}
    for x, y, w in edge_list(g):
        adj[x].append((y, w))
        adj[y].append((x, w))
    for x in np.flatnonzero(g.interior):
        s = sum(w * phi_p_slow(f[x] - f[y], p) for y, w in adj[x])
        out[x] = (s + g.c[x] * phi_p_slow(f[x], p)) / g.m[x]
    return out


def greens_rhs_slow(g: FinGraph, f, phi, p: float) -> float:
    """The integrated-by-parts side of the pairing <Hf, phi>."""
    ii = g.interior
    total = 0.0
    for x, y, w in edge_list(g):
        gr = phi_p_slow(f[x] - f[y], p)
        if ii[x] and ii[y]:
            total += w * gr * (phi[x] - phi[y])
        elif ii[x]:
            total += w * gr * phi[x]
        elif ii[y]:
            total += w * (-gr) * phi[y]
    for x in np.flatnonzero(ii):
        total += g.c[x] * phi_p_slow(f[x], p) * phi[x]
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


P_VALUES = (1.5, 2.0, 3.0)
