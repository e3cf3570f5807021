"""Finite weighted graphs with an interior/boundary split.

A FinGraph is the finite host on which all operators act: a symmetric
edge-weight matrix b with zero diagonal, a strictly positive vertex measure
m on the interior, a real potential c on the interior, and a boundary made
of the vertices adjacent to the interior.  Functions are extended by zero
on the boundary whenever an energy is evaluated (Dirichlet convention).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class FinGraph:
    b: sp.csr_matrix          # symmetric nonnegative weights, zero diagonal
    m: np.ndarray             # vertex measure, > 0 on interior
    c: np.ndarray             # potential (used on interior only)
    interior: np.ndarray      # boolean mask
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return self.b.shape[0]

    @property
    def boundary(self) -> np.ndarray:
        return ~self.interior

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(self.interior)

    def degrees(self) -> np.ndarray:
        return np.asarray(self.b.sum(axis=1)).ravel()

    def edges(self):
        """Iterate undirected edges (x, y, weight) with x < y."""
        coo = sp.triu(self.b, k=1).tocoo()
        return zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())


@dataclass
class GridFn:
    """A real function on the vertices of a host graph.

    Values outside the support are exactly zero; the support is just the
    set of nonzero entries (every function on a finite host has compact
    support).
    """

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    @classmethod
    def zeros(cls, g: FinGraph) -> "GridFn":
        return cls(np.zeros(g.n_vertices))

    @classmethod
    def indicator(cls, g: FinGraph, x: int) -> "GridFn":
        v = np.zeros(g.n_vertices)
        v[x] = 1.0
        return cls(v)


def asvalues(f, n: int | None = None) -> np.ndarray:
    """Accept a GridFn or an array; return the dense value array."""
    v = f.values if isinstance(f, GridFn) else np.asarray(f, dtype=float)
    if n is not None and v.shape != (n,):
        raise ValueError(f"function has {v.shape} values, host has {n} vertices")
    return v


def validate(g: FinGraph) -> list[str]:
    """Check every structural invariant; returns the list of violations."""
    problems = []
    b = g.b
    if b.shape[0] != b.shape[1]:
        problems.append("weight matrix is not square")
        return problems
    n = b.shape[0]
    if g.m.shape != (n,) or g.c.shape != (n,) or g.interior.shape != (n,):
        problems.append("m/c/interior sizes do not match the vertex count")
        return problems
    if b.diagonal().any():
        problems.append("b has nonzero diagonal entries")
    if (b.data < 0).any():
        problems.append("b has negative weights")
    asym = (b - b.T).tocoo()
    if len(asym.data) and np.max(np.abs(asym.data)) > 0:
        problems.append("b is not symmetric")
    if not np.all(np.isfinite(g.degrees())):
        problems.append("some vertex degree is not finite")
    if np.any(g.m[g.interior] <= 0):
        problems.append("m is not strictly positive on the interior")
    ii = g.interior_indices
    if ii.size == 0:
        problems.append("interior is empty")
    else:
        sub = g.b[np.ix_(ii, ii)]
        ncomp, _ = sp.csgraph.connected_components(sub, directed=False)
        if ncomp != 1:
            problems.append("interior is not connected")
    # boundary vertices must touch the interior
    bd = np.flatnonzero(g.boundary)
    if bd.size:
        touch = np.asarray(g.b[bd][:, ii].sum(axis=1)).ravel() if ii.size else 0
        if np.any(touch == 0):
            problems.append("some boundary vertex is not adjacent to the interior")
    return problems


def build_graph(edges, m, c, interior, n_vertices=None, meta=None) -> FinGraph:
    """Assemble a FinGraph from an undirected edge list [(x, y, w), ...]."""
    edges = list(edges)
    if n_vertices is None:
        n_vertices = 1 + max(max(x, y) for x, y, _ in edges) if edges else len(m)
    seen = set()
    for x, y, _ in edges:
        key = (min(x, y), max(x, y))
        if key in seen:
            raise ValueError(f"edge {key} repeated in edge list")
        seen.add(key)
    rows = [x for x, y, w in edges] + [y for x, y, w in edges]
    cols = [y for x, y, w in edges] + [x for x, y, w in edges]
    data = [w for _, _, w in edges] * 2
    b = sp.csr_matrix((data, (rows, cols)), shape=(n_vertices, n_vertices))
    mask = np.zeros(n_vertices, dtype=bool)
    mask[np.asarray(list(interior), dtype=int)] = True
    return FinGraph(
        b=b,
        m=np.asarray(m, dtype=float),
        c=np.asarray(c, dtype=float),
        interior=mask,
        meta=meta or {},
    )


def graph_from_json(payload) -> FinGraph:
    """Load the explicit JSON graph format.

    {"vertices": [...], "edges": [[x, y, b]], "m": {...}, "c": {...},
     "interior": [...]}; the edge list must not repeat unordered pairs.
    Vertex names may be arbitrary; they are mapped to 0..n-1 in the
    listed order and the mapping is kept in meta["labels"].
    """
    if isinstance(payload, (str, bytes)):
        payload = json.loads(payload)
    labels = list(payload["vertices"])
    index = {v: i for i, v in enumerate(labels)}
    if len(index) != len(labels):
        raise ValueError("duplicate vertex names")
    edges = [(index[x], index[y], float(w)) for x, y, w in payload["edges"]]
    m = np.ones(len(labels))
    c = np.zeros(len(labels))
    for k, v in payload.get("m", {}).items():
        m[index[_coerce(k, index)]] = float(v)
    for k, v in payload.get("c", {}).items():
        c[index[_coerce(k, index)]] = float(v)
    interior = [index[v] for v in payload["interior"]]
    return build_graph(edges, m, c, interior, n_vertices=len(labels),
                       meta={"labels": labels})


def _coerce(key, index):
    """JSON object keys are strings; accept either the label or its repr."""
    if key in index:
        return key
    for cast in (int, float):
        try:
            if cast(key) in index:
                return cast(key)
        except (TypeError, ValueError):
            pass
    raise KeyError(key)
