"""Infinite graph families and their finite truncations.

A GraphFamily generates nested finite hosts: ``truncate(R)`` keeps the
ball of radius R around the root (half line: vertices 1..R) and adds the
next sphere as Dirichlet boundary.  Spherically symmetric families also
expose their radial profile via ``radial(R)`` so that large-scale
diagnostics avoid materializing exponentially many vertices.

Vertex identifiers are stable across truncations: the half line uses the
integer coordinate, trees and models use breadth-first order grouped by
radius, the star uses the leaf index.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .graphs import FinGraph, graph_from_json
from .radial import RadialModel

_STAR_TAIL_PROBE = (10**4, 10**5, 10**6)


@dataclass(frozen=True)
class GraphFamily:
    kind: str                      # line | tree | model | star | explicit
    params: dict = field(default_factory=dict)

    def __str__(self):
        if self.kind == "tree":
            return f"tree:{self.params['d']}"
        return self.kind

    # -- truncations -------------------------------------------------------

    def truncate(self, R: int) -> FinGraph:
        if R < 1:
            raise ValueError("truncation radius must be >= 1")
        build = _BUILDERS[self.kind]
        return build(self, R)

    def radial(self, R: int) -> RadialModel | None:
        """Radial profile with boundary sphere at radius R+1 (None if the
        family is not spherically symmetric)."""
        if self.kind not in ("line", "tree", "model"):
            return None
        n = R + 2  # radii 0..R+1, last one is the boundary sphere
        rr = np.arange(n)
        extra = self.params.get("com_extra")
        if self.kind == "line":
            kplus = np.ones(n)
            kminus = np.ones(n)
            kminus[0] = 0.0
            nsphere = np.ones(n)
            com = np.zeros(n)
            root_dirichlet = True
        elif self.kind == "tree":
            d = self.params["d"]
            kplus = np.full(n, float(d))
            kplus[0] = d + 1.0
            kminus = np.ones(n)
            kminus[0] = 0.0
            nsphere = np.empty(n)
            nsphere[0] = 1.0
            nsphere[1:] = (d + 1.0) * float(d) ** np.arange(0.0, n - 1)
            com = np.zeros(n)
            root_dirichlet = False
        else:
            kplus = _eval_profile(self.params["k_plus"], rr)
            kminus = _eval_profile(self.params["k_minus"], rr)
            kminus = kminus.copy()
            kminus[0] = 0.0
            nsphere = _eval_profile(self.params["sphere_size"], rr)
            com = _eval_profile(self.params["c_over_m"], rr)
            root_dirichlet = False
        if extra is not None:
            com = com + _eval_profile(extra, rr)
        model = RadialModel(kplus=kplus, kminus=kminus, com=com,
                            mvert=np.ones(n), nsphere=nsphere,
                            root_dirichlet=root_dirichlet)
        if self.kind == "model":
            model.check_flux()
        return model

    def with_potential(self, com_extra: Callable) -> "GraphFamily":
        """Same family with c/m increased by a radial profile (line, tree,
        model) or a per-leaf table (star); used for shifted functionals."""
        if self.kind == "explicit":
            raise ValueError("attach potentials to explicit graphs directly")
        old = self.params.get("com_extra")
        if old is not None:
            prev = old
            com_extra_in = com_extra
            com_extra = lambda r: _eval_profile(prev, r) + _eval_profile(com_extra_in, r)  # noqa: E731
        return replace(self, params={**self.params, "com_extra": com_extra})


def _eval_profile(fn, rr):
    out = fn(np.asarray(rr)) if callable(fn) else np.asarray(fn, dtype=float)[rr]
    return np.asarray(out, dtype=float) * np.ones_like(rr, dtype=float)


# ---------------------------------------------------------------------------
# builders


def build_line() -> GraphFamily:
    """The half line: b(n, n±1) = 1, m = 1, c = 0, value pinned at 0.

    truncate(R) keeps interior {1..R} with boundary {0, R+1}.
    """
    return GraphFamily("line")


def build_tree(d: int) -> GraphFamily:
    """Homogeneous tree in which every vertex has d+1 neighbours (d >= 2)."""
    if int(d) != d or d < 2:
        raise ValueError(f"tree branching number must be an integer >= 2, got {d}")
    return GraphFamily("tree", {"d": int(d)})


def build_model(k_plus, k_minus, c_over_m, sphere_size) -> GraphFamily:
    """Spherically symmetric family from curvature/measure profiles.

    Profiles map a radius array to values; unit vertex measure.  The flux
    condition k+(r)|S_r| = k-(r+1)|S_{r+1}| must hold (the edges between
    consecutive spheres have one consistent total mass); it is verified on
    every materialization and violated profiles raise ValueError.
    """
    fam = GraphFamily("model", {
        "k_plus": k_plus, "k_minus": k_minus,
        "c_over_m": c_over_m, "sphere_size": sphere_size,
    })
    fam.radial(8)  # fail fast on inconsistent flux
    return fam


def build_star(b_row, c_row, b_total: float | None = None) -> GraphFamily:
    """Star on N_0: every leaf k >= 1 connects only to the root 0.

    ``b_row(k)`` are the edge weights and ``c_row(k)`` the potential on the
    leaves; c(0) = 0 and m = 1.  The row sums must converge (the root
    degree is finite); a divergent row raises ValueError.  Pass the exact
    total ``b_total`` when it is known; otherwise the tail beyond 1e6 is
    estimated by power-law extrapolation.
    """
    sums = []
    for k in _STAR_TAIL_PROBE:
        kk = np.arange(1, k + 1, dtype=float)
        sums.append(float(np.sum(b_row(kk))))
    inc1, inc2 = sums[1] - sums[0], sums[2] - sums[1]
    if not (np.isfinite(sums[-1]) and inc2 < 0.5 * inc1 + 1e-30):
        raise ValueError("sum of b(0, k) does not converge; the root degree "
                         "must be finite")
    if b_total is None:
        # increments shrink ~geometrically in the decade; extrapolate
        ratio = inc2 / inc1 if inc1 > 0 else 0.0
        b_total = sums[2] + inc2 * ratio / (1.0 - ratio) if inc2 > 0 else sums[2]
    return GraphFamily("star", {"b_row": b_row, "c_row": c_row,
                                "b_total": float(b_total)})


def paper_star() -> GraphFamily:
    """The concrete star instance b(k,0) = 1/k^2, c(k) = 1/k^3."""
    return build_star(lambda k: 1.0 / k**2, lambda k: 1.0 / k**3,
                      b_total=float(np.pi**2 / 6.0))


def build_explicit(payload) -> GraphFamily:
    """Family wrapping one explicit finite graph (JSON format, see
    graphs.graph_from_json); truncate(R) takes the interior ball of radius
    R around the first listed interior vertex."""
    g = graph_from_json(payload) if not isinstance(payload, FinGraph) else payload
    return GraphFamily("explicit", {"graph": g})


# ---------------------------------------------------------------------------
# truncation implementations


def _truncate_line(fam: GraphFamily, R: int) -> FinGraph:
    n = R + 2
    edges = sp.diags([np.ones(n - 1)], [1], shape=(n, n), format="csr")
    b = edges + edges.T
    interior = np.zeros(n, dtype=bool)
    interior[1:R + 1] = True
    c = np.zeros(n)
    extra = fam.params.get("com_extra")
    if extra is not None:
        c[1:] = _eval_profile(extra, np.arange(1, n))  # m = 1
    return FinGraph(b=b.tocsr(), m=np.ones(n), c=c, interior=interior,
                    meta={"family": "line", "radius": np.arange(n)})


def _truncate_tree(fam: GraphFamily, R: int) -> FinGraph:
    d = fam.params["d"]
    sizes = [1] + [(d + 1) * d ** (r - 1) for r in range(1, R + 2)]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    radius = np.empty(n, dtype=int)
    for r, (lo, hi) in enumerate(zip(offsets[:-1], offsets[1:])):
        radius[lo:hi] = r
    rows, cols = [], []
    for r in range(R + 1):
        lo, hi = offsets[r], offsets[r + 1]
        children_per = d + 1 if r == 0 else d
        base = offsets[r + 1]
        for i, v in enumerate(range(lo, hi)):
            for j in range(children_per):
                w = base + i * children_per + j
                rows.append(v)
                cols.append(w)
    data = np.ones(len(rows))
    b = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    b = b + b.T
    interior = radius <= R
    c = np.zeros(n)
    extra = fam.params.get("com_extra")
    if extra is not None:
        c = _eval_profile(extra, radius)
    return FinGraph(b=b.tocsr(), m=np.ones(n), c=c, interior=interior,
                    meta={"family": f"tree:{d}", "radius": radius})


def _truncate_model(fam: GraphFamily, R: int) -> FinGraph:
    model = fam.radial(R)
    sizes = model.nsphere.astype(int)
    if not np.all(sizes == model.nsphere):
        raise ValueError("sphere sizes must be integers to materialize a model")
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    radius = np.empty(n, dtype=int)
    for r, (lo, hi) in enumerate(zip(offsets[:-1], offsets[1:])):
        radius[lo:hi] = r
    rows, cols, data = [], [], []
    for r in range(R + 1):
        lo, hi = offsets[r], offsets[r + 1]
        nlo, nhi = offsets[r + 1], offsets[r + 2]
        w = model.kplus[r] * 1.0 / sizes[r + 1]  # m = 1, equal split
        for v in range(lo, hi):
            for u in range(nlo, nhi):
                rows.append(v)
                cols.append(u)
                data.append(w)
    b = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    b = b + b.T
    interior = radius <= R
    c = model.com[radius]  # m = 1
    return FinGraph(b=b.tocsr(), m=np.ones(n), c=c, interior=interior,
                    meta={"family": "model", "radius": radius})


def _truncate_star(fam: GraphFamily, R: int) -> FinGraph:
    """Leaves 1..R plus the root; the leaves beyond R merge into one
    Dirichlet boundary vertex (exact for energies of kept functions)."""
    kk = np.arange(1, R + 1, dtype=float)
    brow = np.asarray(fam.params["b_row"](kk), dtype=float)
    tail = fam.params["b_total"] - float(np.sum(brow))
    n = R + 2
    rows = np.zeros(R + 1, dtype=int)
    cols = np.arange(1, R + 2)
    data = np.concatenate([brow, [max(tail, 0.0)]])
    b = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    b = b + b.T
    interior = np.ones(n, dtype=bool)
    interior[R + 1] = False
    c = np.zeros(n)
    c[1:R + 1] = np.asarray(fam.params["c_row"](kk), dtype=float)
    extra = fam.params.get("com_extra")
    if extra is not None:
        c[:R + 1] += _eval_profile(extra, np.arange(R + 1))
    return FinGraph(b=b.tocsr(), m=np.ones(n), c=c, interior=interior,
                    meta={"family": "star", "radius": None})


def _truncate_explicit(fam: GraphFamily, R: int) -> FinGraph:
    g: FinGraph = fam.params["graph"]
    root = int(g.interior_indices[0])
    dist = sp.csgraph.shortest_path(g.b, unweighted=True, indices=root)
    keep = (dist <= R) & g.interior
    interior = keep.copy()
    reach = np.asarray(g.b[np.flatnonzero(keep)].sum(axis=0)).ravel() > 0
    used = keep | (reach & ~keep)
    idx = np.flatnonzero(used)
    sub = g.b[np.ix_(idx, idx)].tocsr()
    return FinGraph(b=sub, m=g.m[idx], c=g.c[idx], interior=interior[idx],
                    meta={**g.meta, "vertex_ids": idx})


_BUILDERS = {
    "line": _truncate_line,
    "tree": _truncate_tree,
    "model": _truncate_model,
    "star": _truncate_star,
    "explicit": _truncate_explicit,
}
