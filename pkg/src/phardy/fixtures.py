"""Closed-form regression fixtures binding the example families to exact
expected values: the half line, homogeneous trees, general model graphs,
and the star counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numerics
from .exponents import as_p
from .families import (GraphFamily, build_line, build_model, build_star,
                       build_tree, paper_star)
from .radial import free_greens_series


@dataclass
class Fixture:
    name: str
    family: GraphFamily
    p: float
    reference: Callable          # R -> u on radii/vertices 0..R
    expected_weight: Callable    # site array -> w values
    expected_growth: dict        # growth law of the null-criticality sums


def fixture_line(p) -> Fixture:
    """Half line with u(n) = n; the weight is the two-sided root increment
    formula and the partial sums grow like ((p-1)/p)^p · log R."""
    pe = as_p(p)
    fam = build_line()

    def expected(sites):
        return numerics.line_weight_stable(np.asarray(sites, dtype=float), pe.p)

    return Fixture(
        name="line", family=fam, p=pe.p,
        reference=lambda R: np.arange(R + 1, dtype=float),
        expected_weight=expected,
        expected_growth={"law": "log", "slope": pe.classical_constant},
    )


def tree_weight_values(d: int, p, sites) -> np.ndarray:
    """The two-case closed form: (d+1)(1-d^(-1/p))^(p-1) at the root and
    d(1-d^(-1/p))^(p-1) - (d^(1/p)-1)^(p-1) on every other sphere."""
    pe = as_p(p)
    a = (1.0 - float(d) ** (-1.0 / pe.p)) ** (pe.p - 1.0)
    b = (float(d) ** (1.0 / pe.p) - 1.0) ** (pe.p - 1.0)
    sites = np.asarray(sites)
    return np.where(sites == 0, (d + 1.0) * a, d * a - b)


def tree_greens_constant(d: int, p) -> float:
    """G(r) = C d^(-r/(p-1)) with C = (d+1)^(-1/(p-1)) / (1 - d^(-1/(p-1)))."""
    pe = as_p(p)
    e = 1.0 / (pe.p - 1.0)
    return (d + 1.0) ** (-e) / (1.0 - float(d) ** (-e))


def fixture_tree(d: int, p) -> Fixture:
    pe = as_p(p)
    fam = build_tree(d)
    cg = tree_greens_constant(d, pe)
    winf = float(tree_weight_values(d, pe, np.array([1]))[0])
    slope = winf * cg ** (pe.p - 1.0) * (d + 1.0) / d

    def reference(R):
        return cg * float(d) ** (-np.arange(R + 1, dtype=float) / (pe.p - 1.0))

    return Fixture(
        name=f"tree:{d}", family=fam, p=pe.p,
        reference=reference,
        expected_weight=lambda sites: tree_weight_values(d, pe, sites),
        expected_growth={"law": "linear", "slope": slope},
    )


def fixture_model(k_plus, k_minus, c_over_m, sphere_size, p,
                  name="model") -> Fixture:
    """Model fixture from profiles; the expected weight evaluates the
    radial display with g = G^((p-1)/p) and G the boundary-mass series.

    A divergent Green series raises ValueError (no subcritical free
    operator to anchor the weight)."""
    pe = as_p(p)
    fam = build_model(k_plus, k_minus, c_over_m, sphere_size)

    def greens(R):
        model = fam.radial(R)
        M = model.sphere_mass()
        B = M * model.kplus
        ratio = B[-1] / B[-2]

        def bmass(kk):
            kk = np.asarray(kk)
            inside = np.minimum(kk, len(B) - 1)
            return B[inside] * ratio ** np.maximum(kk - (len(B) - 1), 0)

        return free_greens_series(bmass, float(M[0]), pe, R)

    def expected(sites):
        sites = np.asarray(sites, dtype=int)
        R = int(sites.max()) + 1
        G = greens(R + 1)
        g = G ** (1.0 / pe.q)
        model = fam.radial(R)
        kp, km = model.kplus, model.kminus
        w = np.empty(len(sites))
        for j, r in enumerate(sites):
            if r == 0:
                w[j] = kp[0] * (1.0 - g[1] / g[0]) ** (pe.p - 1.0)
            else:
                w[j] = (kp[r] * (1.0 - g[r + 1] / g[r]) ** (pe.p - 1.0)
                        - km[r] * (g[r - 1] / g[r] - 1.0) ** (pe.p - 1.0))
        return w

    return Fixture(name=name, family=fam, p=pe.p, reference=greens,
                   expected_weight=expected,
                   expected_growth={"law": "linear"})


def tree_profile_model(d: int):
    """The model profile that reproduces the homogeneous tree."""
    def k_plus(r):
        r = np.asarray(r)
        return np.where(r == 0, d + 1.0, float(d))

    def k_minus(r):
        r = np.asarray(r)
        return np.where(r == 0, 0.0, 1.0)

    def sphere(r):
        r = np.asarray(r)
        return np.where(r == 0, 1.0, (d + 1.0) * float(d) ** np.maximum(r - 1.0, 0.0))

    return k_plus, k_minus, lambda r: np.zeros_like(np.asarray(r, dtype=float)), sphere


def star_weight_values(p, sites, b_row=None, c_row=None) -> np.ndarray:
    """Leaf weights of the star: with t_k = G(0)/G(k) = 1 + (c_k/b_k)^(1/(p-1)),
    w(k) = b_k [ (t_k - 1)^(p-1) - (t_k^((p-1)/p) - 1)^(p-1) ] > 0."""
    pe = as_p(p)
    kk = np.asarray(sites, dtype=float)
    bk = 1.0 / kk**2 if b_row is None else np.asarray(b_row(kk), dtype=float)
    ck = 1.0 / kk**3 if c_row is None else np.asarray(c_row(kk), dtype=float)
    delta = (ck / bk) ** (1.0 / (pe.p - 1.0))
    root_inc = np.expm1(np.log1p(delta) / pe.q)
    return ck - bk * root_inc ** (pe.p - 1.0)


def fixture_star(p) -> Fixture:
    """The star instance b(k,0) = 1/k^2, c(k) = 1/k^3: the formula weight
    is positive but the partial sums Σ w m v^p converge, the documented
    failure of null-criticality."""
    pe = as_p(p)
    fam = paper_star()
    from .hardy import star_greens_table

    def expected(sites):
        sites = np.asarray(sites)
        w = np.empty(len(sites))
        leaf = sites >= 1
        w[leaf] = star_weight_values(pe, sites[leaf])
        if np.any(~leaf):
            w[~leaf] = np.nan  # root value is only defined implicitly
        return w

    return Fixture(
        name="star", family=fam, p=pe.p,
        reference=lambda R: star_greens_table(fam, pe, R),
        expected_weight=expected,
        expected_growth={"law": "convergent"},
    )


def get_fixture(name: str, p) -> Fixture:
    """CLI-facing fixture lookup: line, tree:d, star, model:<json-file>."""
    if name == "line":
        return fixture_line(p)
    if name.startswith("tree:"):
        return fixture_tree(int(name.split(":", 1)[1]), p)
    if name == "star":
        return fixture_star(p)
    if name.startswith("model:"):
        import json

        with open(name.split(":", 1)[1]) as fh:
            prof = json.load(fh)
        arrs = {k: np.asarray(prof[k], dtype=float)
                for k in ("k_plus", "k_minus", "c_over_m", "sphere_size")}

        def mk(key):
            a = arrs[key]
            return lambda r: a[np.minimum(np.asarray(r, dtype=int), len(a) - 1)]

        return fixture_model(mk("k_plus"), mk("k_minus"), mk("c_over_m"),
                             mk("sphere_size"), p)
    raise ValueError(f"unknown fixture {name!r}")
