"""Uncertainty-type and Rellich-type inequality chains built on a Hardy
weight.  Every link of a chain is verified individually; a failing link
names itself in the returned report.

Sums run over supp(w) exactly as the inequalities restrict them: vertices
with w = 0 never enter the w^(-1/(p-1)) moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exponents import as_p
from .graphs import FinGraph, asvalues
from .operators import apply_schrodinger, energy


@dataclass
class InequalityChainReport:
    lhs: float
    rhs: float
    links: list = field(default_factory=list)  # (name, left, right, slack)

    def slacks(self) -> dict:
        return {name: slack for name, _, _, slack in self.links}

    def failing(self, tol: float) -> list:
        return [name for name, lv, rv, slack in self.links
                if slack < -tol * (abs(lv) + abs(rv))]


def _check_support(g: FinGraph, w, phi):
    wv = asvalues(w, g.n_vertices)
    pv = asvalues(phi, g.n_vertices)
    if np.any(wv < 0):
        raise ValueError("weight must be nonnegative")
    if np.any(pv[wv == 0] != 0):
        raise ValueError("test function must be supported in supp(w)")
    if np.any(pv[g.boundary] != 0):
        raise ValueError("test function must be supported in the interior")
    return wv, pv


def hpw_check(g: FinGraph, w, phi, p,
              moment_sites=None) -> InequalityChainReport:
    """Uncertainty chain  Σ|φ|^p <= (Σ w^(-1/(p-1))|φ|^p)^((p-1)/p) h(φ)^(1/p).

    Links: the Hölder split, the Hardy bound Σ w|φ|^p <= h(φ), and the
    end-to-end bound.  When ``moment_sites`` gives the coordinate n of
    every vertex (the half-line specialization), the extra comparison link
    (p/(p-1)) (Σ n^(p/(p-1))|φ|^p)^((p-1)/p) h^(1/p) is appended.
    """
    pe = as_p(p)
    wv, pv = _check_support(g, w, phi)
    supp = wv > 0
    absp = np.abs(pv) ** pe.p
    lhs = float(np.sum(absp[supp]))
    mom = float(np.sum(wv[supp] ** (-1.0 / (pe.p - 1.0)) * absp[supp]))
    wnorm = float(np.sum(wv * absp))
    h = energy(g, pv, pe).total
    links = []
    mid = mom ** ((pe.p - 1.0) / pe.p) * wnorm ** (1.0 / pe.p)
    links.append(("hoelder-split", lhs, mid, mid - lhs))
    links.append(("hardy", wnorm, h, h - wnorm))
    rhs = mom ** ((pe.p - 1.0) / pe.p) * h ** (1.0 / pe.p)
    links.append(("end-to-end", lhs, rhs, rhs - lhs))
    if moment_sites is not None:
        n = np.asarray(moment_sites, dtype=float)
        mnp = float(np.sum(n[supp] ** (pe.p / (pe.p - 1.0)) * absp[supp]))
        loose = (pe.p / (pe.p - 1.0)) * mnp ** ((pe.p - 1.0) / pe.p) \
            * h ** (1.0 / pe.p)
        links.append(("power-moment", rhs, loose, loose - rhs))
    return InequalityChainReport(lhs=lhs, rhs=rhs, links=links)


def rellich_check(g: FinGraph, w, phi, p,
                  moment_sites=None) -> InequalityChainReport:
    """Rellich chain  Σ w|φ|^p <= Σ w^(-1/(p-1)) (m|Hφ|)^(p/(p-1)).

    Links: the Hardy bound, the Green pairing h(φ) = Σ m Hφ φ, the Hölder
    split of the pairing, and the end-to-end bound.  With
    ``moment_sites`` (half line) the displayed specialization links are
    appended: ((p-1)/p)^p Σ(|φ(n)|/n)^p below and the n-moment of |Lφ|
    above, the latter with the constant (p/(p-1))^(p/(p-1)) that follows
    from w >= ((p-1)/p)^p n^(-p).
    """
    pe = as_p(p)
    wv, pv = _check_support(g, w, phi)
    supp = wv > 0
    if np.any(wv[g.interior] <= 0):
        raise ValueError("Rellich needs w > 0 on the interior support")
    absp = np.abs(pv) ** pe.p
    wnorm = float(np.sum(wv * absp))
    h = energy(g, pv, pe).total
    hphi = apply_schrodinger(g, pv, pe)
    mh = g.m * np.where(g.interior, hphi, 0.0)
    pairing = float(np.sum(mh * pv))
    pn = pe.p / (pe.p - 1.0)
    dual = float(np.sum(wv[supp] ** (-1.0 / (pe.p - 1.0))
                        * np.abs(mh[supp]) ** pn))
    links = []
    links.append(("hardy", wnorm, h, h - wnorm))
    links.append(("green-pairing", h, pairing, -abs(h - pairing)))
    split = dual ** (1.0 / pn) * wnorm ** (1.0 / pe.p)
    links.append(("hoelder-split", pairing, split, split - pairing))
    links.append(("end-to-end", wnorm, dual, dual - wnorm))
    rep = InequalityChainReport(lhs=wnorm, rhs=dual, links=links)
    if moment_sites is not None:
        n = np.asarray(moment_sites, dtype=float)
        low = pe.classical_constant * float(np.sum((np.abs(pv[supp]) / n[supp]) ** pe.p))
        links.insert(0, ("classical-below", low, wnorm, wnorm - low))
        mom = float(np.sum(np.abs(n[supp] * mh[supp]) ** pn))
        loose = (pe.p / (pe.p - 1.0)) ** pn * mom
        links.append(("power-moment", dual, loose, loose - dual))
    return rep
