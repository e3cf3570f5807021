"""The p-Laplacian, p-Schrödinger operator and the associated energies.

Conventions: the energy runs over ordered vertex pairs with an explicit
1/2, test functions are extended by zero on the boundary, and ⟨a⟩ denotes
the odd power |a|^(p-2) a (see exponents.phi_p).  The simplified energies
carry the same 1/2 ordered-pair normalization as the energy itself; this
is what makes the p=2 product-decomposition identity exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import as_p, phi_p
from .graphs import FinGraph, asvalues


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential


@dataclass(frozen=True)
class SimplifiedEnergyValues:
    """The product-decomposition energies h_u, h_{u,1}, h_{u,2}, h_{u,3}.

    h_u2 is only defined for p >= 2 and is None otherwise.
    """
    h_u: float
    h_u1: float
    h_u2: float | None
    h_u3: float


def _pairs(g: FinGraph):
    coo = g.b.tocoo()
    return coo.row, coo.col, coo.data


def apply_laplacian(g: FinGraph, f, p) -> np.ndarray:
    """(Lf)(x) = m(x)^-1 sum_y b(x,y) <f(x)-f(y)> on the interior.

    Boundary entries of the returned array are zero placeholders.
    """
    pe = as_p(p)
    fv = asvalues(f, g.n_vertices)
    row, col, dat = _pairs(g)
    contrib = dat * phi_p(fv[row] - fv[col], pe)
    out = np.bincount(row, weights=contrib, minlength=g.n_vertices)
    out[g.boundary] = 0.0
    out[g.interior] /= g.m[g.interior]
    return out


def apply_schrodinger(g: FinGraph, f, p) -> np.ndarray:
    """(Hf)(x) = (Lf)(x) + c(x)/m(x) <f(x)> on the interior."""
    pe = as_p(p)
    fv = asvalues(f, g.n_vertices)
    out = apply_laplacian(g, fv, pe)
    ii = g.interior
    out[ii] += g.c[ii] / g.m[ii] * phi_p(fv[ii], pe)
    return out


def energy(g: FinGraph, phi, p) -> EnergyBreakdown:
    """h(φ) = ½ Σ b|∇φ|^p + Σ c|φ|^p for φ supported in the interior."""
    pe = as_p(p)
    fv = asvalues(phi, g.n_vertices)
    if np.any(fv[g.boundary] != 0):
        raise ValueError("test function must be supported in the interior")
    row, col, dat = _pairs(g)
    kin = 0.5 * float(np.sum(dat * np.abs(fv[row] - fv[col]) ** pe.p))
    pot = float(np.sum(g.c[g.interior] * np.abs(fv[g.interior]) ** pe.p))
    return EnergyBreakdown(kin, pot)


def greens_identity_residual(g: FinGraph, f, phi, p) -> float:
    """|⟨Hf, φ⟩ - (½ Σ b⟨∇f⟩∇φ + Σ c⟨f⟩φ + boundary term)|.

    φ must be supported in the interior; f may be any function on the
    host.  The boundary term collects the directed edges from the interior
    to the boundary, weighted by φ on the interior side.
    """
    pe = as_p(p)
    fv = asvalues(f, g.n_vertices)
    pv = asvalues(phi, g.n_vertices)
    if np.any(pv[g.boundary] != 0):
        raise ValueError("test function must be supported in the interior")
    ii = g.interior
    hf = apply_schrodinger(g, fv, pe)
    lhs = float(np.sum(hf[ii] * pv[ii] * g.m[ii]))
    row, col, dat = _pairs(g)
    grad = phi_p(fv[row] - fv[col], pe)
    both_in = ii[row] & ii[col]
    to_bdry = ii[row] & ~ii[col]
    rhs = 0.5 * float(np.sum(dat[both_in] * grad[both_in]
                             * (pv[row[both_in]] - pv[col[both_in]])))
    rhs += float(np.sum(g.c[ii] * phi_p(fv[ii], pe) * pv[ii]))
    rhs += float(np.sum(dat[to_bdry] * grad[to_bdry] * pv[row[to_bdry]]))
    return abs(lhs - rhs)


def simplified_energies(g: FinGraph, u, phi, p,
                        want_h_u2: bool | None = None) -> SimplifiedEnergyValues:
    """Evaluate the product-decomposition energies of h at u.

    u >= 0 on the host, φ supported in the interior.  For 1 < p < 2 the
    exponent p-2 is negative; products with a vanishing front factor are
    defined as zero (the front vanishing forces the base to vanish too).
    Requesting h_u2 for p < 2 raises ValueError.
    """
    pe = as_p(p)
    uv = asvalues(u, g.n_vertices)
    pv = asvalues(phi, g.n_vertices)
    if np.any(uv < 0):
        raise ValueError("u must be nonnegative")
    if np.any(pv[g.boundary] != 0):
        raise ValueError("test function must be supported in the interior")
    if want_h_u2 and pe.p < 2:
        raise ValueError(f"h_u2 is defined for p >= 2 only (p = {pe.p})")
    row, col, dat = _pairs(g)
    du = uv[row] - uv[col]
    dphi = pv[row] - pv[col]
    uu = uv[row] * uv[col]
    avg = 0.5 * (np.abs(pv[row]) + np.abs(pv[col]))

    front = dat * uu * dphi**2
    base = np.sqrt(uu) * np.abs(dphi) + avg * np.abs(du)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(front > 0, front * base ** (pe.p - 2.0), 0.0)
    h_u = 0.5 * float(np.sum(terms))

    h_u1 = 0.5 * float(np.sum(dat * uu ** (pe.p / 2.0) * np.abs(dphi) ** pe.p))
    h_u3 = 0.5 * float(np.sum(dat * avg**pe.p * np.abs(du) ** pe.p))

    h_u2 = None
    if pe.p >= 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            t2 = np.where(dphi != 0,
                          dat * uu * np.abs(du) ** (pe.p - 2.0)
                          * avg ** (pe.p - 2.0) * dphi**2, 0.0)
        h_u2 = 0.5 * float(np.sum(t2))
    return SimplifiedEnergyValues(h_u, h_u1, h_u2, h_u3)


def groundstate_pairing(g: FinGraph, u, phi, p) -> float:
    """Σ_V m u (Hu) |φ|^p, the pairing subtracted in the decomposition."""
    pe = as_p(p)
    uv = asvalues(u, g.n_vertices)
    pv = asvalues(phi, g.n_vertices)
    hu = apply_schrodinger(g, uv, pe)
    ii = g.interior
    return float(np.sum(g.m[ii] * uv[ii] * hu[ii] * np.abs(pv[ii]) ** pe.p))


def picone_gap(g: FinGraph, u, phi, p) -> float:
    """h(uφ) - Σ m u (Hu) |φ|^p; nonnegative for u >= 0 (Picone)."""
    pe = as_p(p)
    uv = asvalues(u, g.n_vertices)
    pv = asvalues(phi, g.n_vertices)
    prod = uv * pv
    prod[g.boundary] = 0.0
    return energy(g, prod, pe).total - groundstate_pairing(g, uv, pv, pe)
