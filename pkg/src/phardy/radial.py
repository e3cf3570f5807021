"""Spherically symmetric (model) hosts reduced to their radial profiles.

All shipped infinite families except the star are model graphs: the edge
weights, measure and potential depend only on the distance to the root.
Radial functions then see a one-dimensional operator

    Lf(r) = k+(r) <f(r)-f(r+1)> + k-(r) <f(r)-f(r-1)>,

and energies collapse to sums over radii weighted by sphere masses.  This
is what makes the tree diagnostics tractable: a ball of radius 40 in T_3
has ~3e12 vertices but only 41 radii.

Index convention: arrays run over radii 0..R where radius R is the
Dirichlet boundary sphere (functions vanish there); the root is interior
unless ``root_dirichlet`` is set (the half line pins vertex 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import as_p, phi_p


@dataclass(frozen=True)
class RadialModel:
    kplus: np.ndarray        # per-vertex outward curvature, radius 0..R
    kminus: np.ndarray       # per-vertex inward curvature, kminus[0] = 0
    com: np.ndarray          # potential / measure profile c(x)/m(x)
    mvert: np.ndarray        # per-vertex measure
    nsphere: np.ndarray      # sphere cardinalities |S_r| (float64)
    root_dirichlet: bool = False

    @property
    def n_radii(self) -> int:
        return len(self.kplus)

    @property
    def boundary_radius(self) -> int:
        return self.n_radii - 1

    @property
    def interior(self) -> slice:
        return slice(1 if self.root_dirichlet else 0, self.boundary_radius)

    def sphere_mass(self) -> np.ndarray:
        return self.nsphere * self.mvert

    def edge_mass(self) -> np.ndarray:
        """Total weight of the edges S_r -> S_{r+1}, r = 0..R-1."""
        M = self.sphere_mass()
        return M[:-1] * self.kplus[:-1]

    def check_flux(self, rtol: float = 1e-9) -> None:
        """Outward and inward curvatures must move the same edge mass."""
        M = self.sphere_mass()
        out = M[:-1] * self.kplus[:-1]
        inc = M[1:] * self.kminus[1:]
        bad = ~np.isclose(out, inc, rtol=rtol)
        if bad.any():
            r = int(np.flatnonzero(bad)[0])
            raise ValueError(
                f"inconsistent flux at radius {r}: k+*mass(S_{r})={out[r]:g} "
                f"vs k-*mass(S_{r+1})={inc[r]:g}")

    # -- operators on radial functions ------------------------------------

    def apply_schrodinger(self, f: np.ndarray, p) -> np.ndarray:
        """(Hf)(r) on interior radii; f is given on radii 0..R."""
        pe = as_p(p)
        f = np.asarray(f, dtype=float)
        r0 = self.interior.start
        rr = np.arange(r0, self.boundary_radius)
        inward = phi_p(f[rr] - f[rr - 1], pe)
        if r0 == 0:
            inward[0] = 0.0  # the root has no inward neighbour (kminus[0]=0)
        return (self.kplus[rr] * phi_p(f[rr] - f[rr + 1], pe)
                + self.kminus[rr] * inward
                + self.com[rr] * phi_p(f[rr], pe))

    def energy(self, f: np.ndarray, p) -> tuple[float, float]:
        """(kinetic, potential) of a radial function vanishing at radius R."""
        pe = as_p(p)
        f = np.asarray(f, dtype=float)
        if abs(f[self.boundary_radius]) > 0:
            raise ValueError("test function does not vanish on the boundary sphere")
        if self.root_dirichlet and abs(f[0]) > 0:
            raise ValueError("test function does not vanish at the pinned root")
        B = self.edge_mass()
        kin = float(np.sum(B * np.abs(np.diff(f)) ** pe.p))
        ii = self.interior
        M = self.sphere_mass()
        pot = float(np.sum(self.com[ii] * M[ii] * np.abs(f[ii]) ** pe.p))
        return kin, pot

    def weight_from(self, u: np.ndarray, p) -> tuple[np.ndarray, np.ndarray]:
        """Hardy weight w = H(u^(1/q)) / <u^(1/q)> on interior radii.

        Returns (w, v) with v = u^(1/q) on radii 0..R.  u must be positive
        on the interior (the pinned root of the half line may carry 0).
        """
        pe = as_p(p)
        u = np.asarray(u, dtype=float)
        ii = self.interior
        if np.any(u[ii] <= 0):
            r = int(np.flatnonzero(u[ii] <= 0)[0]) + ii.start
            raise ZeroDivisionError(f"reference function vanishes at interior radius {r}")
        v = u ** (1.0 / pe.q)
        hv = self.apply_schrodinger(v, pe)
        return hv / phi_p(v[ii], pe), v


def tree_model(d: int, R: int, com=None) -> RadialModel:
    """Radial profile of the homogeneous tree with d+1 neighbours per vertex."""
    kplus = np.full(R + 1, float(d))
    kplus[0] = d + 1.0
    kminus = np.ones(R + 1)
    kminus[0] = 0.0
    nsphere = np.empty(R + 1)
    nsphere[0] = 1.0
    nsphere[1:] = (d + 1.0) * d ** np.arange(0.0, R)
    comv = np.zeros(R + 1) if com is None else np.asarray(com(np.arange(R + 1)), dtype=float)
    return RadialModel(kplus=kplus, kminus=kminus, com=comv,
                       mvert=np.ones(R + 1), nsphere=nsphere)


def line_model(R: int, com=None) -> RadialModel:
    """Radial profile of the half line with unit weights, root pinned."""
    ones = np.ones(R + 1)
    kplus = ones.copy()
    kminus = ones.copy()
    kminus[0] = 0.0
    comv = np.zeros(R + 1) if com is None else np.asarray(com(np.arange(R + 1)), dtype=float)
    comv[0] = 0.0
    return RadialModel(kplus=kplus, kminus=kminus, com=comv,
                       mvert=ones.copy(), nsphere=ones.copy(),
                       root_dirichlet=True)


def free_greens_series(model_boundary_edge_mass, m_root: float, p, R: int,
                       k_extra: int = 400, rtol: float = 1e-13):
    """Green's function of the free radial operator from the ball-boundary
    edge masses: G(r) = sum_{k>=r} (m(root)/edge_mass(k))^(1/(p-1)).

    ``model_boundary_edge_mass`` maps a radius array to the total edge
    weight leaving the ball of that radius.  The tail beyond R+k_extra is
    estimated from the last term ratio; a non-geometric, non-summable tail
    raises ValueError (the family is not subcritical at this resolution).
    """
    pe = as_p(p)
    kk = np.arange(R + 1 + k_extra)
    with np.errstate(over="ignore", under="ignore"):
        terms = (m_root / np.asarray(model_boundary_edge_mass(kk),
                                     dtype=float)) ** (1.0 / (pe.p - 1.0))
    # geometric profiles underflow quickly; judge convergence on the last
    # two terms that are still resolved
    live = np.flatnonzero(terms > 1e-280 * max(terms[0], 1e-280))
    if len(live) < 3:
        raise ValueError("Green series terms degenerate; bad profile")
    last = live[-1]
    ratio = terms[last] / terms[last - 1]
    if not np.isfinite(ratio) or ratio >= 1.0 - 1e-6:
        raise ValueError("Green series does not converge (ratio %.6f); "
                         "no subcritical free operator" % ratio)
    tail = terms[last] * ratio / (1.0 - ratio) if last == len(terms) - 1 else 0.0
    if tail > rtol * terms[0]:
        raise ValueError("Green series tail not resolved; increase k_extra")
    terms[last + 1:] = 0.0
    rev = np.cumsum(terms[::-1])[::-1]
    return rev[: R + 1] + tail


def radial_lambda0_p2(model: RadialModel) -> float:
    """Bottom Dirichlet eigenvalue of the p=2 radial operator.

    Exact for spherically symmetric hosts: the ground state of a root-
    centred ball is radial, so this equals the full ball eigenvalue.
    """
    ii = model.interior
    r0, r1 = ii.start, ii.stop
    M = model.sphere_mass()[r0:r1]
    B = model.edge_mass()
    diag = (model.kplus + model.kminus + model.com)[r0:r1].copy()
    n = r1 - r0
    mat = np.zeros((n, n))
    np.fill_diagonal(mat, diag)
    for j in range(n - 1):
        r = r0 + j
        off = -B[r] / np.sqrt(M[j] * M[j + 1])
        mat[j, j + 1] = off
        mat[j + 1, j] = off
    return float(np.linalg.eigvalsh(mat)[0])
