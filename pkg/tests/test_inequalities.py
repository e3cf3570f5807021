import numpy as np
import pytest

from phardy import families, fixtures, hardy, inequalities

P_VALUES = (1.5, 2.0, 3.0)


def _line_setup(p, R=300):
    fam = families.build_line()
    g = fam.truncate(R)
    tab = hardy.optimal_weight(fam, p, R)
    w = np.zeros(g.n_vertices)
    w[tab.sites] = tab.wm
    sites = np.arange(g.n_vertices, dtype=float)
    return g, w, sites


def _tree_setup(p, R=6):
    fam = families.build_tree(2)
    g = fam.truncate(R)
    tab = hardy.optimal_weight(fam, p, R)
    radius = g.meta["radius"]
    lookup = np.zeros(R + 2)
    lookup[tab.sites] = tab.wm
    w = np.where(g.interior, lookup[np.minimum(radius, R + 1)], 0.0)
    return g, w, None


def _random_phis(g, rng, count):
    inner = g.interior_indices
    reach = np.asarray(g.b[inner][:, np.flatnonzero(g.boundary)].sum(axis=1)).ravel()
    inner = inner[reach == 0]
    for _ in range(count):
        phi = np.zeros(g.n_vertices)
        size = int(rng.integers(1, min(10, len(inner)) + 1))
        chosen = rng.choice(inner, size=size, replace=False)
        phi[chosen] = rng.standard_normal(size)
        yield phi


@pytest.mark.parametrize("p", P_VALUES)
def test_hpw_chain_line(p):
    g, w, sites = _line_setup(p)
    rng = np.random.default_rng(42)
    for phi in _random_phis(g, rng, 150):
        rep = inequalities.hpw_check(g, w, phi, p, moment_sites=sites)
        assert rep.failing(1e-10) == []
        names = [n for n, *_ in rep.links]
        assert names == ["hoelder-split", "hardy", "end-to-end", "power-moment"]


@pytest.mark.parametrize("p", P_VALUES)
def test_rellich_chain_line(p):
    g, w, sites = _line_setup(p)
    rng = np.random.default_rng(43)
    for phi in _random_phis(g, rng, 150):
        rep = inequalities.rellich_check(g, w, phi, p, moment_sites=sites)
        assert rep.failing(1e-10) == []
        assert [n for n, *_ in rep.links][0] == "classical-below"


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_chains_tree(p):
    g, w, _ = _tree_setup(p)
    rng = np.random.default_rng(44)
    for phi in _random_phis(g, rng, 60):
        assert inequalities.hpw_check(g, w, phi, p).failing(1e-10) == []
        assert inequalities.rellich_check(g, w, phi, p).failing(1e-10) == []


def test_zero_phi_all_zero():
    g, w, sites = _line_setup(2.0, R=50)
    rep = inequalities.hpw_check(g, w, np.zeros(g.n_vertices), 2.0,
                                 moment_sites=sites)
    assert rep.lhs == 0.0 and rep.rhs == 0.0


def test_homogeneity_degree_bookkeeping():
    g, w, sites = _line_setup(2.0, R=120)
    rng = np.random.default_rng(45)
    phi = next(iter(_random_phis(g, rng, 1)))
    p = 2.0
    base = inequalities.hpw_check(g, w, phi, p, moment_sites=sites)
    scaled = inequalities.hpw_check(g, w, 3.0 * phi, p, moment_sites=sites)
    assert scaled.lhs == pytest.approx(3.0**p * base.lhs, rel=1e-12)
    assert scaled.rhs == pytest.approx(3.0**p * base.rhs, rel=1e-12)
    for (n1, l1, r1, s1), (n2, l2, r2, s2) in zip(base.links, scaled.links):
        assert n1 == n2
        assert np.sign(s1) == np.sign(s2) or abs(s2) < 1e-12 * (abs(l2) + abs(r2))
        assert l2 == pytest.approx(3.0**p * l1, rel=1e-12)


def test_support_violation_rejected():
    g, w, _ = _line_setup(2.0, R=50)
    w[10] = 0.0  # puncture the weight
    phi = np.zeros(g.n_vertices)
    phi[10] = 1.0
    with pytest.raises(ValueError, match="supported"):
        inequalities.hpw_check(g, w, phi, 2.0)


def test_rellich_requires_positive_weight_on_interior():
    g, w, _ = _line_setup(2.0, R=50)
    w[20] = 0.0
    phi = np.zeros(g.n_vertices)
    phi[5] = 1.0
    with pytest.raises(ValueError, match="Rellich"):
        inequalities.rellich_check(g, w, phi, 2.0)


def test_failing_link_names_itself():
    # a deliberately inflated "Hardy weight" must fail exactly at the
    # hardy link once the test function spreads like the ground state
    g, w, sites = _line_setup(2.0, R=300)
    x = np.arange(g.n_vertices, dtype=float)
    phi = np.sqrt(x) * np.vectorize(
        lambda t: hardy.cutoff_psi(4, t) if t > 0 else 0.0)(np.sqrt(x))
    phi[~g.interior] = 0.0
    rep = inequalities.hpw_check(g, 25.0 * w, phi, 2.0)
    assert "hardy" in rep.failing(1e-10)
    ok = inequalities.hpw_check(g, w, phi, 2.0)
    assert ok.failing(1e-10) == []
