import json

import numpy as np
import pytest

from phardy import families, graphs
from phardy.fixtures import tree_profile_model
from phardy.radial import RadialModel


def test_line_truncation_shape():
    g = families.build_line().truncate(3)
    assert sorted(g.interior_indices.tolist()) == [1, 2, 3]
    assert sorted((x, y) for x, y, _ in g.edges()) == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert all(w == 1.0 for _, _, w in g.edges())
    assert graphs.validate(g) == []


def test_line_r1_degree():
    g = families.build_line().truncate(1)
    assert g.interior_indices.tolist() == [1]
    assert g.degrees()[1] == 2.0


def test_line_symmetry_invariant():
    g = families.build_line().truncate(7)
    assert (g.b - g.b.T).nnz == 0
    assert g.b.diagonal().sum() == 0.0


def test_tree_ball_counts():
    g = families.build_tree(2).truncate(2)
    assert g.interior.sum() == 1 + 3 + 6
    deg = g.degrees()
    assert np.all(deg[g.interior] == 3.0)
    g3 = families.build_tree(3).truncate(1)
    radius = g3.meta["radius"]
    assert np.sum(radius == 1) == 4


def test_tree_rejects_bad_branching():
    with pytest.raises(ValueError):
        families.build_tree(1)
    with pytest.raises(ValueError):
        families.build_tree(2.5)


def test_model_matches_tree_radial_operator():
    kp, km, com, sph = tree_profile_model(2)
    fam = families.build_model(kp, km, com, sph)
    tree = families.build_tree(2)
    mf, mt = fam.radial(9), tree.radial(9)
    rng = np.random.default_rng(3)
    f = rng.standard_normal(mf.n_radii)
    for p in (1.5, 2.0, 3.0):
        a = mf.apply_schrodinger(f, p)
        b = mt.apply_schrodinger(f, p)
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


def test_model_flux_mismatch_rejected():
    with pytest.raises(ValueError, match="flux"):
        families.build_model(lambda r: np.ones_like(np.asarray(r, dtype=float)),
                             lambda r: np.ones_like(np.asarray(r, dtype=float)),
                             lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                             lambda r: 2.0 ** np.asarray(r, dtype=float))


def test_model_two_sided_line_profile():
    ones = lambda r: np.ones_like(np.asarray(r, dtype=float))
    zeros = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    fam = families.build_model(ones, ones, zeros, ones)
    g = fam.truncate(5)
    assert graphs.validate(g) == []
    assert np.all(g.c == 0)


def test_star_truncation():
    fam = families.paper_star()
    g = fam.truncate(5)
    # leaves have exactly one neighbour; the root degree is b(0,1)+b(0,2)+...
    deg = g.degrees()
    for k in (1, 2, 3, 4, 5):
        assert g.b[k].nnz == 1
        assert deg[k] == pytest.approx(1.0 / k**2)
    # the aggregated boundary vertex restores the full root degree
    assert deg[0] == pytest.approx(np.pi**2 / 6.0)
    assert graphs.validate(g) == []


def test_star_divergent_row_rejected():
    with pytest.raises(ValueError, match="converge"):
        families.build_star(lambda k: 1.0 / np.asarray(k, dtype=float),
                            lambda k: 1.0 / np.asarray(k, dtype=float) ** 3)


def test_validate_reports():
    import scipy.sparse as sp

    base = families.build_line().truncate(3)
    bad_b = base.b.tolil()
    bad_b[0, 1] = 5.0
    g = graphs.FinGraph(b=bad_b.tocsr(), m=base.m, c=base.c, interior=base.interior)
    assert any("symmetric" in msg for msg in graphs.validate(g))

    m = base.m.copy()
    m[1] = 0.0
    g = graphs.FinGraph(b=base.b, m=m, c=base.c, interior=base.interior)
    assert any("positive" in msg for msg in graphs.validate(g))

    disc = sp.csr_matrix((5, 5))
    disc = graphs.build_graph([(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)],
                              np.ones(5), np.zeros(5), interior=[0, 1, 2, 3])
    assert any("connected" in msg for msg in graphs.validate(disc))


@pytest.mark.parametrize("name,builder,rmax", [
    ("line", families.build_line, 12),
    ("tree", lambda: families.build_tree(2), 12),
    ("star", families.paper_star, 12),
    ("model", lambda: families.build_model(*tree_profile_model(2)), 7),
])
def test_shipped_truncations_validate(name, builder, rmax):
    fam = builder()
    for R in (1, 3, rmax):
        assert graphs.validate(fam.truncate(R)) == [], (name, R)


@pytest.mark.parametrize("builder", [
    families.build_line, lambda: families.build_tree(2), families.paper_star])
def test_truncations_nest(builder):
    fam = builder()
    g1, g2 = fam.truncate(4), fam.truncate(7)
    ii = g1.interior_indices
    assert np.all(g2.interior[ii])
    sub1 = g1.b[np.ix_(ii, ii)]
    sub2 = g2.b[np.ix_(ii, ii)]
    assert abs(sub1 - sub2).max() == 0.0


def test_explicit_json_roundtrip(tmp_path):
    payload = {
        "vertices": ["a", "b", "c", "d"],
        "edges": [["a", "b", 1.0], ["b", "c", 0.5], ["c", "d", 2.0]],
        "m": {"a": 1.0, "b": 2.0, "c": 1.0, "d": 1.0},
        "c": {"b": -0.25},
        "interior": ["a", "b", "c"],
    }
    g = graphs.graph_from_json(json.dumps(payload))
    assert graphs.validate(g) == []
    assert g.m[1] == 2.0 and g.c[1] == -0.25
    assert g.interior.sum() == 3
    fam = families.build_explicit(g)
    t = fam.truncate(1)
    assert t.interior.sum() == 2  # ball of radius 1 around "a"


def test_explicit_rejects_repeated_pairs():
    with pytest.raises(ValueError, match="repeated"):
        graphs.build_graph([(0, 1, 1.0), (1, 0, 2.0)], np.ones(2),
                           np.zeros(2), interior=[0])


def test_gridfn_support():
    g = families.build_line().truncate(4)
    f = graphs.GridFn.indicator(g, 2)
    assert f.support.tolist() == [2]
    z = graphs.GridFn.zeros(g)
    assert z.support.size == 0
