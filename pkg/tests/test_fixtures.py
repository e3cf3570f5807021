import math

import numpy as np
import pytest

from phardy import fixtures, hardy, kernels, numerics, variational
from phardy.exponents import as_p

P_VALUES = (1.5, 2.0, 3.0)


@pytest.mark.parametrize("p", P_VALUES)
def test_line_fixture_formula_vs_engine(p):
    fx = fixtures.fixture_line(p)
    tab = hardy.optimal_weight(fx.family, p, 20000)
    expected = fx.expected_weight(tab.sites)
    assert np.max(np.abs(tab.w / expected - 1.0)) <= 1e-12


def test_line_fixture_values_and_asymptotics():
    fx = fixtures.fixture_line(2.0)
    w = fx.expected_weight(np.array([1]))
    assert w[0] == pytest.approx(2.0 - math.sqrt(2.0), rel=1e-14)
    n = np.geomspace(10, 10**6, 40).astype(int).astype(float)
    wn = fx.expected_weight(n)
    # classical constant recovered in the far field
    assert wn[-1] * n[-1] ** 2 == pytest.approx(0.25, rel=1e-5)
    assert np.all(fx.expected_weight(np.arange(1, 10**6 + 1)) > 0)


@pytest.mark.parametrize("p", P_VALUES)
@pytest.mark.parametrize("d", [2, 3])
def test_tree_fixture_values(d, p):
    fx = fixtures.fixture_tree(d, p)
    tab = hardy.optimal_weight(fx.family, p, 12)
    expected = fx.expected_weight(tab.sites)
    assert np.max(np.abs(tab.w / expected - 1.0)) <= 1e-12


def test_tree_fixture_p2_closed_values():
    fx = fixtures.fixture_tree(2, 2.0)
    assert fx.expected_weight(np.array([0]))[0] == pytest.approx(
        3 * (1 - 2.0**-0.5), rel=1e-15)
    assert fx.expected_weight(np.array([5]))[0] == pytest.approx(
        3 - 2 * math.sqrt(2.0), rel=1e-15)


def test_model_fixture_reproduces_tree():
    prof = fixtures.tree_profile_model(2)
    for p in P_VALUES:
        fxm = fixtures.fixture_model(*prof, p)
        fxt = fixtures.fixture_tree(2, p)
        sites = np.arange(0, 11)
        a = fxm.expected_weight(sites)
        b = fxt.expected_weight(sites)
        assert np.max(np.abs(a / b - 1.0)) <= 1e-12
        tab = hardy.optimal_weight(fxm.family, p, 10)
        assert np.max(np.abs(tab.w / b - 1.0)) <= 1e-12


def test_model_fixture_doubling_spheres():
    # k+ = 1, k- = 1/2 (forced by flux), |S_r| = 2^r: G(r) = 2^(1-r) at p=2
    ones = lambda r: np.ones_like(np.asarray(r, dtype=float))
    half = lambda r: np.where(np.asarray(r) == 0, 0.0, 0.5)
    zeros = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    sph = lambda r: 2.0 ** np.asarray(r, dtype=float)
    fx = fixtures.fixture_model(ones, half, zeros, sph, 2.0)
    G = fx.reference(8)
    assert np.allclose(G, 2.0 ** (1.0 - np.arange(9, dtype=float)), rtol=1e-12)
    # solver cross-check
    vals, _ = variational.greens_function(fx.family, 2.0, 40)
    assert np.max(np.abs(vals[:6] / G[:6] - 1.0)) <= 1e-6


def test_model_fixture_divergent_series_diagnostic():
    ones = lambda r: np.ones_like(np.asarray(r, dtype=float))
    zeros = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    fx = fixtures.fixture_model(ones, ones, zeros, ones, 2.0)
    with pytest.raises(ValueError, match="converge"):
        fx.reference(10)


@pytest.mark.parametrize("p", P_VALUES)
def test_star_fixture(p):
    fx = fixtures.fixture_star(p)
    tab = hardy.optimal_weight(fx.family, p, 500)
    leaf = tab.sites >= 1
    expected = fx.expected_weight(tab.sites)
    assert np.max(np.abs(tab.w[leaf] / expected[leaf] - 1.0)) <= 1e-12
    assert np.all(tab.w[leaf] > 0)


def test_star_fixture_partial_sums_converge():
    fx = fixtures.fixture_star(2.0)
    pairs, fit = hardy.null_criticality_sums(
        fx.family, 2.0, np.unique(np.geomspace(10, 10**6, 10).astype(int)))
    assert fit["converged"]
    assert fx.expected_growth["law"] == "convergent"
    # tail below 1e-4 at R = 1e6
    assert pairs[-1][1] - pairs[-3][1] < 1e-4


def test_fixture_growth_laws():
    assert fixtures.fixture_line(2.0).expected_growth == {
        "law": "log", "slope": 0.25}
    fx = fixtures.fixture_tree(2, 2.0)
    assert fx.expected_growth["law"] == "linear"
    assert fx.expected_growth["slope"] == pytest.approx(3 - 2 * math.sqrt(2))


def test_get_fixture_names(tmp_path):
    assert fixtures.get_fixture("line", 2.0).name == "line"
    assert fixtures.get_fixture("tree:3", 2.0).name == "tree:3"
    assert fixtures.get_fixture("star", 2.0).name == "star"
    import json

    prof = {"k_plus": [3, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2],
            "k_minus": [0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
            "c_over_m": [0] * 14,
            "sphere_size": [1, 3, 6, 12, 24, 48, 96, 192, 384, 768,
                            1536, 3072, 6144, 12288]}
    path = tmp_path / "prof.json"
    path.write_text(json.dumps(prof))
    fx = fixtures.get_fixture(f"model:{path}", 2.0)
    tab = hardy.optimal_weight(fx.family, 2.0, 8)
    tree = fixtures.fixture_tree(2, 2.0).expected_weight(tab.sites)
    assert np.max(np.abs(tab.w / tree - 1.0)) <= 1e-12
    with pytest.raises(ValueError):
        fixtures.get_fixture("nope", 2.0)
