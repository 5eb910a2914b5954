from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ispca.data import Dataset, Target, encode_labels, regression_target, standardize
from ispca.errors import InvalidInputError, NoSignalError
from ispca.iterative import FitConfig, best_supervised_direction, gamma_grid, ispca_fit
from ispca.pca import fix_sign
from ispca.projection import SUPERVISED, UNSUPERVISED, transform
from ispca.scoring import score, scores
from ispca.spca import pca_fit
from ispca.synthetic import gen_blobs, gen_noise, gen_planted, gen_toy1, gen_toy2

FAST = dict(n_permutations=200)


def survivors(s, g):
    return int(np.sum(np.asarray(s) > g))


def test_grid_single_feature():
    g = gamma_grid([0.6], 10, 500)
    assert len(g) == 1 and g[0] < 0.6 and g[0] == pytest.approx(0.6, rel=1e-11)


def test_grid_three_scores():
    s = [0.9, 0.5, 0.1]
    g = gamma_grid(s, 2, 3)
    assert len(g) == 2
    assert g[0] == pytest.approx(0.5) and g[1] == pytest.approx(0.1, rel=1e-11)
    assert survivors(s, g[0]) == 1 and survivors(s, g[-1]) == 3


def test_grid_tied_top_keeps_both():
    s = [0.7, 0.7, 0.2]
    g = gamma_grid(s, 5, 500)
    assert g[0] == pytest.approx(0.2) and survivors(s, g[0]) == 2


def test_grid_window_limits_bottom_end():
    s = np.linspace(0.05, 0.95, 19)
    g = gamma_grid(s, 10, 5)
    assert survivors(s, g[-1]) == 5 and survivors(s, g[0]) == 1
    assert np.all(np.diff(g) < 0) and len(g) == 10


def test_grid_all_zero():
    with pytest.raises(NoSignalError):
        gamma_grid([0.0, 0.0], 10, 500)


@settings(max_examples=60)
@given(
    st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40).filter(lambda s: max(s) > 1e-6),
    st.integers(2, 12),
    st.integers(1, 50),
)
def test_grid_endpoint_properties(s, M, window):
    g = gamma_grid(s, M, window)
    pos = sum(v > 0 for v in s)
    assert 1 <= len(g) <= M
    assert np.all(np.diff(g) < 0)
    kth = sorted(s, reverse=True)[min(window, pos) - 1]
    # ties with the window-th score survive together
    assert survivors(s, g[-1]) == sum(v >= kth for v in s)
    assert survivors(s, g[0]) == sum(v == max(s) for v in s)


def test_single_feature_direction():
    x = np.array([-1.0, 0.0, 2.0, -1.0])
    comp, z = best_supervised_direction(x[:, None], np.array([0.0, 0.0, 1.0, 1.0]), FitConfig())
    assert comp.v.tolist() == [1.0]
    np.testing.assert_array_equal(z, x)


def exhaustive_best(X, y, window):
    """Every distinct survivor set (top-m features, m = 1..window); ties go to fewer features."""
    s = scores(X, y)
    order = np.argsort(-s, kind="stable")
    best = None
    for m in range(1, min(window, int(np.sum(s > 0))) + 1):
        keep = order[:m]
        vals, vecs = np.linalg.eigh(X[:, keep].T @ X[:, keep])
        v = np.zeros(X.shape[1])
        v[keep] = fix_sign(vecs[:, -1])
        sc = score(X @ v, y)
        if best is None or sc > best[0] + 1e-12:
            best = (sc, v, m)
    return best


@pytest.mark.parametrize("seed", range(6))
def test_argmax_matches_exhaustive_threshold_oracle(seed):
    data = gen_planted(10, 6, 2, 1.5, seed)
    X, _ = standardize(data.X)
    y = data.target.values.astype(float)
    s = scores(X, y)
    assert len(np.unique(s)) == 6
    cfg = FitConfig(grid_size=2000, window=6)
    sizes = {survivors(s, g) for g in gamma_grid(s, cfg.grid_size, cfg.window)}
    assert sizes == set(range(1, 7))  # the fine grid visits every survivor set
    comp, z = best_supervised_direction(X, y, cfg)
    sc, v, m = exhaustive_best(X, y, 6)
    assert comp.score == pytest.approx(sc, abs=1e-10)
    assert comp.n_features == m
    np.testing.assert_allclose(comp.v, v, atol=1e-8)
    np.testing.assert_allclose(z, X @ comp.v)


def test_coarse_grid_score_is_grid_maximum():
    data = gen_planted(30, 40, 5, 1.0, 2)
    X, _ = standardize(data.X)
    y = data.target.values.astype(float)
    cfg = FitConfig()
    comp, _ = best_supervised_direction(X, y, cfg)
    s = scores(X, y)
    for g in gamma_grid(s, cfg.grid_size, cfg.window):
        keep = s > g
        vals, vecs = np.linalg.eigh(X[:, keep].T @ X[:, keep])
        assert comp.score >= score(X[:, keep] @ vecs[:, -1], y) - 1e-9


def test_toy1_single_supervised_component():
    m = ispca_fit(gen_toy1(0), FitConfig(k_total=2))
    assert m.n_supervised == 1
    assert [c.kind for c in m.components] == [SUPERVISED, UNSUPERVISED]
    np.testing.assert_allclose(np.abs(m.W[:, 0]), [0.0, 1.0], atol=1e-12)


def test_toy2_two_supervised_components():
    m = ispca_fit(gen_toy2(0), FitConfig())
    assert m.n_supervised == 2 and m.K_total == 2
    w2 = m.W[:, 1]
    assert w2[0] * w2[1] < 0


def test_noise_gives_plain_pca():
    data = gen_noise(30, 40, 1)
    m = ispca_fit(data, FitConfig(k_total=5, **FAST))
    assert m.n_supervised == 0
    np.testing.assert_allclose(m.W, pca_fit(data, 5).W, atol=1e-12)


def test_gate_soundness_and_variants():
    data = gen_planted(40, 60, 5, 1.2, 4)
    full = ispca_fit(data, FitConfig(k_total=6, **FAST))
    small = ispca_fit(data, FitConfig(k_total=6, variant="small", **FAST))
    naive = ispca_fit(data, FitConfig(k_total=6, variant="naive", **FAST))
    assert full.n_supervised >= 1
    assert all(c.pvalue < 0.01 for c in full.components if c.kind == SUPERVISED)
    assert small.K_total == small.n_supervised == full.n_supervised
    np.testing.assert_array_equal(small.W, full.W[:, : small.K_total])
    assert naive.n_supervised == naive.K_total == 6
    assert all(c.pvalue is None for c in naive.components)
    assert (full.method, small.method, naive.method) == ("ispca", "ispca-small", "ispca-naive")


def test_zero_padding_and_decomposition():
    data = gen_planted(30, 50, 5, 1.5, 5)
    m = ispca_fit(data, FitConfig(k_total=8, **FAST))
    X, _ = standardize(data.X)
    Xk = X.copy()
    for comp, rec in zip(m.components, m.records):
        if comp.kind == SUPERVISED:
            assert np.count_nonzero(comp.v) <= comp.n_features
            assert np.all(scores(Xk, data.target)[comp.v != 0] > comp.gamma)
        z = Xk @ comp.v
        np.testing.assert_allclose(X @ comp.w, z, atol=1e-8 * np.linalg.norm(z))
        Xk = Xk - np.outer(z, rec.b)


def test_multiclass_records_source_class_and_stays_orthogonal():
    data = gen_blobs(80, 60, 4, 3.0, 0)
    m = ispca_fit(data, FitConfig(k_total=5, **FAST))
    sup = [c for c in m.components if c.kind == SUPERVISED]
    assert sup and all(c.source_class in (1, 2, 3, 4) for c in sup)
    Z = transform(m, data.X)
    G = Z.T @ Z
    assert np.max(np.abs(G - np.diag(np.diag(G)))) < 1e-8 * np.max(np.diag(G))


def test_regression_target():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((40, 20))
    y = X[:, :3].sum(axis=1) + 0.3 * rng.standard_normal(40)
    m = ispca_fit(Dataset(X, regression_target(y)), FitConfig(k_total=3, **FAST))
    assert m.n_supervised >= 1 and m.target_kind == "regression"


def test_determinism():
    data = gen_planted(30, 40, 4, 1.5, 8)
    a = ispca_fit(data, FitConfig(k_total=4, seed=9, **FAST))
    b = ispca_fit(data, FitConfig(k_total=4, seed=9, **FAST))
    assert a.W.tobytes() == b.W.tobytes() and a.z_scales.tobytes() == b.z_scales.tobytes()
    assert [c.metadata() for c in a.components] == [c.metadata() for c in b.components]


def test_invalid_configs_and_targets():
    for kw in (dict(alpha=0.0), dict(alpha=1.0), dict(grid_size=1), dict(window=0),
               dict(k_total=0), dict(variant="greedy"), dict(n_permutations=0)):
        with pytest.raises(InvalidInputError):
            FitConfig(**kw)
    with pytest.raises(InvalidInputError):
        ispca_fit(Dataset(np.ones((4, 2)), regression_target(np.ones(4))), FitConfig())


def test_default_k_total():
    assert FitConfig().resolved_k_total(encode_labels([0, 1])) == 50
    assert FitConfig().resolved_k_total(encode_labels([0, 1, 2])) == 20
    assert FitConfig(k_total=7).resolved_k_total(Target("binary", np.array([0, 1]))) == 7
