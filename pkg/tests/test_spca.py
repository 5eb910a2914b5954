from __future__ import annotations

import numpy as np
import pytest

from ispca.data import Dataset, encode_labels, standardize
from ispca.iterative import FitConfig
from ispca.projection import SUPERVISED, UNSUPERVISED, transform
from ispca.scoring import feature_pvalues, shared_seed
from ispca.spca import EMPTY_SCREEN, fit_reduction, pca_fit, pspca_fit, screen, spca_fit
from ispca.synthetic import gen_blobs, gen_noise, gen_planted, gen_toy1


def gram_offdiag(Z):
    G = Z.T @ Z
    return np.max(np.abs(G - np.diag(np.diag(G)))) / np.max(np.diag(G))


def test_keep_everything_equals_pca():
    data = gen_planted(25, 12, 3, 1.0, 0)
    a = spca_fit(data, 5, screening_level=1.0)
    b = pca_fit(data, 5)
    assert all(c.kind == SUPERVISED for c in a.components)
    for k in range(5):
        d = min(np.max(np.abs(a.W[:, k] - b.W[:, k])), np.max(np.abs(a.W[:, k] + b.W[:, k])))
        assert d < 1e-8


def test_toy1_screens_out_noise_feature():
    m = spca_fit(gen_toy1(0), 1)
    assert m.config["n_kept"] == 1
    np.testing.assert_allclose(np.abs(m.W[:, 0]), [0.0, 1.0], atol=1e-12)


def test_planted_columns_survive_screening():
    data = gen_planted(20, 50, 5, 3.0, 1)
    X, _ = standardize(data.X)
    res = screen(X, data.target, 0.001, 1000, 7)
    oracle = feature_pvalues(X, data.target, 1000, shared_seed(7, 0))
    np.testing.assert_array_equal(res.pvalues, oracle)
    np.testing.assert_array_equal(res.kept, np.flatnonzero(oracle < 0.001))
    assert set(range(5)) <= set(res.kept.tolist())


def test_screened_rows_of_w_are_zero():
    data = gen_planted(20, 50, 5, 3.0, 1)
    m = spca_fit(data, 3, seed=7)
    X, _ = standardize(data.X)
    kept = screen(X, data.target, 0.001, 1000, 7).kept
    dropped = np.setdiff1d(np.arange(50), kept)
    assert np.all(m.W[dropped] == 0.0)


def test_empty_screen_falls_back_to_pca():
    data = gen_noise(20, 10, 3)
    m = spca_fit(data, 3, n_permutations=200)
    assert EMPTY_SCREEN in m.warnings
    np.testing.assert_array_equal(m.W, pca_fit(data, 3).W)
    p = pspca_fit(data, 3, n_permutations=200)
    assert p.n_supervised == 0
    np.testing.assert_array_equal(p.W, pca_fit(data, 3).W)


def test_pspca_on_toy1():
    m = pspca_fit(gen_toy1(0), 2)
    assert [c.kind for c in m.components] == [SUPERVISED, UNSUPERVISED]
    np.testing.assert_allclose(np.abs(m.W[:, 0]), [0.0, 1.0], atol=1e-12)
    Z = transform(m, gen_toy1(0).X)
    assert gram_offdiag(Z) < 1e-8


def test_pspca_latent_features_orthogonal():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((15, 8))
    y = (X[:, 0] + X[:, 1] + 0.3 * rng.standard_normal(15) > 0).astype(int)
    data = Dataset(X, encode_labels(y.tolist()))
    m = pspca_fit(data, 6, screening_level=0.2, n_permutations=200)
    assert m.n_supervised == 3 and m.K_total == 6
    assert gram_offdiag(transform(m, X)) < 1e-8


def test_multiclass_screening():
    data = gen_blobs(60, 40, 3, 3.0, 2)
    m = spca_fit(data, 2, n_permutations=500)
    assert m.n_supervised == 2
    kept = np.flatnonzero(np.any(m.W != 0, axis=1))
    assert set(kept.tolist()) <= set(range(10))


def test_dispatch():
    data = gen_toy1(1)
    cfg = FitConfig(k_total=2, n_permutations=100)
    for method in ("pca", "spca", "pspca", "ispca", "ispca-naive", "ispca-small"):
        assert fit_reduction(method, data, cfg).method == method
    with pytest.raises(ValueError):
        fit_reduction("lasso", data, cfg)
