from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ispca.errors import InvalidInputError
from ispca.logistic import fit_logistic, n_params, penalized_gradient, penalized_nll


def central_difference(f, theta, h=1e-6):
    g = np.empty_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


def instance(seed, C):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((15, 3))
    y = np.arange(15) % C
    theta = 0.5 * rng.standard_normal(n_params(3, C))
    return Z, y, theta


@pytest.mark.parametrize("C", [2, 3, 4])
@pytest.mark.parametrize("seed", range(3))
def test_gradient_matches_finite_differences(seed, C):
    Z, y, theta = instance(seed, C)
    g = penalized_gradient(theta, Z, y, 0.7, C)
    fd = central_difference(lambda t: penalized_nll(t, Z, y, 0.7, C), theta)
    np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("C", [2, 3])
def test_optimum_has_tiny_gradient(C):
    Z, y, _ = instance(9, C)
    m = fit_logistic(Z, y, 0.5, C)
    theta = (np.concatenate([[m.intercept], m.coef]) if C == 2
             else np.concatenate([m.coef.ravel(), m.intercept[:-1]]))
    assert np.linalg.norm(penalized_gradient(theta, Z, y, 0.5, C)) < 1e-8
    assert m.grad_norm < 1e-8


def test_heavy_penalty_predicts_class_frequencies():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((40, 2))
    y = np.array([0] * 30 + [1] * 10)
    m = fit_logistic(Z, y, 1e8)
    assert np.max(np.abs(m.coef)) < 1e-6
    np.testing.assert_allclose(m.predict_proba(Z)[:, 1], 0.25, atol=1e-5)
    y3 = np.array([0] * 20 + [1] * 12 + [2] * 8)
    m3 = fit_logistic(Z, y3, 1e8)
    np.testing.assert_allclose(m3.predict_proba(Z[:1])[0], [0.5, 0.3, 0.2], atol=1e-5)


def test_separable_one_dimensional_is_monotone():
    z = np.linspace(-2, 2, 20)[:, None]
    m = fit_logistic(z, (z[:, 0] > 0).astype(int), 0.1)
    p = m.predict_proba(np.linspace(-3, 3, 50)[:, None])[:, 1]
    assert np.all(np.diff(p) > 0)


def test_intercept_only_model():
    m = fit_logistic(np.zeros((6, 0)), np.array([0, 1, 1, 1, 0, 1]), 1.0)
    assert m.predict_proba(np.zeros((1, 0)))[0, 1] == pytest.approx(4 / 6)


def test_invalid_inputs():
    with pytest.raises(InvalidInputError):
        fit_logistic(np.ones((3, 1)), [0, 1, 0], 0.0)
    with pytest.raises(InvalidInputError):
        fit_logistic(np.array([[np.nan], [1.0]]), [0, 1], 1.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]), st.floats(0.01, 10.0))
def test_doubling_penalty_never_improves_fit(seed, C, l2):
    Z, y, _ = instance(seed, C)
    a = fit_logistic(Z, y, l2, C)
    b = fit_logistic(Z, y, 2 * l2, C)

    def theta(m):
        return (np.concatenate([[m.intercept], m.coef]) if C == 2
                else np.concatenate([m.coef.ravel(), m.intercept[:-1]]))

    # optimum under 2*l2 is no better than the l2 optimum evaluated under 2*l2 ...
    assert penalized_nll(theta(b), Z, y, 2 * l2, C) <= penalized_nll(theta(a), Z, y, 2 * l2, C) + 1e-9
    # ... and the doubled-penalty objective never drops below the original one
    assert penalized_nll(theta(b), Z, y, 2 * l2, C) >= penalized_nll(theta(a), Z, y, l2, C) - 1e-9
