"""Synthetic datasets: the two toy geometries, pure noise, blobs and planted signal.

Toy constants (n = 200, balanced labels, class sign ``s = 2y - 1``):

``toy1``
    ``x2 = s + e2`` and ``x1 = 3 e1``: only ``x2`` separates the classes and
    ``x1`` is independent high-variance noise.
``toy2``
    ``x2 = s + u`` and ``x1 = u + 0.5 e1`` with shared nuisance ``u``.  ``x1``
    carries no class information on its own (population correlation zero) but
    jointly they separate far better than ``x2``: the Bayes accuracy is
    Phi(sqrt(5)) ~ 0.987 (``x2 - x1 = s - 0.5 e1`` alone reaches Phi(2))
    versus Phi(1) ~ 0.841 for ``x2``.  corr(x1, x2) = 1/sqrt(2.5) ~ 0.63,
    so the second supervised direction in standardized units is roughly
    (1, -0.63), i.e. (1.6, -1) up to scale.

All ``e`` and ``u`` are independent standard normals.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, Target

TOY_N = 200
TOY_SHIFT = 1.0
TOY1_NOISE_SD = 3.0
TOY2_X1_NOISE_SD = 0.5


def _balanced_labels(rng, n: int, n_classes: int) -> np.ndarray:
    base = np.arange(n) % n_classes
    return rng.permutation(base)


def _binary(codes) -> Target:
    return Target("binary", codes, ("0", "1"))


def gen_toy1(seed: int, n: int = TOY_N) -> Dataset:
    rng = np.random.default_rng(seed)
    y = _balanced_labels(rng, n, 2)
    x2 = TOY_SHIFT * (2 * y - 1) + rng.standard_normal(n)
    x1 = TOY1_NOISE_SD * rng.standard_normal(n)
    return Dataset(np.column_stack([x1, x2]), _binary(y), ("x1", "x2"))


def gen_toy2(seed: int, n: int = TOY_N) -> Dataset:
    rng = np.random.default_rng(seed)
    y = _balanced_labels(rng, n, 2)
    u = rng.standard_normal(n)
    x2 = TOY_SHIFT * (2 * y - 1) + u
    x1 = u + TOY2_X1_NOISE_SD * rng.standard_normal(n)
    return Dataset(np.column_stack([x1, x2]), _binary(y), ("x1", "x2"))


def gen_noise(n: int, D: int, seed: int, n_classes: int = 2) -> Dataset:
    """Standard normal features with balanced labels drawn independently of them."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, D))
    y = _balanced_labels(rng, n, n_classes)
    if n_classes == 2:
        return Dataset(X, _binary(y))
    return Dataset(X, Target("multiclass", y + 1, tuple(str(c) for c in range(1, n_classes + 1))))


def blob_means(C: int, separation: float, n_signal: int, rng) -> np.ndarray:
    """C class means in the signal subspace, pairwise distance separation*sqrt(n_signal)."""
    if C > n_signal:
        raise ValueError("need at least as many signal dimensions as classes")
    basis, _ = np.linalg.qr(rng.standard_normal((n_signal, C)))
    return (separation * np.sqrt(n_signal / 2.0)) * basis.T


def gen_blobs(
    n: int, D: int, C: int, separation: float, seed: int, n_signal: int = 10
) -> Dataset:
    """Gaussian classes whose means differ only in the first ``n_signal`` features."""
    rng = np.random.default_rng(seed)
    means = blob_means(C, separation, n_signal, rng)
    y = _balanced_labels(rng, n, C)
    X = rng.standard_normal((n, D))
    X[:, :n_signal] += means[y]
    if C == 2:
        return Dataset(X, _binary(y))
    return Dataset(X, Target("multiclass", y + 1, tuple(str(c) for c in range(1, C + 1))))


def gen_planted(n: int, D: int, n_signal: int, effect: float, seed: int) -> Dataset:
    """Binary classes shifted by +-effect/2 in the first ``n_signal`` features."""
    rng = np.random.default_rng(seed)
    y = _balanced_labels(rng, n, 2)
    X = rng.standard_normal((n, D))
    X[:, :n_signal] += (effect / 2.0) * (2 * y - 1)[:, None]
    return Dataset(X, _binary(y))

