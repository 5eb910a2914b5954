"""Univariate relevance scores and permutation p-values.

The score of a feature against a target is the absolute Pearson correlation.
Multiclass targets are scored against each one-vs-rest indicator and the
maximum over classes is taken.

Permutations come from independent substreams: permutation ``r`` under seed
``s`` is ``numpy.random.default_rng([*s, r]).permutation(n)``, i.e. a
Fisher-Yates shuffle driven by PCG64 seeded through ``SeedSequence``.  The
result therefore does not depend on evaluation order or chunking.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import SD_EPS, Target, target_rows
from .errors import InvalidInputError

# Relative slack when comparing a permuted statistic against the observed one.
# Permuted and observed scores go through different BLAS paths; an exact
# replicate of the observed target must still count as ">=", and a score
# that is zero up to rounding must tie with exact zeros.
TIE_RTOL = 1e-12
TIE_ATOL = 1e-12

_CHUNK_ELEMENTS = 4_000_000


def _seed_key(seed) -> tuple[int, ...]:
    if seed is None:
        raise InvalidInputError("a seed is required for reproducible permutations")
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def _unit_columns(X: np.ndarray) -> np.ndarray:
    """Center each column and scale it to unit Euclidean norm.

    Columns with sample sd <= SD_EPS come back as exact zeros.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", Xc, Xc))
    alive = norms > SD_EPS * np.sqrt(n - 1)
    out = np.zeros_like(Xc)
    out[:, alive] = Xc[:, alive] / norms[alive]
    return out


def _check_lengths(n_x: int, n_y: int) -> None:
    if n_x != n_y:
        raise InvalidInputError(f"length mismatch: {n_x} rows vs target of length {n_y}")
    if n_x < 2:
        raise InvalidInputError("scores need at least 2 observations")


def score(x, y) -> float:
    """Absolute Pearson correlation; 0 if either vector is (numerically) constant."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    _check_lengths(len(x), len(y))
    val = float(_unit_columns(x)[:, 0] @ _unit_columns(y)[:, 0])
    return min(abs(val), 1.0)


def scores(X, y) -> np.ndarray:
    """Columnwise :func:`score` of ``X`` against a real-valued target vector."""
    X = np.asarray(X, dtype=float)
    y = y.values if isinstance(y, Target) else y
    y = np.asarray(y, dtype=float).ravel()
    _check_lengths(X.shape[0], len(y))
    return np.minimum(np.abs(_unit_columns(y)[:, 0] @ _unit_columns(X)), 1.0)


def multiclass_scores(X, y: Target) -> tuple[np.ndarray, np.ndarray]:
    """Per-class scores (C x D) and their maximum over classes (D,)."""
    if not isinstance(y, Target) or not y.is_classification:
        raise InvalidInputError("multiclass_scores needs a classification target")
    X = np.asarray(X, dtype=float)
    _check_lengths(X.shape[0], len(y))
    rows = target_rows(y) if y.kind != "binary" else np.stack(
        [(y.values == 0).astype(float), y.values.astype(float)]
    )
    per_class = np.minimum(np.abs(_unit_columns(rows.T).T @ _unit_columns(X)), 1.0)
    return per_class, per_class.max(axis=0)


def target_scores(X, y) -> np.ndarray:
    """Scores used for screening: plain scores, or the max over classes."""
    rows = _unit_columns(target_rows(y).T).T
    _check_lengths(np.shape(X)[0], rows.shape[1])
    return np.minimum(np.abs(rows @ _unit_columns(X)), 1.0).max(axis=0)


def permutations(n: int, R: int, seed) -> np.ndarray:
    """The ``R`` seeded permutations of ``range(n)`` used by the tests below."""
    key = _seed_key(seed)
    return np.stack([np.random.default_rng([*key, r]).permutation(n) for r in range(R)])


def _permuted_score_chunks(X, y, R: int, seed):
    """Yield (observed, permuted) feature scores, permuted in chunks of rows.

    ``observed`` is a (D,) vector of target scores; each chunk is (c, D) with
    the score of every feature under each permuted target (max over classes
    for multiclass targets, where raw labels are permuted before encoding).
    """
    if R < 1:
        raise InvalidInputError("need at least one permutation")
    X = np.asarray(X, dtype=float)
    T = _unit_columns(target_rows(y).T).T
    _check_lengths(X.shape[0], T.shape[1])
    if not np.any(T):
        raise InvalidInputError("target is constant; permutation test undefined")
    Xn = _unit_columns(X)
    m, n = T.shape
    D = X.shape[1]
    observed = np.abs(T @ Xn).max(axis=0)
    perms = permutations(n, R, seed)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, m * max(D, n)))
    for start in range(0, R, chunk):
        P = perms[start : start + chunk]
        Yp = T[:, P].reshape(m * len(P), n)
        S = np.abs(Yp @ Xn).reshape(m, len(P), D).max(axis=0)
        yield observed, S


def _tie_floor(observed):
    return observed * (1.0 - TIE_RTOL) - TIE_ATOL


def feature_pvalues(X, y, R: int, seed) -> np.ndarray:
    """Per-feature permutation p-values with permutations shared across features.

    ``p_j = (1/R) * #{r : s_j(X, y_r) >= s_j(X, y)}``.
    """
    counts = None
    observed = None
    for observed, S in _permuted_score_chunks(X, y, R, seed):
        hits = (S >= _tie_floor(observed)).sum(axis=0)
        counts = hits if counts is None else counts + hits
    return counts / R


def max_score_pvalue(X, y, R: int, seed) -> float:
    """Permutation p-value of the maximal univariate score over all features.

    For multiclass targets the maximum also runs over the C indicators.
    """
    hits = 0
    obs = None
    for observed, S in _permuted_score_chunks(X, y, R, seed):
        obs = observed.max() if observed.size else 0.0
        perm_max = S.max(axis=1) if S.shape[1] else np.zeros(S.shape[0])
        hits += int((perm_max >= _tie_floor(obs)).sum())
    return hits / R


def shared_seed(seed: int | Sequence[int], *extra: int) -> tuple[int, ...]:
    """Extend a seed key with extra integers to name an independent substream."""
    return _seed_key(seed) + tuple(int(e) for e in extra)
