"""PCA, supervised PCA (screen then PCA) and partially supervised PCA.

Screening keeps the features whose permutation p-value for the univariate
score is below ``screening_level`` (0.001 by default); multiclass targets are
screened on the max-over-classes score with labels permuted before encoding.
If nothing passes, the fit falls back to plain PCA and says so in
``model.warnings``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, check_target, standardize
from .errors import NoSignalError
from .iterative import FitConfig, ispca_fit
from .pca import leading_pc
from .projection import (
    SUPERVISED,
    Component,
    Extraction,
    ProjectionModel,
    build_model,
    extract_unsupervised,
)
from .scoring import feature_pvalues, shared_seed, target_scores

EMPTY_SCREEN = "empty-screen: no feature passed screening; fell back to plain PCA"


@dataclass(frozen=True)
class ScreeningResult:
    kept: np.ndarray
    gamma: float
    pvalues: np.ndarray


def screen(X_std, target, screening_level: float, n_permutations: int, seed) -> ScreeningResult:
    """Keep features with permutation p-value below ``screening_level``.

    A level of 1.0 or more keeps every feature.  ``gamma`` is the smallest
    univariate score among kept features (0.0 when none are kept).
    """
    if screening_level >= 1.0:
        kept = np.arange(X_std.shape[1])
        pvalues = np.ones(X_std.shape[1])
    else:
        pvalues = feature_pvalues(X_std, target, n_permutations, shared_seed(seed, 0))
        kept = np.flatnonzero(pvalues < screening_level)
    s = target_scores(X_std, target)
    gamma = float(s[kept].min()) if kept.size else 0.0
    return ScreeningResult(kept, gamma, pvalues)


def _extract_screened(ext: Extraction, kept: np.ndarray, count: int, target, gamma: float) -> int:
    done = 0
    for _ in range(count):
        Xk = ext.X[:, kept]
        try:
            pc = leading_pc(Xk)
        except NoSignalError:
            break
        v = np.zeros(ext.X.shape[1])
        v[kept] = pc.v
        if ext.z_is_negligible(v):
            break
        z = Xk @ pc.v
        ext.add(
            Component(
                v,
                kind=SUPERVISED,
                gamma=gamma,
                score=float(target_scores(z[:, None], target)[0]),
                n_features=int(kept.size),
                degenerate=pc.degenerate,
            )
        )
        done += 1
    return done


def _shortfall(requested: int, got: int, what: str) -> list:
    if got < requested:
        return [f"{what}-shortfall: requested {requested}, rank allowed {got}"]
    return []


def _meta(method: str, data: Dataset, config: dict, warnings: list) -> dict:
    return dict(
        method=method,
        config=config,
        target_kind=data.target.kind,
        labels=data.target.labels,
        feature_names=data.feature_names,
        warnings=warnings,
    )


def pca_fit(data: Dataset, k_total: int) -> ProjectionModel:
    """Plain PCA on standardized features, ``k_total`` components."""
    X_std, params = standardize(data.X)
    ext = Extraction(X_std)
    got = extract_unsupervised(ext, k_total)
    return build_model(
        ext,
        params,
        X_std,
        **_meta("pca", data, {"k_total": k_total}, _shortfall(k_total, got, "pca")),
    )


def _config_dict(k_total, screening_level, n_permutations, seed) -> dict:
    return {
        "k_total": k_total,
        "screening_level": screening_level,
        "n_permutations": n_permutations,
        "seed": seed,
    }


def spca_fit(
    data: Dataset,
    k_total: int,
    screening_level: float = 0.001,
    n_permutations: int = 1000,
    seed=0,
) -> ProjectionModel:
    """Supervised PCA: the first ``k_total`` PCs of the screened features."""
    check_target(data.target)
    X_std, params = standardize(data.X)
    res = screen(X_std, data.target, screening_level, n_permutations, seed)
    ext = Extraction(X_std)
    warnings = []
    if res.kept.size == 0:
        warnings.append(EMPTY_SCREEN)
        got = extract_unsupervised(ext, k_total)
    else:
        got = _extract_screened(ext, res.kept, k_total, data.target, res.gamma)
    warnings += _shortfall(k_total, got, "spca")
    cfg = _config_dict(k_total, screening_level, n_permutations, seed)
    cfg["n_kept"] = int(res.kept.size)
    return build_model(ext, params, X_std, **_meta("spca", data, cfg, warnings))


def pspca_fit(
    data: Dataset,
    k_total: int,
    screening_level: float = 0.001,
    n_permutations: int = 1000,
    seed=0,
) -> ProjectionModel:
    """Partially supervised PCA.

    The first ``ceil(k_total / 2)`` components are SPCA components; the rest
    are PCs of the whole matrix after deflating by the supervised latent
    features, so all latent features are mutually orthogonal.
    """
    check_target(data.target)
    X_std, params = standardize(data.X)
    res = screen(X_std, data.target, screening_level, n_permutations, seed)
    ext = Extraction(X_std)
    warnings = []
    n_sup = 0
    if res.kept.size == 0:
        warnings.append(EMPTY_SCREEN)
    else:
        n_sup = _extract_screened(ext, res.kept, math.ceil(k_total / 2), data.target, res.gamma)
    got = extract_unsupervised(ext, k_total - n_sup)
    warnings += _shortfall(k_total, n_sup + got, "pspca")
    cfg = _config_dict(k_total, screening_level, n_permutations, seed)
    cfg["n_kept"] = int(res.kept.size)
    return build_model(ext, params, X_std, **_meta("pspca", data, cfg, warnings))


METHODS = ("pca", "spca", "pspca", "ispca", "ispca-naive", "ispca-small")


def fit_reduction(method: str, data: Dataset, config: FitConfig = FitConfig()) -> ProjectionModel:
    """Dispatch on a method name shared by the CLI and the evaluation harness."""
    k_total = config.resolved_k_total(data.target)
    if method == "pca":
        return pca_fit(data, k_total)
    if method == "spca":
        return spca_fit(data, k_total, config.screening_level, config.n_permutations, config.seed)
    if method == "pspca":
        return pspca_fit(data, k_total, config.screening_level, config.n_permutations, config.seed)
    variants = {"ispca": "full", "ispca-naive": "naive", "ispca-small": "small"}
    if method in variants:
        cfg = FitConfig(**(config.as_dict() | {"variant": variants[method]}))
        return ispca_fit(data, cfg)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
