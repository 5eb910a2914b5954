"""Iterative supervised principal components.

Each supervised iteration scores every feature of the current (deflated)
matrix against the target, searches a grid of screening thresholds for the
screened leading PC whose projection correlates best with the target, and
deflates all columns by that projection.  A max-statistic permutation test
run before every extraction decides when to stop; the ``full`` variant then
fills the remaining budget with ordinary PCs of what is left.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .data import MULTICLASS, Dataset, Target, check_target, standardize, target_rows
from .errors import InvalidInputError, NoSignalError
from .pca import leading_pc
from .projection import (
    SUPERVISED,
    Component,
    Extraction,
    ProjectionModel,
    build_model,
    extract_unsupervised,
)
from .scoring import max_score_pvalue, score, scores, shared_seed

GRID_NUDGE = 1e-12
VARIANTS = ("naive", "small", "full")


@dataclass(frozen=True)
class FitConfig:
    alpha: float = 0.01
    n_permutations: int = 1000
    grid_size: int = 10
    window: int = 500
    k_total: Optional[int] = None
    variant: str = "full"
    seed: int = 0
    screening_level: float = 0.001

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError("alpha must lie in (0, 1)")
        if self.n_permutations < 1:
            raise InvalidInputError("n_permutations must be at least 1")
        if self.grid_size < 2:
            raise InvalidInputError("grid_size must be at least 2")
        if self.window < 1:
            raise InvalidInputError("window must be at least 1")
        if self.k_total is not None and self.k_total < 1:
            raise InvalidInputError("k_total must be at least 1")
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"variant must be one of {VARIANTS}")
        if not 0.0 < self.screening_level <= 1.0:
            raise InvalidInputError("screening_level must lie in (0, 1]")

    def resolved_k_total(self, target: Target) -> int:
        if self.k_total is not None:
            return self.k_total
        return 20 if target.kind == MULTICLASS else 50

    def as_dict(self) -> dict:
        return asdict(self)


def _just_below(x: float) -> float:
    # the relative nudge vanishes for subnormal scores; nextafter never does
    return min(x * (1.0 - GRID_NUDGE), float(np.nextafter(x, 0.0)))


def gamma_grid(s, M: int, window: int) -> np.ndarray:
    """Descending screening thresholds between the one-feature and window-size ends.

    The top end keeps only the top-scoring feature (or its ties); the bottom
    end keeps ``min(window, D')`` features, ``D'`` being the number with a
    positive score.  Survivors of threshold ``g`` are ``{j : s_j > g}``.
    Duplicate thresholds collapse, so ``D' = 1`` yields a single value.
    """
    s = np.asarray(s, dtype=float)
    desc = np.sort(s[s > 0])[::-1]
    if desc.size == 0:
        raise NoSignalError("all scores are zero")
    top = desc[0]
    if desc.size == 1:
        g_max = _just_below(top)
    else:
        distinct = np.unique(s)[::-1]
        g_max = distinct[1] if distinct.size > 1 else _just_below(top)
    m = min(window, desc.size)
    g_min = _just_below(desc[m - 1])
    lo, hi = min(g_min, g_max), max(g_min, g_max)
    return np.unique(np.linspace(lo, hi, M))[::-1]


def _best_for_vector(X: np.ndarray, y: np.ndarray, config: FitConfig) -> Component:
    s = scores(X, y)
    grid = gamma_grid(s, config.grid_size, config.window)
    best: Optional[Component] = None
    seen = set()
    for g in grid:
        surv = np.flatnonzero(s > g)
        # survivor sets are nested, so the size identifies the set
        if surv.size in seen:
            continue
        seen.add(surv.size)
        Xs = X[:, surv]
        pc = leading_pc(Xs)
        sc = score(Xs @ pc.v, y)
        if best is None or sc > best.score:
            v = np.zeros(X.shape[1])
            v[surv] = pc.v
            best = Component(
                v,
                kind=SUPERVISED,
                gamma=float(g),
                score=sc,
                n_features=int(surv.size),
                degenerate=pc.degenerate,
            )
    return best


def best_supervised_direction(X, y, config: FitConfig) -> tuple[Component, np.ndarray]:
    """Screened leading PC maximizing the target score over the threshold grid.

    Ties prefer the larger threshold.  For a multiclass target each
    one-vs-rest indicator is searched separately and the candidate with the
    highest score against its own indicator wins (lowest class on ties).

    Returns:
        The candidate component (``v`` zero-padded to D) and ``z = X v``.
    """
    X = np.asarray(X, dtype=float)
    if isinstance(y, Target) and y.kind == MULTICLASS:
        best = None
        for c, row in enumerate(target_rows(y), start=1):
            try:
                cand = _best_for_vector(X, row, config)
            except NoSignalError:
                continue
            if best is None or cand.score > best.score:
                cand.source_class = c
                best = cand
        if best is None:
            raise NoSignalError("no class indicator correlates with any feature")
    else:
        yv = y.values if isinstance(y, Target) else y
        best = _best_for_vector(X, np.asarray(yv, dtype=float), config)
    return best, X @ best.v


def permutation_pvalue(X, y, R: int, seed) -> float:
    """Permutation p-value of the maximal univariate score (the stopping gate)."""
    return max_score_pvalue(X, y, R, seed)


def ispca_fit(data: Dataset, config: FitConfig = FitConfig()) -> ProjectionModel:
    """Fit iterative supervised principal components on raw features.

    Variants:
        naive: up to K_tot supervised components, no permutation gate.
        small: supervised components while the gate p-value is below alpha.
        full: as small, then ordinary PCs of the deflated matrix up to K_tot.
    """
    target = data.target
    check_target(target)
    K_tot = config.resolved_k_total(target)
    X_std, params = standardize(data.X)
    ext = Extraction(X_std)
    warnings = []

    for k in range(K_tot):
        pvalue = None
        if config.variant != "naive":
            pvalue = permutation_pvalue(
                ext.X, target, config.n_permutations, shared_seed(config.seed, k)
            )
            if pvalue >= config.alpha:
                break
        try:
            comp, _ = best_supervised_direction(ext.X, target, config)
        except NoSignalError:
            break
        if ext.z_is_negligible(comp.v):
            break
        comp.pvalue = pvalue
        ext.add(comp)

    n_sup = len(ext.components)
    if config.variant == "full" and n_sup < K_tot:
        got = extract_unsupervised(ext, K_tot - n_sup)
        if got < K_tot - n_sup:
            warnings.append(
                f"tail-shortfall: requested {K_tot - n_sup} unsupervised components, "
                f"rank allowed {got}"
            )
    elif config.variant == "naive" and n_sup < K_tot:
        warnings.append(f"supervised-shortfall: requested {K_tot}, extracted {n_sup}")

    method = "ispca" if config.variant == "full" else f"ispca-{config.variant}"
    return build_model(
        ext,
        params,
        X_std,
        method=method,
        config=config.as_dict() | {"k_total": K_tot},
        target_kind=target.kind,
        labels=target.labels,
        feature_names=data.feature_names,
        warnings=warnings,
    )
