"""Repeated-split evaluation of dimension reduction + penalized logistic regression.

For each random stratified split the reduction is fitted on the training
rows only, both folds are transformed, the ridge penalty is picked by inner
5-fold cross-validation on the training latent features, and the test fold
is scored by mean log predictive density (MLPD) and accuracy.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .errors import ISPCAError, InvalidInputError
from .io import json_safe
from .iterative import FitConfig
from .logistic import fit_logistic
from .projection import transform
from .spca import fit_reduction

PROB_FLOOR = 1e-15
L2_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)
INNER_FOLDS = 5
BASELINE = "baseline"


def _check_probs(probs, y):
    probs = np.asarray(probs, dtype=float)
    y = np.asarray(y, dtype=int)
    if probs.ndim != 2 or probs.shape[0] != len(y):
        raise InvalidInputError("probs must be (n, C) with one row per label")
    if np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-9):
        raise InvalidInputError("probability rows must sum to 1")
    return probs, y


def mlpd(probs, y, with_flag: bool = False):
    """Mean log probability assigned to the true labels (codes 0..C-1).

    Probabilities below 1e-15 are clamped; ``with_flag=True`` also returns
    whether any clamping happened.
    """
    probs, y = _check_probs(probs, y)
    p_true = probs[np.arange(len(y)), y]
    clamped = bool(np.any(p_true < PROB_FLOOR))
    val = float(np.mean(np.log(np.maximum(p_true, PROB_FLOOR))))
    return (val, clamped) if with_flag else val


def accuracy(probs, y) -> float:
    probs, y = _check_probs(probs, y)
    # argmax returns the lowest index on ties
    return float(np.mean(np.argmax(probs, axis=1) == y))


@dataclass(frozen=True)
class SplitPlan:
    n_repeats: int = 50
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.n_repeats < 1:
            raise InvalidInputError("n_repeats must be at least 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise InvalidInputError("test_fraction must lie in (0, 1)")


def stratified_split(codes, test_fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """One random split holding out about ``test_fraction`` of every class.

    Each class keeps at least one training row.
    """
    codes = np.asarray(codes)
    test = []
    for c in np.unique(codes):
        idx = rng.permutation(np.flatnonzero(codes == c))
        k = min(int(round(test_fraction * idx.size)), idx.size - 1)
        test.extend(idx[:k].tolist())
    test = np.sort(np.asarray(test, dtype=int))
    train = np.setdiff1d(np.arange(len(codes)), test)
    return train, test


def stratified_splits(codes, plan: SplitPlan) -> list:
    return [
        stratified_split(codes, plan.test_fraction, np.random.default_rng([plan.seed, r]))
        for r in range(plan.n_repeats)
    ]


def _inner_folds(codes, k: int, rng) -> np.ndarray:
    fold = np.empty(len(codes), dtype=int)
    for c in np.unique(codes):
        idx = rng.permutation(np.flatnonzero(codes == c))
        fold[idx] = np.arange(idx.size) % k
    return fold


def choose_l2(Z, codes, n_classes: int, seed, grid=L2_GRID, folds: int = INNER_FOLDS) -> float:
    """Penalty with the best inner cross-validated log predictive density.

    Ties go to the larger penalty.  Folds whose training part lacks a class
    are skipped.
    """
    codes = np.asarray(codes)
    fold = _inner_folds(codes, folds, np.random.default_rng(seed))
    best_l2, best = None, -np.inf
    for l2 in sorted(grid, reverse=True):
        total, count = 0.0, 0
        for f in range(folds):
            tr, te = fold != f, fold == f
            if not te.any() or len(np.unique(codes[tr])) < n_classes:
                continue
            clf = fit_logistic(Z[tr], codes[tr], l2, n_classes)
            p = clf.predict_proba(Z[te])
            total += float(np.sum(np.log(np.maximum(p[np.arange(te.sum()), codes[te]], PROB_FLOOR))))
            count += int(te.sum())
        val = total / count if count else -np.inf
        if val > best:
            best_l2, best = l2, val
    return best_l2 if best_l2 is not None else max(grid)


@dataclass
class EvalReport:
    """Per-method, per-split metrics plus their summary."""

    rows: list = field(default_factory=list)
    methods: tuple = ()
    plan: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {}
        for m in self.methods:
            ok = [r for r in self.rows if r["method"] == m and r["error"] == ""]
            entry = {"n_ok": len(ok), "n_failed": sum(r["method"] == m for r in self.rows) - len(ok)}
            for metric in ("mlpd", "accuracy"):
                vals = np.array([r[metric] for r in ok], dtype=float)
                mean, lo, hi = interval(vals)
                entry[metric] = {"mean": mean, "lo": lo, "hi": hi}
            out[m] = entry
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["method", "split", "mlpd", "accuracy", "l2", "k_total", "n_supervised", "clamped", "error"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = json_safe({"plan": self.plan, "config": self.config, "summary": self.summary()})
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def interval(vals) -> tuple[float, float, float]:
    """Mean and normal-approximation 95% interval, mean +- 1.96 sd / sqrt(m)."""
    vals = np.asarray(vals, dtype=float)
    if vals.size == 0:
        return math.nan, math.nan, math.nan
    mean = float(vals.mean())
    if vals.size < 2:
        return mean, mean, mean
    half = 1.96 * float(vals.std(ddof=1)) / math.sqrt(vals.size)
    return mean, mean - half, mean + half


def _split_seed(seed: int, r: int) -> int:
    return int(np.random.SeedSequence([seed, r]).generate_state(1)[0])


def evaluate_split(method: str, train: Dataset, X_test, config: FitConfig, seed: int):
    """Fit reduction and classifier on ``train`` only; return them with test probabilities."""
    model = fit_reduction(method, train, config)
    Z_tr = transform(model, train.X)
    Z_te = transform(model, X_test)
    codes = train.target.class_codes()
    C = train.target.n_classes
    l2 = choose_l2(Z_tr, codes, C, seed)
    clf = fit_logistic(Z_tr, codes, l2, C)
    return model, clf, clf.predict_proba(Z_te)


def run_protocol(data: Dataset, methods, plan: SplitPlan = SplitPlan(), config: FitConfig = FitConfig()) -> EvalReport:
    """Evaluate each method over ``plan.n_repeats`` stratified splits.

    A ``baseline`` row per split records the MLPD/accuracy of predicting the
    training class frequencies.  Failures are recorded per cell and do not
    stop the run.
    """
    if not data.target.is_classification:
        raise InvalidInputError("the evaluation protocol needs a classification target")
    methods = tuple(methods)
    codes = data.target.class_codes()
    C = data.target.n_classes
    report = EvalReport(methods=(BASELINE,) + methods, plan=asdict(plan), config=config.as_dict())
    for r, (tr, te) in enumerate(stratified_splits(codes, plan)):
        train, test = data.take(tr), data.take(te)
        y_te = codes[te]
        freq = np.bincount(codes[tr], minlength=C) / len(tr)
        base = np.tile(freq, (len(te), 1))
        m_val, clamped = mlpd(base, y_te, with_flag=True)
        report.rows.append(_row(BASELINE, r, m_val, accuracy(base, y_te), math.nan, 0, 0, clamped))
        seed = _split_seed(config.seed, r)
        cfg = FitConfig(**(config.as_dict() | {"seed": seed}))
        for m in methods:
            try:
                model, clf, probs = evaluate_split(m, train, test.X, cfg, seed)
                m_val, clamped = mlpd(probs, y_te, with_flag=True)
                report.rows.append(
                    _row(m, r, m_val, accuracy(probs, y_te), clf.l2, model.K_total,
                         model.n_supervised, clamped)
                )
            except (ISPCAError, ValueError, np.linalg.LinAlgError) as exc:
                report.rows.append(_row(m, r, math.nan, math.nan, math.nan, 0, 0, False,
                                        f"{type(exc).__name__}: {exc}"))
    return report


def _row(method, split, mlpd_val, acc, l2, k_total, n_sup, clamped, error=""):
    return {
        "method": method,
        "split": split,
        "mlpd": mlpd_val,
        "accuracy": acc,
        "l2": l2,
        "k_total": k_total,
        "n_supervised": n_sup,
        "clamped": clamped,
        "error": error,
    }
