"""Feature matrices, targets, standardization and one-vs-rest encoding.

Everything downstream of this module works on standardized features:
columns centered to mean zero and scaled to unit sample variance
(denominator ``n - 1``).  Columns whose standard deviation is at or below
``SD_EPS`` are treated as constant and mapped to zeros instead of raising,
because deflation legitimately produces such columns mid-fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

SD_EPS = 1e-12

REGRESSION = "regression"
BINARY = "binary"
MULTICLASS = "multiclass"


@dataclass(frozen=True)
class Target:
    """A regression, binary or multiclass target.

    Binary values are coded 0/1; multiclass values are coded 1..C.  ``labels``
    holds the original label for each code (index 0 is code 0 for binary and
    code 1 for multiclass), so external labels survive a round trip.
    """

    kind: str
    values: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise InvalidInputError("target must be one-dimensional")
        if self.kind == REGRESSION:
            values = values.astype(float)
            if not np.all(np.isfinite(values)):
                raise InvalidInputError("regression target contains non-finite values")
        elif self.kind == BINARY:
            values = values.astype(int)
            if not set(np.unique(values)) <= {0, 1}:
                raise InvalidInputError("binary target must be coded 0/1")
            if len(np.unique(values)) < 2:
                raise InvalidInputError("binary target needs both labels present")
        elif self.kind == MULTICLASS:
            values = values.astype(int)
            present = np.unique(values)
            if len(present) < 2:
                raise InvalidInputError("multiclass target needs at least two labels")
            n_classes = len(self.labels) if self.labels else int(present[-1])
            if self.labels:
                if present[0] < 1 or present[-1] > n_classes:
                    raise InvalidInputError("multiclass codes must lie in 1..C")
            elif not np.array_equal(present, np.arange(1, n_classes + 1)):
                raise InvalidInputError("multiclass labels must form the contiguous set 1..C")
        else:
            raise InvalidInputError(f"unknown target kind {self.kind!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_classification(self) -> bool:
        return self.kind != REGRESSION

    @property
    def n_classes(self) -> int:
        if self.kind == BINARY:
            return 2
        if self.kind == MULTICLASS:
            return len(self.labels) if self.labels else int(self.values.max())
        return 0

    def class_codes(self) -> np.ndarray:
        """Integer class index 0..C-1 for each row (classification only)."""
        if self.kind == BINARY:
            return self.values.copy()
        if self.kind == MULTICLASS:
            return self.values - 1
        raise InvalidInputError("regression targets have no class codes")

    def take(self, idx) -> "Target":
        """Subset rows, keeping the parent's label coding."""
        labels = self.labels
        if self.kind == MULTICLASS and not labels:
            labels = tuple(range(1, self.n_classes + 1))
        return Target(self.kind, self.values[idx], labels)


def regression_target(y) -> Target:
    return Target(REGRESSION, np.asarray(y, dtype=float))


def encode_labels(raw: Sequence) -> Target:
    """Map arbitrary labels to a classification target by first appearance.

    Two distinct labels give a binary target (first seen -> 0), more give a
    multiclass target (first seen -> 1).
    """
    order: dict = {}
    for lab in raw:
        if lab not in order:
            order[lab] = len(order)
    if len(order) < 2:
        raise InvalidInputError("classification target needs at least two distinct labels")
    codes = np.array([order[lab] for lab in raw], dtype=int)
    labels = tuple(order)
    if len(order) == 2:
        return Target(BINARY, codes, labels)
    return Target(MULTICLASS, codes + 1, labels)


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    target: Target
    feature_names: tuple = field(default=())

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise InvalidInputError("feature matrix must be two-dimensional")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("feature matrix contains non-finite entries")
        if X.shape[0] != len(self.target):
            raise InvalidInputError(
                f"feature rows ({X.shape[0]}) do not match target length ({len(self.target)})"
            )
        names = tuple(self.feature_names) or tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise InvalidInputError("feature_names length does not match column count")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def D(self) -> int:
        return self.X.shape[1]

    def take(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.target.take(idx), self.feature_names)


@dataclass(frozen=True)
class StandardizationParams:
    means: np.ndarray
    sds: np.ndarray
    constant: np.ndarray

    @property
    def D(self) -> int:
        return len(self.means)

    def divisors(self) -> np.ndarray:
        return np.where(self.constant, 1.0, self.sds)


def standardize(X) -> tuple[np.ndarray, StandardizationParams]:
    """Center columns and scale to unit sample variance.

    Returns the standardized matrix and the parameters that produced it.
    Constant columns (sd <= ``SD_EPS``) become zeros and are flagged.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidInputError("standardize needs a 2-D matrix with at least 2 rows")
    means = X.mean(axis=0)
    sds = X.std(axis=0, ddof=1)
    params = StandardizationParams(means, sds, sds <= SD_EPS)
    return apply_standardization(X, params), params


def apply_standardization(X, params: StandardizationParams) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.D:
        raise InvalidInputError(
            f"expected {params.D} columns, got {X.shape[1] if X.ndim == 2 else X.shape}"
        )
    out = (X - params.means) / params.divisors()
    out[:, params.constant] = 0.0
    return out


def one_vs_rest(y, c: int) -> np.ndarray:
    """Indicator ``y == c`` as a 0/1 integer vector."""
    y = y.values if isinstance(y, Target) else np.asarray(y)
    if c not in set(np.unique(y).tolist()):
        raise InvalidInputError(f"class {c!r} is not in the label set")
    return (y == c).astype(int)


def target_rows(y) -> np.ndarray:
    """Real-valued target vectors used for scoring, one row each.

    Regression and binary targets give a single row; a multiclass target
    gives its C one-vs-rest indicator rows.  Plain arrays are treated as a
    single real-valued target.
    """
    if isinstance(y, Target):
        if y.kind == MULTICLASS:
            codes = y.values
            return np.stack([(codes == c).astype(float) for c in range(1, y.n_classes + 1)])
        return y.values.astype(float)[None, :]
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise InvalidInputError("target vector must be one-dimensional")
    return y[None, :]


def check_target(target: Target) -> None:
    """Reject a target with no variation (nothing to supervise on)."""
    if np.all(target_rows(target).std(axis=1) == 0):
        raise InvalidInputError("target is constant")
