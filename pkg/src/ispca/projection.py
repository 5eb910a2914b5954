"""Deflation, the projection-matrix recurrence and fitted projection models.

Every method in this package (PCA, SPCA, PSPCA and the iterative variants)
extracts components one at a time from a progressively deflated copy of the
standardized feature matrix.  Component ``k`` is a unit vector ``v_k`` in the
deflated space of iteration ``k``; its latent feature is ``z_k = X_k v_k``.
Deflating every column by ``z_k`` makes later latent features orthogonal to it,
and the recurrence in :func:`projection_vectors` rewrites each ``v_k`` as a
column ``w_k`` of ``W`` with ``z_k = X w_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import SD_EPS, StandardizationParams, apply_standardization
from .errors import InvalidInputError, NoSignalError
from .pca import leading_pc

SUPERVISED = "supervised"
UNSUPERVISED = "unsupervised"


@dataclass(frozen=True)
class DeflationRecord:
    """Regression coefficients of every column on a latent feature ``z``."""

    b: np.ndarray
    z_norm_sq: float


@dataclass
class Component:
    v: np.ndarray
    w: Optional[np.ndarray] = None
    kind: str = UNSUPERVISED
    gamma: Optional[float] = None
    pvalue: Optional[float] = None
    source_class: Optional[int] = None
    score: Optional[float] = None
    n_features: int = 0
    degenerate: bool = False

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "gamma": self.gamma,
            "pvalue": self.pvalue,
            "score": self.score,
            "source_class": self.source_class,
            "n_features": self.n_features,
            "degenerate": self.degenerate,
        }


def deflate(X, z) -> tuple[np.ndarray, DeflationRecord]:
    """Subtract from every column its least-squares fit on ``z``.

    ``x_j' = x_j - b_j z`` with ``b_j = x_j^T z / z^T z``.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float).ravel()
    if z.shape[0] != X.shape[0]:
        raise InvalidInputError("z length does not match the row count")
    zz = float(z @ z)
    if not zz > 0.0:
        raise InvalidInputError("cannot deflate by a zero vector")
    b = (X.T @ z) / zz
    return X - np.outer(z, b), DeflationRecord(b, zz)


def projection_vectors(vs, records) -> np.ndarray:
    """Map deflated-space directions to original-space columns of ``W``.

    ``w_k = A_1 A_2 ... A_{k-1} v_k`` with ``A_t = I - v_t b_t^T``, applied
    right to left as ``v' <- v' - (b_t . v') v_t`` so no D x D matrix is
    formed.  ``records[t]`` must be the deflation performed after ``vs[t]``.
    """
    vs = [np.asarray(v, dtype=float) for v in vs]
    if not vs:
        return np.zeros((0, 0))
    if len(records) < len(vs) - 1:
        raise InvalidInputError("need a deflation record for every preceding component")
    W = np.empty((len(vs[0]), len(vs)))
    for k, v in enumerate(vs):
        w = v.copy()
        for t in range(k - 1, -1, -1):
            w -= (records[t].b @ w) * vs[t]
        W[:, k] = w
    return W


class Extraction:
    """Running state of a component-by-component fit on a standardized matrix."""

    def __init__(self, X_std: np.ndarray):
        self.X = np.array(X_std, dtype=float)
        self.n = self.X.shape[0]
        self.components: list[Component] = []
        self.records: list[DeflationRecord] = []
        self.zs: list[np.ndarray] = []

    def column_alive(self) -> np.ndarray:
        """Columns whose deflated sd is still above the constant floor."""
        sds = np.sqrt(np.einsum("ij,ij->j", self.X, self.X) / (self.n - 1))
        return sds > SD_EPS

    def add(self, comp: Component) -> np.ndarray:
        z = self.X @ comp.v
        self.X, rec = deflate(self.X, z)
        self.components.append(comp)
        self.records.append(rec)
        self.zs.append(z)
        return z

    def z_is_negligible(self, v: np.ndarray) -> bool:
        z = self.X @ v
        return float(z @ z) <= (SD_EPS**2) * (self.n - 1)


@dataclass
class ProjectionModel:
    """A fitted linear reduction ``Z = standardize(X) W / z_scales``."""

    W: np.ndarray
    components: list
    standardization: StandardizationParams
    z_scales: np.ndarray
    method: str = "ispca"
    config: dict = field(default_factory=dict)
    target_kind: str = ""
    labels: tuple = ()
    feature_names: tuple = ()
    warnings: list = field(default_factory=list)
    records: Optional[list] = None

    @property
    def K_total(self) -> int:
        return self.W.shape[1]

    @property
    def n_supervised(self) -> int:
        return sum(c.kind == SUPERVISED for c in self.components)

    def transform(self, X_raw) -> np.ndarray:
        return transform(self, X_raw)


def build_model(ext: Extraction, params: StandardizationParams, X_std, **meta) -> ProjectionModel:
    """Assemble a model from a finished extraction and set unit-variance scales."""
    D = X_std.shape[1]
    if ext.components:
        W = projection_vectors([c.v for c in ext.components], ext.records)
    else:
        W = np.zeros((D, 0))
    for k, comp in enumerate(ext.components):
        comp.w = W[:, k].copy()
    Z = X_std @ W
    scales = Z.std(axis=0, ddof=1) if W.shape[1] else np.zeros(0)
    return ProjectionModel(
        W=W,
        components=ext.components,
        standardization=params,
        z_scales=scales,
        records=ext.records,
        **meta,
    )


def transform(model: ProjectionModel, X_raw) -> np.ndarray:
    X_std = apply_standardization(X_raw, model.standardization)
    return (X_std @ model.W) / model.z_scales


def back_transform_coefficients(model: ProjectionModel, beta_latent) -> np.ndarray:
    """Original-space coefficients for a linear model fitted on ``Z``.

    With ``Z = X_std W diag(1/z_scales)``, ``Z beta~ = X_std beta`` for
    ``beta = W diag(1/z_scales) beta~``.  An intercept is unaffected.
    """
    beta_latent = np.asarray(beta_latent, dtype=float)
    if beta_latent.shape[0] != model.K_total:
        raise InvalidInputError(
            f"expected {model.K_total} latent coefficients, got {beta_latent.shape[0]}"
        )
    scaled = beta_latent / (model.z_scales if beta_latent.ndim == 1 else model.z_scales[:, None])
    return model.W @ scaled


def extract_unsupervised(ext: Extraction, count: int) -> int:
    """Append up to ``count`` ordinary PCs of the current deflated matrix.

    Returns how many were extracted; fewer than ``count`` means the deflated
    matrix ran out of rank.
    """
    done = 0
    for _ in range(count):
        try:
            pc = leading_pc(ext.X)
        except NoSignalError:
            break
        if ext.z_is_negligible(pc.v):
            break
        ext.add(
            Component(
                pc.v,
                kind=UNSUPERVISED,
                n_features=int(np.count_nonzero(ext.column_alive())),
                degenerate=pc.degenerate,
            )
        )
        done += 1
    return done
