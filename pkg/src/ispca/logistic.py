"""L2-penalized logistic and softmax regression fitted by damped Newton steps.

The objective is the summed negative log-likelihood plus ``l2/2 * ||B||^2``
over the slope coefficients; intercepts are unpenalized.  In the multiclass
case the last class's intercept is pinned to zero so the optimum is unique.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .data import Target
from .errors import ConvergenceError, InvalidInputError

GRAD_TOL = 1e-8
MAX_NEWTON = 200


@dataclass(frozen=True)
class LogisticModel:
    """Fitted coefficients.

    Binary: ``coef`` has shape (p,) and ``intercept`` is a float, the model
    being ``P(y=1) = expit(intercept + Z @ coef)``.  Multiclass: ``coef`` is
    (C, p) and ``intercept`` is (C,) with the last entry zero.
    """

    coef: np.ndarray
    intercept: object
    n_classes: int
    l2: float
    n_iter: int
    grad_norm: float

    def predict_proba(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=float).reshape(len(Z), -1)
        if self.n_classes == 2:
            p1 = expit(self.intercept + Z @ self.coef)
            return np.column_stack([1.0 - p1, p1])
        eta = Z @ self.coef.T + self.intercept
        return np.exp(eta - logsumexp(eta, axis=1, keepdims=True))


def _codes(y, n_classes):
    if isinstance(y, Target):
        return y.class_codes(), n_classes or y.n_classes
    codes = np.asarray(y, dtype=int)
    return codes, n_classes or int(codes.max()) + 1


def n_params(p: int, n_classes: int) -> int:
    return p + 1 if n_classes == 2 else n_classes * p + n_classes - 1


def _binary_parts(theta, Z, y, l2, hessian):
    b0, beta = theta[0], theta[1:]
    eta = b0 + Z @ beta
    f = float(np.sum(np.logaddexp(0.0, eta) - y * eta) + 0.5 * l2 * beta @ beta)
    r = expit(eta) - y
    g = np.concatenate([[r.sum()], Z.T @ r + l2 * beta])
    if not hessian:
        return f, g, None
    Xt = np.column_stack([np.ones(len(Z)), Z])
    wts = expit(eta) * expit(-eta)
    H = Xt.T @ (wts[:, None] * Xt)
    H[1:, 1:] += l2 * np.eye(Z.shape[1])
    return f, g, H


def _softmax_parts(theta, Z, codes, l2, C, hessian):
    n, p = Z.shape
    B = theta[: C * p].reshape(C, p)
    a = np.append(theta[C * p :], 0.0)
    eta = Z @ B.T + a
    lse = logsumexp(eta, axis=1)
    f = float(np.sum(lse - eta[np.arange(n), codes]) + 0.5 * l2 * np.sum(B * B))
    P = np.exp(eta - lse[:, None])
    R = P.copy()
    R[np.arange(n), codes] -= 1.0
    g = np.concatenate([(R.T @ Z + l2 * B).ravel(), R.sum(axis=0)[: C - 1]])
    if not hessian:
        return f, g, None
    # full Hessian over (class, [slopes..., intercept]) then drop the pinned intercept
    Xt = np.column_stack([Z, np.ones(n)])
    q = p + 1
    M = (P[:, :, None] * Xt[:, None, :]).reshape(n, C * q)
    H = -(M.T @ M)
    for c in range(C):
        blk = slice(c * q, (c + 1) * q)
        H[blk, blk] += Xt.T @ (P[:, c, None] * Xt)
    free = [c * q + j for c in range(C) for j in range(p)] + [c * q + p for c in range(C - 1)]
    H = H[np.ix_(free, free)]
    H[: C * p, : C * p] += l2 * np.eye(C * p)
    return f, g, H


def _parts(theta, Z, codes, l2, C, hessian=True):
    if C == 2:
        return _binary_parts(theta, Z, codes.astype(float), l2, hessian)
    return _softmax_parts(theta, Z, codes, l2, C, hessian)


def penalized_nll(theta, Z, y, l2: float, n_classes: int | None = None) -> float:
    codes, C = _codes(y, n_classes)
    return _parts(np.asarray(theta, float), np.asarray(Z, float), codes, l2, C, False)[0]


def penalized_gradient(theta, Z, y, l2: float, n_classes: int | None = None) -> np.ndarray:
    codes, C = _codes(y, n_classes)
    return _parts(np.asarray(theta, float), np.asarray(Z, float), codes, l2, C, False)[1]


def fit_logistic(Z, y, l2: float, n_classes: int | None = None) -> LogisticModel:
    """Minimize the penalized negative log-likelihood to gradient norm < 1e-8.

    Args:
        Z: (n, p) features; ``p`` may be 0 for an intercept-only model.
        y: a classification ``Target`` or integer codes 0..C-1.
        l2: ridge penalty on slopes, must be positive.
        n_classes: number of classes when ``y`` is a code array.

    Raises:
        ConvergenceError: the Newton iteration hit its cap.
    """
    if not l2 > 0:
        raise InvalidInputError("l2 must be positive")
    codes, C = _codes(y, n_classes)
    Z = np.asarray(Z, dtype=float).reshape(len(codes), -1)
    if not np.all(np.isfinite(Z)):
        raise InvalidInputError("Z contains non-finite values")
    if C < 2 or codes.min() < 0 or codes.max() >= C:
        raise InvalidInputError("class codes must lie in 0..C-1 with C >= 2")
    n, p = Z.shape
    theta = np.zeros(n_params(p, C))
    f, g, H = _parts(theta, Z, codes, l2, C)
    gnorm = float(np.linalg.norm(g))
    it = 0
    while gnorm >= GRAD_TOL:
        if it >= MAX_NEWTON:
            raise ConvergenceError(
                f"Newton iteration did not converge in {MAX_NEWTON} steps",
                grad_norm=gnorm,
                objective=f,
                l2=l2,
            )
        it += 1
        step = np.linalg.solve(H, -g)
        slope = float(g @ step)
        t = 1.0
        while True:
            cand = theta + t * step
            f_new, g_new, _ = _parts(cand, Z, codes, l2, C, False)
            if f_new <= f + 1e-4 * t * slope or t < 1e-10:
                break
            # near the optimum objective changes drown in rounding; a full
            # Newton step that shrinks the gradient is still progress
            if t == 1.0 and np.linalg.norm(g_new) < 0.5 * gnorm:
                break
            t *= 0.5
        theta = cand
        f, g, H = _parts(theta, Z, codes, l2, C)
        gnorm = float(np.linalg.norm(g))

    if C == 2:
        return LogisticModel(theta[1:].copy(), float(theta[0]), 2, l2, it, gnorm)
    coef = theta[: C * p].reshape(C, p).copy()
    intercept = np.append(theta[C * p :], 0.0)
    return LogisticModel(coef, intercept, C, l2, it, gnorm)
