"""Leading principal components by power iteration.

Inputs are assumed column-centered (standardized or deflated upstream).
The iteration runs on the smaller Gram matrix: ``X^T X`` when ``D <= n``,
otherwise ``X X^T`` with the right singular vector recovered as ``X^T u``.
Start vectors are data-dependent and seed-free, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SD_EPS
from .errors import InvalidInputError, NoSignalError

POWER_TOL = 1e-10
POWER_MAX_ITER = 1000


@dataclass(frozen=True)
class PrincipalDirection:
    v: np.ndarray
    explained_variance: float
    degenerate: bool = False
    n_iter: int = 0


def fix_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its largest-magnitude entry is positive (lowest index on ties)."""
    j = int(np.argmax(np.abs(v)))
    return -v if v[j] < 0 else v


def _power_iterate(G: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, int, bool]:
    for it in range(1, POWER_MAX_ITER + 1):
        g = G @ u
        norm = np.linalg.norm(g)
        if norm == 0.0:
            return u, it, True
        g /= norm
        # the dominant eigenvalue of a Gram matrix is positive, so no sign flips
        if np.linalg.norm(g - u) <= POWER_TOL:
            return g, it, False
        u = g
    return u, POWER_MAX_ITER, True


def _start_vector(G: np.ndarray, seed_vec: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(seed_vec)
    if norm > 0 and np.linalg.norm(G @ seed_vec) > 0:
        return seed_vec / norm
    col = G[:, int(np.argmax(np.diag(G)))]
    return col / np.linalg.norm(col)


def leading_pc(X) -> PrincipalDirection:
    """Dominant right singular vector of ``X`` with the sign convention applied.

    Raises:
        NoSignalError: every column of ``X`` is (numerically) constant.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise InvalidInputError("leading_pc needs an n x D matrix with n >= 2, D >= 1")
    n, D = X.shape
    sds = np.sqrt(np.einsum("ij,ij->j", X, X) / (n - 1))
    if not np.any(sds > SD_EPS):
        raise NoSignalError("matrix has no nonzero column")
    if D <= n:
        G = X.T @ X
        v, it, degenerate = _power_iterate(G, _start_vector(G, sds))
    else:
        G = X @ X.T
        u, it, degenerate = _power_iterate(G, _start_vector(G, X @ sds))
        v = X.T @ u
        v /= np.linalg.norm(v)
    v = fix_sign(v)
    z = X @ v
    return PrincipalDirection(v, float(z @ z) / (n - 1), degenerate, it)


def principal_components(X, K: int) -> list[PrincipalDirection]:
    """First ``K`` principal directions by repeated leading PC + deflation.

    After each direction ``v`` is found, the matrix is deflated by its score
    vector ``z = Xv`` (``X <- X - z b^T``, ``b = X^T z / z^T z``), which puts
    ``v`` in the null space of the remainder.  When the matrix runs out of
    rank before ``K`` directions the achievable prefix is returned; callers
    read the shortfall off the length.
    """
    X = np.array(X, dtype=float)
    if K < 1:
        raise InvalidInputError("K must be at least 1")
    out: list[PrincipalDirection] = []
    for _ in range(K):
        try:
            pc = leading_pc(X)
        except NoSignalError:
            break
        z = X @ pc.v
        zz = z @ z
        if zz <= (SD_EPS**2) * (X.shape[0] - 1):
            break
        X -= np.outer(z, (X.T @ z) / zz)
        out.append(pc)
    return out
