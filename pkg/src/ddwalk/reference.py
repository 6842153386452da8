"""Exact dense solvers used as ground truth at desk scale."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import (
    NegativeWeight,
    NonConvergence,
    NotSymmetric,
    OpinionOutOfRange,
    SingularNonSymmetric,
    TooLarge,
)
from .system import SparseDDSystem

DENSE_LIMIT = 5000
EIGEN_LIMIT = 2000
PIVOT_RTOL = 1e-12
EIG_RTOL = 1e-10
SYM_TOL = 1e-12
RANGE_RTOL = 1e-8


@dataclass(frozen=True)
class DenseSolveResult:
    z: np.ndarray
    residual_inf: float
    singular_flag: bool


def _as_dense(S, b=None):
    if isinstance(S, SparseDDSystem):
        A = S.to_dense()
        if b is None:
            b = S.b
    else:
        A = np.asarray(S, dtype=float)
    if b is not None:
        b = np.asarray(b, dtype=float)
    return A, b


def _residual(A, z, b) -> float:
    return float(np.max(np.abs(A @ z - b))) if b.size else 0.0


def _lu_singular(A: np.ndarray):
    """LU with partial pivoting; flags a pivot below 1e-12 times its row's inf-norm."""
    with warnings.catch_warnings():
        # singularity is reported through the flag below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=True)
    perm = np.arange(A.shape[0])
    for i, p in enumerate(piv):
        perm[i], perm[p] = perm[p], perm[i]
    row_norms = np.max(np.abs(A[perm]), axis=1)
    pivots = np.abs(np.diag(lu))
    singular = bool(np.any(pivots < PIVOT_RTOL * np.maximum(row_norms, np.finfo(float).tiny)))
    return lu, piv, singular


def dense_solve(S, b=None) -> DenseSolveResult:
    """z* for S z = b by Gaussian elimination with partial pivoting.

    Accepts a :class:`SparseDDSystem` (its own b unless one is passed) or a
    dense matrix plus b.  When elimination meets a negligible pivot the
    result is flagged singular and ``z`` is a least-squares solution.
    """
    A, b = _as_dense(S, b)
    n = A.shape[0]
    if n > DENSE_LIMIT:
        raise TooLarge(f"n = {n} exceeds the dense limit {DENSE_LIMIT}")
    lu, piv, singular = _lu_singular(A)
    if singular:
        z = np.linalg.lstsq(A, b, rcond=None)[0]
    else:
        z = sla.lu_solve((lu, piv), b)
    return DenseSolveResult(z, _residual(A, z, b), singular)


def _check_symmetric(A: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > SYM_TOL * scale:
        raise NotSymmetric("matrix is not symmetric")


def _pinv_symmetric(A: np.ndarray) -> np.ndarray:
    lam, V = np.linalg.eigh(A)
    cut = EIG_RTOL * float(np.max(np.abs(lam))) if lam.size else 0.0
    keep = np.abs(lam) > cut
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    return (V * inv) @ V.T


def pseudo_solve_symmetric(S, b=None) -> DenseSolveResult:
    """z = S^+ b for symmetric S; eigenvalues below 1e-10 max|lambda| count as zero."""
    A, b = _as_dense(S, b)
    n = A.shape[0]
    if n > EIGEN_LIMIT:
        raise TooLarge(f"n = {n} exceeds the eigensolver limit {EIGEN_LIMIT}")
    _check_symmetric(A)
    lam, V = np.linalg.eigh(A)
    cut = EIG_RTOL * float(np.max(np.abs(lam))) if lam.size else 0.0
    keep = np.abs(lam) > cut
    z = V[:, keep] @ ((V[:, keep].T @ b) / lam[keep])
    return DenseSolveResult(z, _residual(A, z, b), bool(np.any(~keep)))


def kappa_inf(S) -> float:
    """||S||_inf * ||S^-1||_inf, with the pseudo-inverse for singular symmetric S."""
    A, _ = _as_dense(S)
    n = A.shape[0]
    if n > EIGEN_LIMIT:
        raise TooLarge(f"n = {n} exceeds the limit {EIGEN_LIMIT}")
    norm = float(np.max(np.sum(np.abs(A), axis=1)))
    _, _, singular = _lu_singular(A)
    if singular:
        try:
            _check_symmetric(A)
        except NotSymmetric:
            raise SingularNonSymmetric("singular matrix without symmetry has no defined kappa") from None
        inv = _pinv_symmetric(A)
    else:
        inv = np.linalg.inv(A)
    return norm * float(np.max(np.sum(np.abs(inv), axis=1)))


def in_range(S, b=None) -> bool:
    A, b = _as_dense(S, b)
    _check_symmetric(A)
    z = _pinv_symmetric(A) @ b
    return bool(np.max(np.abs(A @ z - b), initial=0.0) <= RANGE_RTOL * max(1.0, float(np.max(np.abs(b), initial=0.0))))


def fj_fixed_point(edges: Iterable[tuple], innate, tol: float = 1e-12,
                   max_iters: int = 100000, callback=None) -> np.ndarray:
    """Synchronous opinion update z <- (b + W z) / (1 + deg_w), from z = innate.

    Stops once two consecutive iterates differ by at most ``tol`` in the max
    norm.  The error to the fixed point is then at most W * tol, W the largest
    weighted degree.  ``callback(z)`` is called on every iterate.
    """
    b = np.asarray(innate, dtype=float)
    n = b.size
    if np.any((b < 0.0) | (b > 1.0)):
        raise OpinionOutOfRange("innate opinions must lie in [0, 1]")
    rows, cols, vals = [], [], []
    for e in edges:
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) > 2 else 1.0
        if not w > 0:
            raise NegativeWeight(f"edge ({u}, {v}) has non-positive weight {w}")
        rows += [u, v]
        cols += [v, u]
        vals += [w, w]
    Wm = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    denom = 1.0 + np.asarray(Wm.sum(axis=1)).ravel()
    z = b.copy()
    for _ in range(max_iters):
        nxt = (b + Wm @ z) / denom
        if callback is not None:
            callback(nxt)
        gap = float(np.max(np.abs(nxt - z), initial=0.0))
        z = nxt
        if gap <= tol:
            return z
    raise NonConvergence(f"no convergence to {tol} within {max_iters} iterations (gap {gap:.3e})")
