"""Sparse storage of a diagonally dominant system (S, b).

Off-diagonal entries are kept per row in CSR layout.  The order inside a row
is the insertion order at construction time and is what the neighbor query
exposes.  Each row also carries the prefix sums of |S_uv| used to draw a
neighbor with probability |S_uv| / d_out(u).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateEntry,
    IndexOutOfRange,
    NegativeWeight,
    OpinionOutOfRange,
    SelfLoop,
)

DOUT_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseDDSystem:
    """The pair (S, b) with cached weighted out-degrees and sampling tables.

    ``indptr``/``indices``/``weights`` hold the off-diagonal part of S in CSR
    form; ``cumw[indptr[u]:indptr[u+1]]`` are the running sums of
    ``|weights|`` over row u, so the last one equals ``dout[u]``.
    """

    n: int
    diag: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    b: np.ndarray
    dout: np.ndarray
    cumw: np.ndarray

    def degree(self, u: int) -> int:
        """Unweighted out-degree (number of stored off-diagonal entries)."""
        return int(self.indptr[u + 1] - self.indptr[u])

    def row(self, u: int) -> list[tuple[int, float]]:
        if not 0 <= u < self.n:
            raise IndexOutOfRange(f"vertex {u} outside [0, {self.n})")
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return [(int(v), float(w)) for v, w in zip(self.indices[lo:hi], self.weights[lo:hi])]

    def row_cumw(self, u: int) -> np.ndarray:
        return self.cumw[self.indptr[u]:self.indptr[u + 1]]

    @property
    def rows(self) -> list[list[tuple[int, float]]]:
        return [self.row(u) for u in range(self.n)]

    @property
    def nnz_offdiag(self) -> int:
        return int(self.indptr[-1])

    def with_rhs(self, b) -> "SparseDDSystem":
        """Same matrix, different right-hand side (tables are shared)."""
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n,):
            raise DimensionMismatch(f"b has shape {b.shape}, expected ({self.n},)")
        return SparseDDSystem(self.n, self.diag, self.indptr, self.indices,
                              self.weights, _frozen(b.copy()), self.dout, self.cumw)

    def negated(self) -> "SparseDDSystem":
        """The system (-S, -b); same solution."""
        return SparseDDSystem(self.n, _frozen(-self.diag), self.indptr, self.indices,
                              _frozen(-self.weights), _frozen(-self.b), self.dout, self.cumw)

    def to_triplets(self):
        """Inverse of :func:`from_triplets` (diagonal zeros are omitted)."""
        diag_entries = [(i, float(x)) for i, x in enumerate(self.diag) if x != 0.0]
        off = []
        for u in range(self.n):
            off.extend((u, v, w) for v, w in self.row(u))
        return self.n, diag_entries, off, self.b.copy()

    def to_dense(self) -> np.ndarray:
        S = np.diag(self.diag.astype(float))
        for u in range(self.n):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            S[u, self.indices[lo:hi]] = self.weights[lo:hi]
        return S

    def validate(self) -> None:
        """Re-check the structural invariants; raises AssertionError on failure."""
        for u in range(self.n):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            nbrs = self.indices[lo:hi]
            w = self.weights[lo:hi]
            assert not np.any(nbrs == u), f"self loop in row {u}"
            assert len(np.unique(nbrs)) == len(nbrs), f"duplicate neighbor in row {u}"
            assert np.all(w != 0.0), f"zero weight stored in row {u}"
            total = float(np.abs(w).sum())
            assert abs(total - self.dout[u]) <= DOUT_RTOL * max(1.0, total), f"dout mismatch at {u}"
            c = self.cumw[lo:hi]
            if hi > lo:
                assert np.all(np.diff(c) > 0), f"cumw not increasing at {u}"
                assert c[-1] == self.dout[u]


def from_triplets(n: int, diag_entries: Iterable[tuple[int, float]],
                  offdiag_entries: Iterable[tuple[int, int, float]], b) -> SparseDDSystem:
    """Build a system from coordinate lists.

    Missing diagonal entries are zero.  Explicit zero off-diagonal values are
    not edges and are dropped.  Repeated coordinates raise DuplicateEntry.
    """
    if n < 1:
        raise DimensionMismatch("n must be positive")
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise DimensionMismatch(f"b has length {b.size}, expected {n}")

    diag = np.zeros(n)
    seen_diag = set()
    for i, x in diag_entries:
        i = int(i)
        if not 0 <= i < n:
            raise IndexOutOfRange(f"diagonal index {i} outside [0, {n})")
        if i in seen_diag:
            raise DuplicateEntry(f"diagonal entry ({i}, {i}) given twice")
        seen_diag.add(i)
        diag[i] = float(x)

    rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    seen = set()
    for i, j, w in offdiag_entries:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"entry ({i}, {j}) outside [0, {n})")
        if i == j:
            raise SelfLoop(f"off-diagonal triplet on the diagonal: ({i}, {j})")
        if (i, j) in seen:
            raise DuplicateEntry(f"entry ({i}, {j}) given twice")
        seen.add((i, j))
        if w != 0.0:
            rows[i].append((j, float(w)))
    return _from_rows(n, diag, rows, b)


def _from_rows(n: int, diag: np.ndarray, rows: Sequence[Sequence[tuple[int, float]]],
               b: np.ndarray) -> SparseDDSystem:
    lengths = np.fromiter((len(r) for r in rows), dtype=np.int64, count=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    nnz = int(indptr[-1])
    indices = np.empty(nnz, dtype=np.int64)
    weights = np.empty(nnz, dtype=float)
    cumw = np.empty(nnz, dtype=float)
    dout = np.zeros(n)
    for u, r in enumerate(rows):
        lo = indptr[u]
        acc = 0.0
        for k, (v, w) in enumerate(r):
            indices[lo + k] = v
            weights[lo + k] = w
            acc += abs(w)
            cumw[lo + k] = acc
        dout[u] = acc
    return SparseDDSystem(n, _frozen(diag), _frozen(indptr), _frozen(indices),
                          _frozen(weights), _frozen(b.copy()), _frozen(dout), _frozen(cumw))


def max_delta(S: SparseDDSystem) -> float:
    """Largest delta for which S is delta-DD; negative when S is not DD."""
    return float(np.min(np.abs(S.diag) - S.dout))


def s_max(S: SparseDDSystem) -> float:
    return float(np.max(np.abs(S.diag)))


def is_delta_dd(S: SparseDDSystem, delta: float) -> bool:
    return bool(np.all(np.abs(S.diag) >= delta + S.dout))


def weighted_max_degree(S: SparseDDSystem) -> float:
    return float(np.max(S.dout)) if S.n else 0.0


def fj_system(edges: Iterable[tuple], n: int, innate) -> SparseDDSystem:
    """S = I + L for an undirected weighted graph, b = innate opinions.

    ``edges`` holds (u, v) or (u, v, w) tuples, each undirected edge once.
    Neighbors of u are stored in the order their edges appear.
    """
    innate = np.asarray(innate, dtype=float)
    if innate.shape != (n,):
        raise DimensionMismatch(f"{innate.size} opinions for {n} vertices")
    if np.any((innate < 0.0) | (innate > 1.0)) or np.any(np.isnan(innate)):
        raise OpinionOutOfRange("innate opinions must lie in [0, 1]")
    rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    seen = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) > 2 else 1.0
        if not w > 0.0:
            raise NegativeWeight(f"edge ({u}, {v}) has weight {w}")
        if u == v:
            raise SelfLoop(f"self loop at {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise IndexOutOfRange(f"edge ({u}, {v}) outside [0, {n})")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEntry(f"edge {key} given twice")
        seen.add(key)
        rows[u].append((v, w))
        rows[v].append((u, w))
    return laplacian_system(rows, innate)


def laplacian_system(adjacency: Sequence[Sequence[tuple[int, float]]], b) -> SparseDDSystem:
    """S = I + L from per-vertex lists of (neighbor, positive weight).

    The lists are taken as given (no symmetry or duplicate checks) and fix
    the neighbor order of every row.
    """
    n = len(adjacency)
    rows = [[(int(v), -float(w)) for v, w in adj] for adj in adjacency]
    S = _from_rows(n, np.zeros(n), rows, np.asarray(b, dtype=float))
    # diag computed from the cached dout so that |diag| - dout == 1 holds exactly
    return replace(S, diag=_frozen(1.0 + S.dout))
