"""Query access to (S, b) with per-type accounting and an optional budget.

Three query types, each at unit cost:

* vertex query   -> (delta_out, d_out, S_uu, b_u)
* neighbor query -> the i-th out-neighbor of u (1-indexed, construction order)
* walk query     -> a random out-neighbor v drawn with prob. |S_uv| / d_out(u),
                    together with S_uv, or ``None`` (the bottom symbol) when u
                    has no out-neighbors.

The compiled walk kernels in :mod:`ddwalk._kernels` do not call these methods
one by one; they read :meth:`Oracle.tables`, reproduce the exact same answers
(and the same random draws), and book their query counts back through
:meth:`QueryLedger.charge`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import BudgetExhausted, IndexOutOfRange, NonPositiveSigma
from .system import SparseDDSystem


@dataclass(frozen=True)
class LedgerSnapshot:
    vertex: int
    neighbor: int
    walk: int

    @property
    def total(self) -> int:
        return self.vertex + self.neighbor + self.walk


class QueryLedger:
    """Thread-safe query counters with an optional hard budget on the total."""

    def __init__(self, budget: Optional[int] = None):
        if budget is not None and budget < 0:
            raise ValueError("budget must be non-negative")
        self.budget = budget
        self.vertex_queries = 0
        self.neighbor_queries = 0
        self.walk_queries = 0
        self._lock = threading.Lock()

    def total(self) -> int:
        return self.vertex_queries + self.neighbor_queries + self.walk_queries

    def remaining(self) -> Optional[int]:
        if self.budget is None:
            return None
        return self.budget - self.total()

    def charge(self, vertex: int = 0, neighbor: int = 0, walk: int = 0) -> None:
        """Book queries; all-or-nothing against the budget."""
        with self._lock:
            if self.budget is not None and self.total() + vertex + neighbor + walk > self.budget:
                raise BudgetExhausted(f"query budget {self.budget} exhausted")
            self.vertex_queries += vertex
            self.neighbor_queries += neighbor
            self.walk_queries += walk

    def snapshot(self) -> LedgerSnapshot:
        with self._lock:
            return LedgerSnapshot(self.vertex_queries, self.neighbor_queries, self.walk_queries)

    def merge(self, other: "QueryLedger") -> None:
        """Fold a per-worker sub-ledger into this one (budget is not re-checked)."""
        snap = other.snapshot()
        with self._lock:
            self.vertex_queries += snap.vertex
            self.neighbor_queries += snap.neighbor
            self.walk_queries += snap.walk

    def __repr__(self) -> str:
        return (f"QueryLedger(vertex={self.vertex_queries}, neighbor={self.neighbor_queries}, "
                f"walk={self.walk_queries}, budget={self.budget})")


class VertexAnswer(NamedTuple):
    delta_out: int
    d_out: float
    s_uu: float
    b_u: float


class WalkAnswer(NamedTuple):
    v: int
    s_uv: float


class WalkTables(NamedTuple):
    """Raw arrays behind an oracle, as consumed by the compiled kernels.

    ``shift`` is added to |S_uu| (keeping the sign of S_uu, or +shift when
    S_uu = 0), which is how the shifted oracle rewrites vertex answers.
    """

    diag: np.ndarray
    dout: np.ndarray
    b: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    cumw: np.ndarray
    shift: float


def draw_neighbor(cumw_row: np.ndarray, d_out: float, rng: np.random.Generator) -> int:
    """Index into a row, chosen with probability proportional to |weight|.

    A single-entry row is answered without consuming randomness.
    """
    m = cumw_row.shape[0]
    if m == 1:
        return 0
    r = rng.random() * d_out
    k = int(np.searchsorted(cumw_row, r, side="right"))
    return k if k < m else m - 1


class Oracle:
    """The (S, b)-oracle over a :class:`SparseDDSystem`."""

    def __init__(self, system: SparseDDSystem, budget: Optional[int] = None,
                 ledger: Optional[QueryLedger] = None):
        self.system = system
        if ledger is None:
            ledger = QueryLedger(budget)
        elif budget is not None:
            raise ValueError("pass either a ledger or a budget, not both")
        self.ledger = ledger

    @property
    def n(self) -> int:
        return self.system.n

    def _check_vertex(self, u: int) -> None:
        if not 0 <= u < self.system.n:
            raise IndexOutOfRange(f"vertex {u} outside [0, {self.system.n})")

    def vertex_query(self, u: int) -> VertexAnswer:
        self._check_vertex(u)
        self.ledger.charge(vertex=1)
        S = self.system
        return VertexAnswer(S.degree(u), float(S.dout[u]), float(S.diag[u]), float(S.b[u]))

    def neighbor_query(self, u: int, i: int) -> int:
        self._check_vertex(u)
        deg = self.system.degree(u)
        if not 1 <= i <= deg:
            raise IndexOutOfRange(f"neighbor index {i} outside [1, {deg}] at vertex {u}")
        self.ledger.charge(neighbor=1)
        return int(self.system.indices[self.system.indptr[u] + i - 1])

    def random_walk_query(self, u: int, rng: np.random.Generator) -> Optional[WalkAnswer]:
        # a query on an isolated vertex still costs one unit
        self._check_vertex(u)
        self.ledger.charge(walk=1)
        S = self.system
        lo, hi = S.indptr[u], S.indptr[u + 1]
        if hi == lo:
            return None
        k = lo + draw_neighbor(S.cumw[lo:hi], S.dout[u], rng)
        return WalkAnswer(int(S.indices[k]), float(S.weights[k]))

    def walk_probabilities(self, u: int) -> dict[int, float]:
        """Exact distribution of the walk query at u, read off the sampling table."""
        S = self.system
        cum = S.row_cumw(u)
        if cum.size == 0:
            return {}
        masses = np.diff(np.concatenate(([0.0], cum))) / S.dout[u]
        nbrs = S.indices[S.indptr[u]:S.indptr[u + 1]]
        return {int(v): float(p) for v, p in zip(nbrs, masses)}

    def tables(self) -> WalkTables:
        S = self.system
        return WalkTables(S.diag, S.dout, S.b, S.indptr, S.indices, S.weights, S.cumw, 0.0)

    def shifted(self, sigma: float) -> "ShiftedOracle":
        return shifted_oracle(self, sigma)


def shift_diagonal(s_uu: float, sigma: float) -> float:
    """S_uu + sigma * sgn(S_uu), or sigma when S_uu = 0."""
    if s_uu > 0:
        return s_uu + sigma
    if s_uu < 0:
        return s_uu - sigma
    return sigma


class ShiftedOracle(Oracle):
    """Oracle for S + sigma * I', I' = diag(sgn(S_uu)) with sgn(0) taken as +1.

    Only the S_uu field of vertex answers changes; d_out, neighbor and walk
    answers come from the wrapped oracle, and queries count against its ledger.
    """

    def __init__(self, inner: Oracle, sigma: float):
        if not sigma > 0:
            raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
        super().__init__(inner.system, ledger=inner.ledger)
        self.inner = inner
        self.sigma = float(sigma)

    def vertex_query(self, u: int) -> VertexAnswer:
        ans = self.inner.vertex_query(u)
        return ans._replace(s_uu=shift_diagonal(ans.s_uu, self.sigma))

    def neighbor_query(self, u: int, i: int) -> int:
        return self.inner.neighbor_query(u, i)

    def random_walk_query(self, u: int, rng: np.random.Generator) -> Optional[WalkAnswer]:
        return self.inner.random_walk_query(u, rng)

    def tables(self) -> WalkTables:
        t = self.inner.tables()
        return t._replace(shift=t.shift + self.sigma)


def shifted_oracle(o: Oracle, sigma: float) -> ShiftedOracle:
    return ShiftedOracle(o, sigma)
