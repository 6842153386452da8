"""Hard instances for single-coordinate estimation and the experiments run on them.

An instance has two k-vertex d-regular expanders G' and B, joined by a single
edge between planted vertices w_G' and w_B, plus n - 2k isolated vertices.
Every edge has weight k and S = I + L.  The two right-hand sides are b0 = 0
and b1 = indicator of B.  For u in G' the solution is exactly 0 under b0 and
at least c0(d) under b1, so reading z*_u to accuracy c0/4 tells the two
apart; an algorithm that never walks across the planted edge cannot.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import networkx as nx
import numpy as np

from .errors import ExpanderNotFound, GapViolation, InvalidParameters
from .oracle import Oracle
from .reference import dense_solve
from .solver import estimate_entry
from .system import SparseDDSystem, laplacian_system

DEFAULT_MIN_GAMMA = 2.0 / 3.0

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def spectral_expansion(edges, k: int) -> float:
    """min(lambda_2, 2 - lambda_k) of the normalized Laplacian of a graph on k vertices."""
    g = nx.Graph()
    g.add_nodes_from(range(k))
    g.add_edges_from(edges)
    lam = np.linalg.eigvalsh(nx.normalized_laplacian_matrix(g, nodelist=range(k)).toarray())
    return float(min(lam[1], 2.0 - lam[-1]))


def random_regular_expander(k: int, d: int, rng: np.random.Generator,
                            max_attempts: int = 50,
                            min_gamma: float = DEFAULT_MIN_GAMMA):
    """A connected simple d-regular graph on k vertices with expansion > min_gamma.

    Returns (sorted edge list, gamma).
    """
    if d < 3:
        raise InvalidParameters(f"d must be at least 3, got {d}")
    if k <= d:
        raise InvalidParameters(f"need k > d, got k={k}, d={d}")
    if (k * d) % 2:
        raise InvalidParameters(f"k*d must be even, got k={k}, d={d}")
    best = -math.inf
    for _ in range(max_attempts):
        g = nx.random_regular_graph(d, k, seed=int(rng.integers(2**32)))
        if not nx.is_connected(g):
            continue
        edges = sorted((min(a, b), max(a, b)) for a, b in g.edges())
        gamma = spectral_expansion(edges, k)
        if gamma > min_gamma:
            return edges, gamma
        best = max(best, gamma)
    raise ExpanderNotFound(f"no {d}-regular graph on {k} vertices with expansion > "
                           f"{min_gamma:.4f} in {max_attempts} attempts (best {best:.4f})")


@dataclass(frozen=True, eq=False)
class HardInstance:
    """One draw of the hard distribution, in its relabeled form.

    ``labels[i]`` is the public label of internal vertex i, where internal
    vertices 0..k-1 form G', k..2k-1 form B and the rest are isolated.
    ``gprime`` and ``bside`` list the public labels of the two halves.
    """

    system0: SparseDDSystem
    system1: SparseDDSystem
    labels: np.ndarray
    w_gprime: int
    w_b: int
    k: int
    d: int
    gamma: float
    gamma_gprime: float
    gamma_b: float
    gprime: np.ndarray
    bside: np.ndarray
    edges: list

    @property
    def n(self) -> int:
        return self.system0.n

    def system(self, family: int) -> SparseDDSystem:
        return self.system1 if family else self.system0


def sample_mu_n(n: int, k: int, d: int, rng: np.random.Generator,
                min_gamma: float = DEFAULT_MIN_GAMMA, max_attempts: int = 50) -> HardInstance:
    if n < 2 * k:
        raise InvalidParameters(f"need n >= 2k, got n={n}, k={k}")
    g_edges, gamma_g = random_regular_expander(k, d, rng, max_attempts, min_gamma)
    b_edges, gamma_b = random_regular_expander(k, d, rng, max_attempts, min_gamma)
    wg = int(rng.integers(k))
    wb = k + int(rng.integers(k))
    internal = list(g_edges) + [(u + k, v + k) for u, v in b_edges] + [(wg, wb)]

    labels = rng.permutation(n)
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    edges = []
    for u, v in internal:
        lu, lv = int(labels[u]), int(labels[v])
        adjacency[lu].append((lv, float(k)))
        adjacency[lv].append((lu, float(k)))
        edges.append((lu, lv, float(k)))
    # each vertex presents its neighbors in an independent uniform order
    for lst in adjacency:
        if len(lst) > 1:
            order = rng.permutation(len(lst))
            lst[:] = [lst[i] for i in order]

    b1 = np.zeros(n)
    bside = labels[k:2 * k].copy()
    b1[bside] = 1.0
    system1 = laplacian_system(adjacency, b1)
    system0 = system1.with_rhs(np.zeros(n))
    return HardInstance(system0, system1, labels, int(labels[wg]), int(labels[wb]), k, d,
                        min(gamma_g, gamma_b), gamma_g, gamma_b, labels[:k].copy(), bside,
                        edges)


def c0(d: float) -> float:
    """(1 - exp(-1/(20 d))) / (12 (d + 2))."""
    if d < 1:
        raise InvalidParameters(f"d must be at least 1, got {d}")
    return -math.expm1(-1.0 / (20.0 * d)) / (12.0 * (d + 2))


class GapReport(NamedTuple):
    vertices: np.ndarray
    z0: np.ndarray
    z1: np.ndarray
    min_z1: float
    max_abs_z0: float
    c0: float

    @property
    def ok(self) -> bool:
        return self.max_abs_z0 == 0.0 and self.min_z1 >= self.c0


def component_solutions(h: HardInstance):
    """Exact solutions under b0 and b1 on the connected 2k-vertex part.

    Returns (labels of the component, z0, z1) in matching order.
    """
    comp = np.concatenate([h.gprime, h.bside])
    A = h.system0.to_dense()[np.ix_(comp, comp)]
    z0 = dense_solve(A, h.system0.b[comp]).z
    z1 = dense_solve(A, h.system1.b[comp]).z
    return comp, z0, z1


def verify_gap(h: HardInstance, trials: int, rng: np.random.Generator,
               strict: bool = True) -> GapReport:
    """Exact check of the solution gap at ``trials`` random vertices of G'.

    With ``strict`` a violation raises GapViolation; otherwise it is only
    visible through ``report.ok``.
    """
    comp, z0, z1 = component_solutions(h)
    pos = {int(v): i for i, v in enumerate(comp)}
    us = rng.choice(h.gprime, size=trials, replace=True)
    a0 = np.array([z0[pos[int(u)]] for u in us])
    a1 = np.array([z1[pos[int(u)]] for u in us])
    rep = GapReport(us, a0, a1, float(a1.min()), float(np.abs(a0).max()), c0(h.d))
    if strict and not rep.ok:
        raise GapViolation(f"min z1 = {rep.min_z1:.3e} vs c0 = {rep.c0:.3e}, "
                           f"max |z0| = {rep.max_abs_z0:.3e}")
    return rep


class DistinguishResult(NamedTuple):
    success_rate_0: float
    success_rate_1: float
    mean_queries: float
    trials: int
    guesses: int


def _seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(2**63)))
    return np.random.SeedSequence(seed)


def distinguish_trial(n: int, k: int, d: int, budget: int, ss: np.random.SeedSequence,
                      eps: Optional[float] = None, min_gamma: float = DEFAULT_MIN_GAMMA):
    """One trial: returns (correct0, correct1, queries0, queries1, guessed)."""
    rng = np.random.default_rng(ss)
    h = sample_mu_n(n, k, d, rng, min_gamma=min_gamma)
    u = int(rng.choice(h.gprime))
    gap = c0(d)
    eps = gap / 4.0 if eps is None else eps
    correct, queries, guessed = [], [], 0
    for family in (0, 1):
        o = Oracle(h.system(family), budget=budget)
        rep = estimate_entry(o, u, 1.0, eps, 1.0, "worstcase", rng)
        if rep.samples == 0:
            # nothing observed: answer with a fair coin
            yes = bool(rng.random() < 0.5)
            guessed += 1
        else:
            yes = rep.estimate < gap / 2.0
        correct.append(yes if family == 0 else not yes)
        queries.append(o.ledger.total())
        assert o.ledger.total() <= budget
    return correct[0], correct[1], queries[0], queries[1], guessed


def distinguish_experiment(n: int, k: int, d: int, budget: int, trials: int,
                           rng: SeedLike = None, eps: Optional[float] = None,
                           min_gamma: float = DEFAULT_MIN_GAMMA,
                           threads: int = 1) -> DistinguishResult:
    """Classification accuracy of the budgeted estimator on both families.

    Each trial draws a fresh instance and a uniform u in G', estimates z*_u
    with eps = c0(d)/4 through an oracle capped at ``budget`` queries, and
    answers "b = 0" iff the estimate is below c0(d)/2.  Trial i uses the i-th
    child of the seed sequence, so results do not depend on ``threads``.
    """
    if budget < 1:
        raise InvalidParameters("budget must be at least 1")
    if trials < 1:
        raise InvalidParameters("trials must be at least 1")
    children = _seed_sequence(rng).spawn(trials)

    def run(ss):
        return distinguish_trial(n, k, d, budget, ss, eps, min_gamma)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            out = list(ex.map(run, children))
    else:
        out = [run(ss) for ss in children]
    acc0 = sum(o[0] for o in out) / trials
    acc1 = sum(o[1] for o in out) / trials
    mq = sum(o[2] + o[3] for o in out) / (2 * trials)
    return DistinguishResult(acc0, acc1, mq, trials, sum(o[4] for o in out))
