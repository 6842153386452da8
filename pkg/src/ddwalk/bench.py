"""Error-versus-budget sweeps and the lower-bound sweep, with CSV output."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParams, TooLargeForGroundTruth
from .hardgen import DEFAULT_MIN_GAMMA, distinguish_experiment
from .oracle import Oracle
from .reference import DENSE_LIMIT, fj_fixed_point
from .solver import estimate_entry
from .system import SparseDDSystem, fj_system

BENCH_HEADER = ["budget", "abs_err_mean", "abs_err_p90", "trials", "mean_queries", "wall_ms"]
LB_HEADER = ["budget", "acc_family0", "acc_family1", "mean_queries"]
DEFAULT_BUDGETS = (5000, 10000, 20000, 40000, 80000)


@dataclass(frozen=True)
class SweepRow:
    budget: int
    abs_err_mean: float
    abs_err_p90: float
    trials: int
    mean_queries: float
    wall_ms: float
    cut_walks: int = 0

    def csv_fields(self):
        return [self.budget, _fmt(self.abs_err_mean), _fmt(self.abs_err_p90), self.trials,
                _fmt(self.mean_queries), _fmt(self.wall_ms)]


@dataclass(frozen=True)
class LbRow:
    budget: int
    acc_family0: float
    acc_family1: float
    mean_queries: float

    def csv_fields(self):
        return [self.budget, _fmt(self.acc_family0), _fmt(self.acc_family1),
                _fmt(self.mean_queries)]


def _fmt(x: float) -> str:
    return "nan" if x != x else f"{x:.10g}"


def to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def fj_ground_truth(edges, innate, tol: float = 1e-10) -> np.ndarray:
    n = len(innate)
    if n > DENSE_LIMIT:
        raise TooLargeForGroundTruth(f"n = {n} is above the ground-truth limit {DENSE_LIMIT}")
    return fj_fixed_point(edges, innate, tol=tol)


def _one(S: SparseDDSystem, u: int, budget: int, eps: float, ss: np.random.SeedSequence):
    o = Oracle(S, budget=budget)
    rep = estimate_entry(o, u, 1.0, eps, 1.0, "worstcase", np.random.default_rng(ss))
    return rep.estimate, o.ledger.total(), rep.exhausted


def run_bench(edges, innate, vertices: int, budgets: Sequence[int] = DEFAULT_BUDGETS,
              seed: int = 0, eps: float = 0.01, threads: int = 1, timing: bool = False,
              truth: Optional[np.ndarray] = None) -> list[SweepRow]:
    """For each budget, estimate ``vertices`` FJ opinions (vertices drawn with
    replacement) through budget-capped oracles and summarize the absolute error.

    A cut estimate averages the walks that finished before the budget ran
    out; the walk in flight at that moment is dropped.  The estimate for
    vertex i under budget j uses seed sequence (seed, j, i), so rows do not
    depend on ``threads``.  ``wall_ms`` is NaN unless ``timing`` is set, which
    keeps the output byte-for-byte reproducible.
    """
    if vertices < 1:
        raise InvalidParams("at least one vertex is required")
    if not budgets:
        raise InvalidParams("no budgets given")
    innate = np.asarray(innate, dtype=float)
    n = innate.size
    if truth is None:
        truth = fj_ground_truth(edges, innate)
    S = fj_system(edges, n, innate)
    us = np.random.default_rng(np.random.SeedSequence(seed)).integers(0, n, size=vertices)
    rows = []
    with ThreadPoolExecutor(max(1, threads)) as ex:
        for j, budget in enumerate(budgets):
            if budget < 1:
                raise InvalidParams(f"budget must be positive, got {budget}")
            seqs = [np.random.SeedSequence(seed, spawn_key=(j, i)) for i in range(vertices)]
            t0 = time.perf_counter()
            out = list(ex.map(lambda a: _one(S, int(a[0]), int(budget), eps, a[1]),
                              zip(us, seqs)))
            wall = (time.perf_counter() - t0) * 1000.0
            est = np.array([o[0] for o in out])
            # a budget too small for a single walk leaves no sample; count it as estimate 0
            est = np.where(np.isnan(est), 0.0, est)
            err = np.abs(est - truth[us])
            rows.append(SweepRow(int(budget), float(err.mean()), float(np.quantile(err, 0.9)),
                                 vertices, float(np.mean([o[1] for o in out])),
                                 wall if timing else float("nan"),
                                 int(sum(o[2] for o in out))))
    return rows


def run_lb(n: int, k: int, d: int, budgets: Sequence[int], trials: int, seed: int = 0,
           threads: int = 1, min_gamma: float = DEFAULT_MIN_GAMMA,
           eps: Optional[float] = None) -> list[LbRow]:
    rows = []
    for j, budget in enumerate(budgets):
        res = distinguish_experiment(n, k, d, int(budget), trials,
                                     np.random.SeedSequence(seed, spawn_key=(j,)),
                                     eps=eps, min_gamma=min_gamma, threads=threads)
        rows.append(LbRow(int(budget), res.success_rate_0, res.success_rate_1, res.mean_queries))
    return rows
