"""Randomized estimators for a single coordinate z*_u of S z = b.

Writing the row u of S z* = b as

    z*_u = P(u,u) * sgn(S_uu) b_u / (|S_uu| - d_out(u))
           + sum_{v != u} P(u,v) * sgn(-S_uu S_uv) z*_v,

with P(u,u) = (|S_uu| - d_out(u)) / |S_uu| and P(u,v) = |S_uv| / |S_uu|, gives a
random walk whose stopping value is an unbiased sample of z*_u.  The walk is
run iteratively with a running sign.  ``estimate_entry`` averages
t = ceil(6 bmax^2 / (delta^2 eps^2)) such samples; the worst-case variant also
stops any walk whose survival probability has fallen to 1/(6t) or below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional

import numpy as np

from . import _kernels
from .errors import InvalidParameters, NonTerminatingRisk
from .oracle import LedgerSnapshot, Oracle, draw_neighbor, shifted_oracle

Mode = Literal["expected", "worstcase"]

# hard cap on the length of a single walk; only reachable on systems that are
# not strictly DD, where untruncated walks need not halt
DEFAULT_MAX_STEPS = 10**8


@dataclass(frozen=True)
class WalkSample:
    value: float
    steps: int
    truncated: bool = False


@dataclass(frozen=True)
class EstimateReport:
    """Result of one coordinate estimate.

    ``samples`` counts completed walks.  When the oracle budget ran out before
    ``requested_samples`` walks finished, ``exhausted`` is set and the estimate
    is the mean of the completed ones (NaN if none completed).
    """

    estimate: float
    samples: int
    requested_samples: int
    truncation_threshold: Optional[float]
    queries: LedgerSnapshot
    delta: float
    eps: float
    bmax: float
    mode: str
    exhausted: bool = False
    truncated_samples: int = 0
    max_steps: int = 0
    mean_steps: float = 0.0


class SampleBatch(NamedTuple):
    values: np.ndarray
    steps: np.ndarray
    truncated: np.ndarray
    total: float
    completed: int
    n_truncated: int
    max_steps: int
    total_steps: int
    exhausted: bool


def sample_count(delta: float, eps: float, bmax: float) -> int:
    """t = ceil(6 bmax^2 / (delta^2 eps^2)), at least 1."""
    _check_params(delta, eps, bmax)
    t = 6.0 * bmax * bmax / (delta * delta * eps * eps)
    return max(1, math.ceil(t))


def truncation_threshold(t_prime: float) -> float:
    return 1.0 / (6.0 * t_prime)


def depth_bound(smax: float, delta: float, t_prime: float) -> int:
    """Walk length after which the survival probability is at most 1/(6 t')."""
    return math.ceil((smax / delta) * math.log(6.0 * t_prime))


def boost_count(fail_prob: float) -> int:
    if not 0.0 < fail_prob < 1.0:
        raise InvalidParameters(f"fail_prob must lie in (0, 1), got {fail_prob}")
    return max(1, math.ceil(24.0 * math.log(1.0 / fail_prob)))


def _check_params(delta: float, eps: float, bmax: float) -> None:
    if not delta > 0:
        raise InvalidParameters(f"delta must be positive, got {delta}")
    if not eps > 0:
        raise InvalidParameters(f"eps must be positive, got {eps}")
    if not bmax >= 0:
        raise InvalidParameters(f"bmax must be non-negative, got {bmax}")


def _sgn(x: float) -> float:
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


def _walk(o: Oracle, u: int, rng: np.random.Generator, threshold: Optional[float],
          max_steps: int) -> WalkSample:
    sign = 1.0
    p = 1.0
    v = u
    depth = 0
    while True:
        _, d_out, s_vv, b_v = o.vertex_query(v)
        a = abs(s_vv)
        if a == 0.0:
            raise NonTerminatingRisk(f"zero row at vertex {v}: system is singular")
        if rng.random() < (a - d_out) / a:
            return WalkSample(sign * _sgn(s_vv) * b_v / (a - d_out), depth)
        if threshold is not None:
            p = p * (d_out / a)
            if p <= threshold:
                return WalkSample(0.0, depth, True)
        if depth >= max_steps:
            raise NonTerminatingRisk(f"walk from {u} exceeded {max_steps} steps")
        ans = o.random_walk_query(v, rng)
        if ans is None:
            raise NonTerminatingRisk(f"walk query at {v} returned bottom")
        sign = sign * _sgn(-s_vv * ans.s_uv)
        v = ans.v
        depth += 1


def recursive_sample(o: Oracle, u: int, rng: np.random.Generator,
                     delta: Optional[float] = None,
                     max_steps: int = DEFAULT_MAX_STEPS) -> WalkSample:
    """One unbiased sample of z*_u (unbounded walk length).

    ``delta`` is an optional hint; a non-positive value is rejected because the
    walk is then not guaranteed to stop.
    """
    if delta is not None and not delta > 0:
        raise NonTerminatingRisk(f"delta = {delta}: the walk may never terminate")
    return _walk(o, u, rng, None, max_steps)


def truncated_sample(o: Oracle, u: int, t_prime: float, rng: np.random.Generator,
                     max_steps: int = DEFAULT_MAX_STEPS) -> WalkSample:
    """Like :func:`recursive_sample` but returns 0 once the survival
    probability drops to 1/(6 t') or below."""
    if not t_prime > 0:
        raise InvalidParameters(f"t_prime must be positive, got {t_prime}")
    return _walk(o, u, rng, truncation_threshold(t_prime), max_steps)


def sample_many(o: Oracle, u: int, count: int, rng: np.random.Generator,
                t_prime: Optional[float] = None, record: bool = True,
                max_steps: int = DEFAULT_MAX_STEPS) -> SampleBatch:
    """``count`` consecutive samples through the compiled kernel.

    Equivalent, draw for draw, to calling :func:`recursive_sample` (or
    :func:`truncated_sample` when ``t_prime`` is given) ``count`` times with the
    same generator.  Queries are charged to the oracle's ledger; if its budget
    runs out the batch stops and the partially run walk is discarded.
    """
    o._check_vertex(u)
    tabs = o.tables()
    remaining = o.ledger.remaining()
    threshold = -1.0 if t_prime is None else truncation_threshold(t_prime)
    size = count if record else 0
    values = np.zeros(size)
    steps = np.zeros(size, dtype=np.int64)
    trunc = np.zeros(size, dtype=np.bool_)
    (completed, nv, nw, total, ntr, deepest, all_steps, status) = _kernels.walk_batch(
        tabs.diag, tabs.dout, tabs.b, tabs.indptr, tabs.indices, tabs.weights, tabs.cumw,
        float(tabs.shift), int(u), int(count), rng, float(threshold),
        -1 if remaining is None else int(remaining), int(max_steps), values, steps, trunc)
    o.ledger.charge(vertex=nv, walk=nw)
    if status == _kernels.ZERO_ROW:
        raise NonTerminatingRisk("walk reached a zero row: system is singular")
    if status == _kernels.STEP_CAP:
        raise NonTerminatingRisk(f"walk from {u} exceeded {max_steps} steps")
    if record:
        values, steps, trunc = values[:completed], steps[:completed], trunc[:completed]
    return SampleBatch(values, steps, trunc, float(total), int(completed), int(ntr),
                       int(deepest), int(all_steps), status == _kernels.BUDGET)


def estimate_entry(o: Oracle, u: int, delta: float, eps: float, bmax: float,
                   mode: Mode = "expected", rng: Optional[np.random.Generator] = None
                   ) -> EstimateReport:
    """Average of t = ceil(6 bmax^2/(delta^2 eps^2)) walk samples.

    ``mode="expected"`` uses untruncated walks (bounded expected cost);
    ``mode="worstcase"`` truncates at survival probability 1/(6t), which
    bounds every walk by ceil((S_max/delta) ln(6t)) steps.
    """
    if mode not in ("expected", "worstcase"):
        raise InvalidParameters(f"unknown mode {mode!r}")
    t = sample_count(delta, eps, bmax)
    if rng is None:
        rng = np.random.default_rng()
    t_prime = float(t) if mode == "worstcase" else None
    before = o.ledger.snapshot()
    batch = sample_many(o, u, t, rng, t_prime=t_prime, record=False)
    after = o.ledger.snapshot()
    used = LedgerSnapshot(after.vertex - before.vertex, after.neighbor - before.neighbor,
                          after.walk - before.walk)
    est = batch.total / batch.completed if batch.completed else float("nan")
    return EstimateReport(
        estimate=est, samples=batch.completed, requested_samples=t,
        truncation_threshold=None if t_prime is None else truncation_threshold(t_prime),
        queries=used, delta=delta, eps=eps, bmax=bmax, mode=mode,
        exhausted=batch.exhausted, truncated_samples=batch.n_truncated,
        max_steps=batch.max_steps,
        mean_steps=batch.total_steps / batch.completed if batch.completed else 0.0)


def estimate_entry_boosted(o: Oracle, u: int, delta: float, eps: float, bmax: float,
                           mode: Mode = "expected", fail_prob: float = 1 / 3,
                           rng: Optional[np.random.Generator] = None) -> EstimateReport:
    """Median of m = ceil(24 ln(1/fail_prob)) independent estimates (lower
    median for even m)."""
    m = boost_count(fail_prob)
    _check_params(delta, eps, bmax)
    if rng is None:
        rng = np.random.default_rng()
    before = o.ledger.snapshot()
    reports = [estimate_entry(o, u, delta, eps, bmax, mode, rng) for _ in range(m)]
    after = o.ledger.snapshot()
    ordered = sorted(reports, key=lambda r: r.estimate)
    pick = ordered[(m - 1) // 2]
    used = LedgerSnapshot(after.vertex - before.vertex, after.neighbor - before.neighbor,
                          after.walk - before.walk)
    return EstimateReport(
        estimate=pick.estimate, samples=sum(r.samples for r in reports),
        requested_samples=sum(r.requested_samples for r in reports),
        truncation_threshold=pick.truncation_threshold, queries=used,
        delta=delta, eps=eps, bmax=bmax, mode=mode,
        exhausted=any(r.exhausted for r in reports),
        truncated_samples=sum(r.truncated_samples for r in reports),
        max_steps=max(r.max_steps for r in reports),
        mean_steps=float(np.mean([r.mean_steps for r in reports])))


def relative_eps(eps: float, bmax: float, smax: float) -> float:
    return eps * bmax / (2.0 * smax)


def _zero_report(delta, eps, bmax, mode) -> EstimateReport:
    return EstimateReport(0.0, 0, 0, None, LedgerSnapshot(0, 0, 0), delta, eps, bmax, mode)


def estimate_entry_relative(o: Oracle, u: int, delta: float, eps: float, bmax: float,
                            smax: float, mode: Mode = "worstcase",
                            rng: Optional[np.random.Generator] = None) -> EstimateReport:
    """Error eps * ||z*||_inf, via the additive estimator at eps*bmax/(2 smax).

    With bmax = 0 the solution is 0 and no query is made.
    """
    _check_params(delta, eps, bmax)
    if not smax > 0:
        raise InvalidParameters(f"smax must be positive, got {smax}")
    if bmax == 0:
        return _zero_report(delta, eps, bmax, mode)
    return estimate_entry(o, u, delta, relative_eps(eps, bmax, smax), bmax, mode, rng)


def shift_sigma(smax: float, eps: float, kappa_inf: float) -> float:
    """sigma = S_max / ((2/eps + 1) kappa_inf)."""
    return smax / ((2.0 / eps + 1.0) * kappa_inf)


def estimate_entry_nonstrict(o: Oracle, u: int, kappa_inf: float, eps: float, bmax: float,
                             smax: float, rng: Optional[np.random.Generator] = None,
                             mode: Mode = "worstcase") -> EstimateReport:
    """Estimator for non-strictly DD systems (non-singular, or symmetric with a
    constant-sign nonzero diagonal and b in the range of S).

    Solves the shifted system S + sigma I' with relative error eps/10; the
    returned report carries delta = sigma.
    """
    if not kappa_inf >= 1:
        raise InvalidParameters(f"kappa_inf must be >= 1, got {kappa_inf}")
    if not eps > 0:
        raise InvalidParameters(f"eps must be positive, got {eps}")
    if not smax > 0:
        raise InvalidParameters(f"smax must be positive, got {smax}")
    if not bmax >= 0:
        raise InvalidParameters(f"bmax must be non-negative, got {bmax}")
    sigma = shift_sigma(smax, eps, kappa_inf)
    if bmax == 0:
        return _zero_report(sigma, eps / 10.0, bmax, mode)
    return estimate_entry_relative(shifted_oracle(o, sigma), u, sigma, eps / 10.0, bmax,
                                   smax + sigma, mode, rng)


def estimate_fj_opinion(o: Oracle, u: int, eps: float,
                        rng: Optional[np.random.Generator] = None) -> EstimateReport:
    """Opinion z*_u for S = I + L, b in [0,1]^n: delta = 1, bmax = 1."""
    return estimate_entry(o, u, 1.0, eps, 1.0, "worstcase", rng)
