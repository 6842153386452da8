"""Compiled sample loops.

``walk_batch`` draws ``count`` independent samples of the recursive estimator
at vertex ``u`` one after another.  It replays the oracle semantics from
:mod:`ddwalk.oracle` on the raw tables and consumes the generator in exactly
the same order as the pure-Python path in :mod:`ddwalk.solver`: one uniform
for the termination coin, then one uniform for the neighbor draw unless the
row has a single entry.  Given the same generator state both paths return
bit-identical samples.
"""

import numpy as np
from numba import njit

OK = 0
BUDGET = 1
STEP_CAP = 2
ZERO_ROW = 3


@njit(cache=True, nogil=True)
def walk_batch(diag, dout, b, indptr, indices, weights, cumw, shift,
               u, count, rng, threshold, budget_left, max_steps,
               values, steps_out, trunc_out):
    """Run up to ``count`` walks from ``u``.

    threshold   -- truncation floor on the survival probability; < 0 disables it
    budget_left -- queries still allowed; < 0 means unlimited
    values/steps_out/trunc_out -- per-sample records, length >= count or 0

    Returns (completed, n_vertex, n_walk, total, n_truncated, max_steps_seen,
    total_steps, status).  A sample cut short by the budget is not counted.
    """
    record = values.shape[0] > 0
    used = 0
    n_vertex = 0
    n_walk = 0
    completed = 0
    n_trunc = 0
    total = 0.0
    deepest = 0
    all_steps = 0
    status = OK
    for i in range(count):
        v = u
        sign = 1.0
        p = 1.0
        depth = 0
        done = False
        value = 0.0
        cut = False
        while not done:
            # vertex query
            if budget_left >= 0 and used >= budget_left:
                status = BUDGET
                break
            used += 1
            n_vertex += 1
            d = diag[v]
            if d > 0.0:
                a = d + shift
                dsgn = 1.0
            elif d < 0.0:
                a = -d + shift
                dsgn = -1.0
            else:
                a = shift
                dsgn = 1.0
            dv = dout[v]
            if a == 0.0:
                status = ZERO_ROW
                break
            pterm = (a - dv) / a
            if rng.random() < pterm:
                value = sign * dsgn * b[v] / (a - dv)
                done = True
                break
            if threshold >= 0.0:
                p = p * (dv / a)
                if p <= threshold:
                    value = 0.0
                    cut = True
                    done = True
                    break
            if depth >= max_steps:
                status = STEP_CAP
                break
            # random walk query
            if budget_left >= 0 and used >= budget_left:
                status = BUDGET
                break
            used += 1
            n_walk += 1
            lo = indptr[v]
            hi = indptr[v + 1]
            m = hi - lo
            if m == 1:
                k = lo
            else:
                r = rng.random() * dv
                # first entry with cumw > r
                left = lo
                right = hi
                while left < right:
                    mid = (left + right) // 2
                    if cumw[mid] <= r:
                        left = mid + 1
                    else:
                        right = mid
                k = left if left < hi else hi - 1
            w = weights[k]
            if w > 0.0:
                sign = -sign * dsgn
            else:
                sign = sign * dsgn
            v = indices[k]
            depth += 1
        if not done:
            break
        if record:
            values[completed] = value
            steps_out[completed] = depth
            trunc_out[completed] = cut
        completed += 1
        total += value
        all_steps += depth
        if depth > deepest:
            deepest = depth
        if cut:
            n_trunc += 1
    return completed, n_vertex, n_walk, total, n_trunc, deepest, all_steps, status


def warmup() -> None:
    """Trigger compilation (cached on disk after the first run)."""
    z = np.zeros(1)
    zi = np.zeros(2, dtype=np.int64)
    walk_batch(np.ones(1), z, z, zi, np.zeros(0, dtype=np.int64), np.zeros(0),
               np.zeros(0), 0.0, 0, 1, np.random.default_rng(0), -1.0, -1, 10,
               np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.bool_))
