"""Self-check suites run by ``ddwalk verify``.

Each suite compares a randomized component against an exact computation.
``mutant="sign"`` feeds the samplers a copy of every system with the signs of
its off-diagonal entries flipped while the exact side keeps the original, the
kind of bug a sign-update slip would cause; the suites must notice.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .hardgen import c0, sample_mu_n, verify_gap
from .oracle import Oracle
from .reference import dense_solve, fj_fixed_point
from .solver import recursive_sample, sample_many
from .system import SparseDDSystem, fj_system, from_triplets, is_delta_dd, max_delta


class SuiteResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _flip(S: SparseDDSystem) -> SparseDDSystem:
    w = -S.weights
    w.setflags(write=False)
    return replace(S, weights=w)


def _systems():
    tri = from_triplets(3, [(0, 3), (1, 3), (2, 3)],
                        [(0, 1, -1), (1, 0, -1), (1, 2, -1), (2, 1, -1)], [1, 0, 0])
    cyc = from_triplets(3, [(0, 3), (1, -4), (2, 3)],
                        [(0, 1, 1), (1, 0, -1), (1, 2, 2), (2, 1, -1), (0, 2, -1), (2, 0, 1)],
                        [1, -2, 0.5])
    tri_fj = fj_system([(0, 1), (1, 2), (0, 2)], 3, [1.0, 0.0, 0.5])
    return {"tridiagonal": tri, "signed-cycle": cyc, "fj-triangle": tri_fj}


def _unbiasedness(rng, mutate) -> SuiteResult:
    worst, bad = 0.0, []
    N = 200_000
    for name, S in _systems().items():
        z = dense_solve(S).z
        delta = max_delta(S)
        bmax = float(np.max(np.abs(S.b)))
        for u in range(S.n):
            batch = sample_many(Oracle(mutate(S)), u, N, rng, record=False)
            dev = abs(batch.total / N - z[u]) / ((bmax / delta) / np.sqrt(N))
            worst = max(worst, dev)
            if dev > 5.0:
                bad.append(f"{name}[{u}]")
    return SuiteResult("unbiasedness", not bad,
                       f"max deviation {worst:.2f} sd" + (f"; off: {', '.join(bad)}" if bad else ""))


def _kernel_equivalence(rng, mutate) -> SuiteResult:
    S = mutate(_systems()["signed-cycle"])
    seed = int(rng.integers(2**32))
    r1, r2 = np.random.default_rng(seed), np.random.default_rng(seed)
    o1, o2 = Oracle(S), Oracle(S)
    scalar = [recursive_sample(o1, 0, r1).value for _ in range(500)]
    batch = sample_many(o2, 0, 500, r2)
    same = scalar == batch.values.tolist() and o1.ledger.snapshot() == o2.ledger.snapshot()
    return SuiteResult("kernel-equivalence", same, "500 samples bit-identical" if same else "mismatch")


def _fj_fixed_point(rng, mutate) -> SuiteResult:
    worst = 0.0
    for _ in range(5):
        n = 40
        edges = [(u, v, float(rng.uniform(0.5, 2.0)))
                 for u in range(n) for v in range(u + 1, n) if rng.random() < 0.1]
        innate = rng.random(n)
        zf = fj_fixed_point(edges, innate, tol=1e-12)
        zd = dense_solve(fj_system(edges, n, innate)).z
        worst = max(worst, float(np.max(np.abs(zf - zd))))
    return SuiteResult("fj-fixed-point", worst <= 1e-9, f"max gap {worst:.2e}")


def _hard_instance(rng, mutate) -> SuiteResult:
    h = sample_mu_n(200, 12, 4, rng, min_gamma=0.3)
    rep = verify_gap(h, 20, rng, strict=False)
    ok = is_delta_dd(h.system0, 1.0) and rep.ok
    return SuiteResult("hard-instance", ok,
                       f"min z1 {rep.min_z1:.3e} vs c0 {c0(h.d):.3e}, max |z0| {rep.max_abs_z0:.1e}")


SUITES: dict[str, Callable] = {
    "unbiasedness": _unbiasedness,
    "kernel-equivalence": _kernel_equivalence,
    "fj-fixed-point": _fj_fixed_point,
    "hard-instance": _hard_instance,
}


def run_suites(seed: int = 0, mutant: Optional[str] = None) -> list[SuiteResult]:
    if mutant not in (None, "sign"):
        raise ValueError(f"unknown mutant {mutant!r}")
    mutate = _flip if mutant == "sign" else (lambda S: S)
    out = []
    for i, (name, fn) in enumerate(SUITES.items()):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        try:
            out.append(fn(rng, mutate))
        except Exception as e:  # a crash is a failed suite, not a crashed verifier
            out.append(SuiteResult(name, False, f"{type(e).__name__}: {e}"))
    return out
