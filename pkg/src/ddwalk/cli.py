"""``ddwalk`` command line.

Exit codes: 0 ok, 1 verification failure, 2 parse or parameter error,
3 model violation (system not strictly diagonally dominant).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import networkx as nx
import numpy as np

from . import bench, io as dio
from .errors import (DDWalkError, InvalidParams, NotStrictlyDD, ParseError,
                     TooLargeForGroundTruth)
from .hardgen import DEFAULT_MIN_GAMMA, sample_mu_n
from .oracle import Oracle
from .solver import (estimate_entry, estimate_entry_nonstrict, estimate_fj_opinion)
from .system import fj_system, max_delta, s_max, weighted_max_degree
from .verify import run_suites

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_MODEL = 0, 1, 2, 3


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated integer list: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddwalk", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a synthetic graph (edge list and opinions)")
    g.add_argument("kind", choices=["regular", "er", "fj-random", "hard"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, default=4)
    g.add_argument("--p", type=float, default=0.1)
    g.add_argument("--k", type=int, default=30)
    g.add_argument("--family", type=int, choices=[0, 1], default=1)
    g.add_argument("--min-gamma", type=float, default=DEFAULT_MIN_GAMMA)
    g.add_argument("--out", required=True,
                   help="output prefix: writes PREFIX.edges and PREFIX.opinions "
                        "(PREFIX.mtx for 'hard')")
    _common(g)

    s = sub.add_parser("solve", help="estimate one coordinate of S z = b")
    s.add_argument("matrix")
    s.add_argument("--u", type=int, required=True)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--delta", type=float)
    s.add_argument("--kappa", type=float)
    s.add_argument("--mode", choices=["expected", "worstcase"], default="worstcase")
    _common(s)

    f = sub.add_parser("fj", help="estimate one equilibrium opinion")
    f.add_argument("edges")
    f.add_argument("opinions")
    f.add_argument("--u", type=int, required=True)
    f.add_argument("--eps", type=float, default=0.05)
    _common(f)

    b = sub.add_parser("bench", help="absolute error against query budget")
    b.add_argument("edges")
    b.add_argument("opinions")
    b.add_argument("--vertices", type=int, default=1000)
    b.add_argument("--budget", type=_int_list, default=list(bench.DEFAULT_BUDGETS))
    b.add_argument("--eps", type=float, default=0.01)
    b.add_argument("--csv")
    b.add_argument("--timing", action="store_true", help="fill wall_ms (output no longer reproducible)")
    _common(b)

    lb = sub.add_parser("lb", help="distinguishing accuracy on hard instances")
    lb.add_argument("--n", type=int, default=900)
    lb.add_argument("--k", type=int, default=30)
    lb.add_argument("--d", type=int, default=8)
    lb.add_argument("--budget", type=_int_list, default=[10, 100, 1000, 10000])
    lb.add_argument("--trials", type=int, default=100)
    lb.add_argument("--min-gamma", type=float, default=DEFAULT_MIN_GAMMA)
    lb.add_argument("--csv")
    _common(lb)

    v = sub.add_parser("verify", help="run the self-check suites")
    v.add_argument("--mutant", choices=["sign"], help="inject a known bug; suites should fail")
    _common(v)
    return ap


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(a) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(a.seed))
    graph_seed = int(rng.integers(2**32))
    if a.kind == "hard":
        h = sample_mu_n(a.n, a.k, a.d, rng, min_gamma=a.min_gamma)
        dio.write_instance(f"{a.out}.mtx", h, a.family)
        print(f"wrote {a.out}.mtx ({dio.instance_header(h, a.family)})")
        return EXIT_OK
    if a.kind == "regular":
        if a.d < 0 or a.d >= a.n or (a.n * a.d) % 2:
            raise InvalidParams(f"no {a.d}-regular graph on {a.n} vertices")
        g = nx.random_regular_graph(a.d, a.n, seed=graph_seed)
    else:
        if not 0.0 < a.p <= 1.0:
            raise InvalidParams(f"p must lie in (0, 1], got {a.p}")
        g = nx.gnp_random_graph(a.n, a.p, seed=graph_seed)
    edges = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    dio.write_edges(f"{a.out}.edges", edges)
    dio.write_opinions(f"{a.out}.opinions", rng.random(a.n))
    print(f"wrote {a.out}.edges ({len(edges)} edges) and {a.out}.opinions ({a.n} values)")
    return EXIT_OK


def _report(rep, extra=()) -> None:
    for line in extra:
        print(line)
    print(f"estimate: {rep.estimate!r}")
    print(f"samples: {rep.samples} of t = {rep.requested_samples}")
    print(f"queries: {rep.queries.total} (vertex {rep.queries.vertex}, walk {rep.queries.walk})")
    print(f"truncated samples: {rep.truncated_samples}")


def cmd_solve(a) -> int:
    S = dio.read_triplets(a.matrix)
    if not 0 <= a.u < S.n:
        raise InvalidParams(f"u = {a.u} outside [0, {S.n})")
    rng = np.random.default_rng(np.random.SeedSequence(a.seed))
    notes = []
    delta = a.delta
    if delta is None:
        delta = max_delta(S)
        notes.append(f"delta: {delta!r} (derived from full matrix scan, outside the query model)")
    bmax = float(np.max(np.abs(S.b)))
    smax = s_max(S)
    notes.append(f"bmax: {bmax!r}  smax: {smax!r} (from full matrix scan)")
    if delta <= 0:
        if a.kappa is None:
            raise NotStrictlyDD(f"system is not strictly diagonally dominant (delta = {delta!r}); "
                                "pass --kappa to use the shifted reduction")
        rep = estimate_entry_nonstrict(Oracle(S), a.u, a.kappa, a.eps, bmax, smax, rng, a.mode)
        notes.append(f"shifted reduction with sigma = {rep.delta!r}")
    elif bmax == 0.0:
        print("estimate: 0.0")
        print("queries: 0 (b = 0)")
        return EXIT_OK
    else:
        rep = estimate_entry(Oracle(S), a.u, delta, a.eps, bmax, a.mode, rng)
    _report(rep, notes)
    return EXIT_OK


def cmd_fj(a) -> int:
    edges, top = dio.read_edges(a.edges)
    innate = dio.read_opinions(a.opinions)
    if top > innate.size:
        raise ParseError(f"edge list mentions vertex {top - 1} but only {innate.size} opinions given")
    try:
        S = fj_system(edges, innate.size, innate)
    except DDWalkError as e:
        raise ParseError(str(e)) from e
    if not 0 <= a.u < S.n:
        raise InvalidParams(f"u = {a.u} outside [0, {S.n})")
    rep = estimate_fj_opinion(Oracle(S), a.u, a.eps, np.random.default_rng(np.random.SeedSequence(a.seed)))
    _report(rep, [f"W: {weighted_max_degree(S)!r}"])
    return EXIT_OK


def cmd_bench(a) -> int:
    edges, top = dio.read_edges(a.edges)
    innate = dio.read_opinions(a.opinions)
    if top > innate.size:
        raise ParseError(f"edge list mentions vertex {top - 1} but only {innate.size} opinions given")
    rows = bench.run_bench(edges, innate, a.vertices, a.budget, a.seed, a.eps, a.threads, a.timing)
    _emit(bench.to_csv(bench.BENCH_HEADER, rows), a.csv)
    for r in rows:
        print(f"budget {r.budget}: {r.cut_walks} of {r.trials} estimates ended on the budget "
              "(in-flight walk dropped)", file=sys.stderr)
    return EXIT_OK


def cmd_lb(a) -> int:
    rows = bench.run_lb(a.n, a.k, a.d, a.budget, a.trials, a.seed, a.threads, a.min_gamma)
    _emit(bench.to_csv(bench.LB_HEADER, rows), a.csv)
    return EXIT_OK


def cmd_verify(a) -> int:
    results = run_suites(a.seed, a.mutant)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "fj": cmd_fj, "bench": cmd_bench,
            "lb": cmd_lb, "verify": cmd_verify}


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return COMMANDS[a.cmd](a)
    except NotStrictlyDD as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except (ParseError, InvalidParams, TooLargeForGroundTruth) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except DDWalkError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
