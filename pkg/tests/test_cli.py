import subprocess
import sys

import numpy as np
import pytest

from ddwalk.bench import BENCH_HEADER, LB_HEADER, run_bench
from ddwalk.cli import main
from ddwalk.errors import InvalidParams, TooLargeForGroundTruth
from ddwalk.io import read_edges, read_opinions

TRI = "3 4\n0 3 1\n1 3 0\n2 3 0\n0 1 -1\n1 0 -1\n1 2 -1\n2 1 -1\n"


def value(out, key):
    for line in out.splitlines():
        if line.startswith(key + ":"):
            return float(line.split(":", 1)[1].split()[0])
    raise KeyError(key)


@pytest.fixture
def tri_file(tmp_path):
    p = tmp_path / "tri.mtx"
    p.write_text(TRI)
    return p


class TestGen:
    def test_regular(self, tmp_path, capsys):
        assert main(["gen", "regular", "--n", "100", "--d", "4", "--seed", "7",
                     "--out", str(tmp_path / "g")]) == 0
        edges, n = read_edges(tmp_path / "g.edges")
        assert len(edges) == 200 and n == 100
        deg = np.bincount(np.array([e[:2] for e in edges], dtype=int).ravel(), minlength=100)
        assert np.all(deg == 4)

    def test_fj_random(self, tmp_path):
        assert main(["gen", "fj-random", "--n", "50", "--p", "0.1", "--seed", "1",
                     "--out", str(tmp_path / "f")]) == 0
        op = read_opinions(tmp_path / "f.opinions")
        assert op.size == 50 and np.all((op >= 0) & (op <= 1))

    def test_deterministic(self, tmp_path):
        for tag in ("a", "b"):
            main(["gen", "er", "--n", "60", "--p", "0.2", "--seed", "3", "--out", str(tmp_path / tag)])
        assert (tmp_path / "a.edges").read_bytes() == (tmp_path / "b.edges").read_bytes()
        assert (tmp_path / "a.opinions").read_bytes() == (tmp_path / "b.opinions").read_bytes()

    def test_hard(self, tmp_path):
        assert main(["gen", "hard", "--n", "60", "--k", "10", "--d", "3", "--min-gamma", "0.1",
                     "--out", str(tmp_path / "h")]) == 0
        assert (tmp_path / "h.mtx").read_text().startswith("# hardgen k=10 d=3 ")

    def test_invalid_params(self, tmp_path, capsys):
        assert main(["gen", "regular", "--n", "5", "--d", "3", "--out", str(tmp_path / "x")]) == 2
        assert main(["gen", "er", "--n", "5", "--p", "0", "--out", str(tmp_path / "x")]) == 2


class TestSolve:
    def test_tridiagonal(self, tri_file, capsys):
        assert main(["solve", str(tri_file), "--u", "0", "--eps", "0.05", "--seed", "2"]) == 0
        out = capsys.readouterr().out
        assert abs(value(out, "estimate") - 8 / 21) <= 0.05
        assert "derived from full matrix scan" in out
        assert value(out, "samples").is_integer()

    def test_explicit_delta_expected_mode(self, tri_file, capsys):
        assert main(["solve", str(tri_file), "--u", "1", "--eps", "0.05", "--delta", "1",
                     "--mode", "expected"]) == 0
        out = capsys.readouterr().out
        assert "derived" not in out
        assert abs(value(out, "estimate") - 3 / 21) <= 0.05

    def test_zero_rhs(self, tmp_path, capsys):
        p = tmp_path / "z.mtx"
        p.write_text("2 1\n0 2\n1 2\n0 1 -1\n")
        assert main(["solve", str(p), "--u", "0"]) == 0
        assert value(capsys.readouterr().out, "estimate") == 0.0

    def test_not_dd(self, tmp_path, capsys):
        p = tmp_path / "n.mtx"
        p.write_text("2 1\n0 1 1\n1 1 1\n0 1 -2\n")
        assert main(["solve", str(p), "--u", "0"]) == 3
        assert "not strictly diagonally dominant" in capsys.readouterr().err

    def test_nonstrict_with_kappa(self, tmp_path, capsys):
        p = tmp_path / "l.mtx"
        p.write_text("2 2\n0 1 1\n1 1 -1\n0 1 -1\n1 0 -1\n")
        assert main(["solve", str(p), "--u", "0", "--eps", "0.5", "--kappa", "1"]) == 0
        out = capsys.readouterr().out
        assert "shifted reduction" in out
        assert abs(value(out, "estimate") - 0.5) <= 0.25

    def test_parse_error(self, tmp_path, capsys):
        p = tmp_path / "bad.mtx"
        p.write_text("2 1\n0 1\n")
        assert main(["solve", str(p), "--u", "0"]) == 2
        assert main(["solve", str(tmp_path / "missing"), "--u", "0"]) == 2

    def test_bad_vertex(self, tri_file):
        assert main(["solve", str(tri_file), "--u", "9"]) == 2


class TestFJ:
    def test_single_edge(self, tmp_path, capsys):
        (tmp_path / "e").write_text("0 1\n")
        (tmp_path / "o").write_text("1\n0\n")
        assert main(["fj", str(tmp_path / "e"), str(tmp_path / "o"), "--u", "0", "--eps", "0.02"]) == 0
        out = capsys.readouterr().out
        assert value(out, "W") == 1.0
        assert abs(value(out, "estimate") - 2 / 3) <= 0.02

    def test_constant(self, tmp_path, capsys):
        (tmp_path / "e").write_text("0 1\n1 2\n2 3\n")
        (tmp_path / "o").write_text("0.3\n0.3\n0.3\n0.3\n")
        assert main(["fj", str(tmp_path / "e"), str(tmp_path / "o"), "--u", "2", "--eps", "0.05"]) == 0
        assert abs(value(capsys.readouterr().out, "estimate") - 0.3) <= 0.05

    def test_missing_opinions(self, tmp_path):
        (tmp_path / "e").write_text("0 1\n")
        assert main(["fj", str(tmp_path / "e"), str(tmp_path / "none"), "--u", "0"]) == 2

    def test_opinion_out_of_range(self, tmp_path):
        (tmp_path / "e").write_text("0 1\n")
        (tmp_path / "o").write_text("1.5\n0\n")
        assert main(["fj", str(tmp_path / "e"), str(tmp_path / "o"), "--u", "0"]) == 2


@pytest.fixture
def small_graph(tmp_path):
    main(["gen", "regular", "--n", "200", "--d", "4", "--seed", "5", "--out", str(tmp_path / "r")])
    return tmp_path / "r.edges", tmp_path / "r.opinions"


class TestBench:
    def test_csv(self, small_graph, tmp_path):
        e, o = small_graph
        out = tmp_path / "b.csv"
        assert main(["bench", str(e), str(o), "--vertices", "50", "--budget", "100,400",
                     "--csv", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(BENCH_HEADER) == "budget,abs_err_mean,abs_err_p90,trials,mean_queries,wall_ms"
        assert len(lines) == 3
        for line in lines[1:]:
            budget, mean, p90, trials, mq, wall = line.split(",")
            assert float(mean) <= float(p90) and trials == "50" and wall == "nan"
            assert float(mq) <= int(budget)

    def test_timing_flag(self, small_graph, capsys):
        e, o = small_graph
        main(["bench", str(e), str(o), "--vertices", "5", "--budget", "50", "--timing"])
        row = capsys.readouterr().out.splitlines()[1]
        assert row.split(",")[-1] != "nan"

    def test_inactive_budget_matches_unbudgeted(self, small_graph):
        edges, n = read_edges(small_graph[0])
        innate = read_opinions(small_graph[1])
        row = run_bench(edges, innate, 300, [10**9], seed=1, eps=0.1)[0]
        assert row.cut_walks == 0
        # unbudgeted estimates at eps = 0.1 have error well inside eps
        assert row.abs_err_p90 < 0.1

    def test_zero_vertices(self, small_graph):
        edges, _ = read_edges(small_graph[0])
        with pytest.raises(InvalidParams):
            run_bench(edges, read_opinions(small_graph[1]), 0, [100])
        assert main(["bench", str(small_graph[0]), str(small_graph[1]), "--vertices", "0"]) == 2

    def test_too_large(self):
        with pytest.raises(TooLargeForGroundTruth):
            run_bench([], np.zeros(5001), 1, [10])

    def test_bad_budget_list(self, small_graph):
        with pytest.raises(SystemExit) as e:
            main(["bench", str(small_graph[0]), str(small_graph[1]), "--budget", "a,b"])
        assert e.value.code == 2


class TestLb:
    def test_csv(self, tmp_path):
        out = tmp_path / "lb.csv"
        assert main(["lb", "--n", "100", "--k", "10", "--d", "3", "--budget", "1,2000",
                     "--trials", "20", "--min-gamma", "0.1", "--csv", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(LB_HEADER) == "budget,acc_family0,acc_family1,mean_queries"
        assert len(lines) == 3
        assert float(lines[2].split(",")[1]) == 1.0


class TestVerify:
    def test_default_passes(self, capsys):
        assert main(["verify"]) == 0
        out = capsys.readouterr().out
        for name in ("unbiasedness", "kernel-equivalence", "fj-fixed-point", "hard-instance"):
            assert f"PASS {name}" in out

    def test_mutant_fails(self, capsys):
        assert main(["verify", "--mutant", "sign"]) == 1
        assert "FAIL unbiasedness" in capsys.readouterr().out


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "ddwalk.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("gen", "solve", "fj", "bench", "lb", "verify"):
        assert cmd in r.stdout
