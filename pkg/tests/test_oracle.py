import threading

import numpy as np
import pytest

from ddwalk.errors import BudgetExhausted, IndexOutOfRange, NonPositiveSigma
from ddwalk.oracle import Oracle, QueryLedger, draw_neighbor, shift_diagonal, shifted_oracle
from ddwalk.system import from_triplets


def test_vertex_query_fj_triangle(triangle_fj):
    o = Oracle(triangle_fj)
    assert o.vertex_query(0) == (2, 2.0, 3.0, 0.2)
    assert o.ledger.snapshot().vertex == 1


def test_vertex_query_one_by_one():
    o = Oracle(from_triplets(1, [(0, 3)], [], [6]))
    assert o.vertex_query(0) == (0, 0.0, 3.0, 6.0)


def test_budget_zero():
    o = Oracle(from_triplets(1, [(0, 3)], [], [6]), budget=0)
    with pytest.raises(BudgetExhausted):
        o.vertex_query(0)
    assert o.ledger.total() == 0


def test_budget_stops_exactly(tridiag, rng):
    o = Oracle(tridiag, budget=3)
    o.vertex_query(0)
    o.random_walk_query(0, rng)
    o.neighbor_query(1, 1)
    with pytest.raises(BudgetExhausted):
        o.vertex_query(1)
    assert o.ledger.total() == 3


def test_neighbor_query(tridiag):
    o = Oracle(tridiag)
    assert o.neighbor_query(1, 1) == 0
    assert o.neighbor_query(1, 2) == 2
    with pytest.raises(IndexOutOfRange):
        o.neighbor_query(1, 3)
    with pytest.raises(IndexOutOfRange):
        o.neighbor_query(1, 0)
    iso = Oracle(from_triplets(2, [(0, 1), (1, 1)], [], [0, 0]))
    with pytest.raises(IndexOutOfRange):
        iso.neighbor_query(0, 1)
    assert o.ledger.snapshot().neighbor == 2


def test_vertex_out_of_range(tridiag):
    with pytest.raises(IndexOutOfRange):
        Oracle(tridiag).vertex_query(3)


def test_walk_equal_magnitudes_keeps_sign(rng):
    S = from_triplets(8, [(0, 9)], [(0, 3, -2.0), (0, 7, 2.0)], [0] * 8)
    o = Oracle(S)
    seen = {}
    for _ in range(4000):
        v, w = o.random_walk_query(0, rng)
        seen.setdefault(v, set()).add(w)
    assert seen == {3: {-2.0}, 7: {2.0}}
    assert o.walk_probabilities(0) == {3: 0.5, 7: 0.5}


def test_walk_isolated_vertex_returns_bottom_and_counts(rng):
    o = Oracle(from_triplets(2, [(0, 1), (1, 1)], [], [0, 0]))
    assert o.random_walk_query(0, rng) is None
    assert o.ledger.snapshot().walk == 1
    assert o.walk_probabilities(0) == {}


def test_walk_frequency_three_quarters():
    # P(v=2) = 3/4 exactly; sd over 1e5 draws is sqrt(3/16/1e5) ~ 0.00137
    S = from_triplets(3, [(0, 5)], [(0, 1, -1.0), (0, 2, -3.0)], [0, 0, 0])
    o = Oracle(S)
    r = np.random.default_rng(7)
    hits = sum(o.random_walk_query(0, r).v == 2 for _ in range(100_000))
    assert abs(hits / 1e5 - 0.75) <= 0.006


def test_walk_probabilities_sum_to_one():
    r = np.random.default_rng(3)
    n = 30
    off = [(u, v, float(r.normal())) for u in range(n) for v in range(n)
           if u != v and r.random() < 0.3]
    S = from_triplets(n, [(u, 100.0) for u in range(n)], off, np.zeros(n))
    o = Oracle(S)
    for u in range(n):
        p = o.walk_probabilities(u)
        if S.degree(u):
            assert sum(p.values()) == pytest.approx(1.0, abs=1e-12)
            for v, w in S.row(u):
                assert p[v] == pytest.approx(abs(w) / S.dout[u], rel=1e-9)


def test_draw_neighbor_single_entry_consumes_no_randomness():
    r1, r2 = np.random.default_rng(1), np.random.default_rng(1)
    assert draw_neighbor(np.array([2.0]), 2.0, r1) == 0
    assert r1.random() == r2.random()


class TestShift:
    @pytest.mark.parametrize("s, want", [(5.0, 5.5), (-5.0, -5.5), (0.0, 0.5)])
    def test_shift_diagonal(self, s, want):
        assert shift_diagonal(s, 0.5) == want

    def test_only_s_uu_changes(self, rng):
        S = from_triplets(3, [(0, 4), (1, -3), (2, 0)],
                          [(0, 1, 1.0), (1, 2, -2.0), (2, 0, 0.5)], [1, 2, 3])
        base, sh = Oracle(S), shifted_oracle(Oracle(S), 0.5)
        r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
        for u in range(3):
            a, b = base.vertex_query(u), sh.vertex_query(u)
            assert (a.delta_out, a.d_out, a.b_u) == (b.delta_out, b.d_out, b.b_u)
            assert b.s_uu == shift_diagonal(a.s_uu, 0.5)
            assert base.random_walk_query(u, r1) == sh.random_walk_query(u, r2)
            assert base.neighbor_query(u, 1) == sh.neighbor_query(u, 1)

    def test_shares_inner_ledger(self, tridiag):
        inner = Oracle(tridiag, budget=2)
        sh = shifted_oracle(inner, 1.0)
        sh.vertex_query(0)
        sh.neighbor_query(0, 1)
        assert inner.ledger.total() == 2
        with pytest.raises(BudgetExhausted):
            sh.vertex_query(1)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_non_positive_sigma(self, tridiag, sigma):
        with pytest.raises(NonPositiveSigma):
            shifted_oracle(Oracle(tridiag), sigma)

    def test_tables_carry_shift(self, tridiag):
        assert shifted_oracle(shifted_oracle(Oracle(tridiag), 0.5), 0.25).tables().shift == 0.75


class TestLedger:
    def test_charge_all_or_nothing(self):
        L = QueryLedger(budget=5)
        L.charge(vertex=3)
        with pytest.raises(BudgetExhausted):
            L.charge(vertex=1, walk=2)
        assert L.total() == 3
        assert L.remaining() == 2

    def test_concurrent_counts(self, tridiag):
        o = Oracle(tridiag)

        def work():
            for _ in range(2000):
                o.vertex_query(1)

        ts = [threading.Thread(target=work) for _ in range(8)]
        for t in ts:
            t.start()
        for t in ts:
            t.join()
        assert o.ledger.total() == 16000

    def test_merge(self):
        a, b = QueryLedger(), QueryLedger()
        a.charge(vertex=2)
        b.charge(neighbor=1, walk=4)
        a.merge(b)
        s = a.snapshot()
        assert (s.vertex, s.neighbor, s.walk, s.total) == (2, 1, 4, 7)

    def test_negative_budget(self):
        with pytest.raises(ValueError):
            QueryLedger(-1)
