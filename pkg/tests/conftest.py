from fractions import Fraction

import numpy as np
import pytest

from ddwalk.system import fj_system, from_triplets

ACCEPTANCE_LINES: list[str] = []


def exact_solve(A, b):
    """Gauss-Jordan elimination over the rationals; A and b hold ints or Fractions."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(A, b)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [x / piv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


@pytest.fixture
def tridiag():
    return from_triplets(3, [(0, 3), (1, 3), (2, 3)],
                         [(0, 1, -1), (1, 0, -1), (1, 2, -1), (2, 1, -1)], [1, 0, 0])


@pytest.fixture
def single_edge_fj():
    return fj_system([(0, 1, 1.0)], 2, [1.0, 0.0])


@pytest.fixture
def triangle_fj():
    return fj_system([(0, 1), (1, 2), (0, 2)], 3, [0.2, 0.5, 0.9])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
