import pytest

from psdmm import MatrixF, make_rng, random_matrix

BIG_Q = (1 << 61) - 1

# (criterion, passed, detail) lines collected by test_acceptance
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


@pytest.fixture
def rng():
    return make_rng(1234, "tests")


@pytest.fixture
def rand_mat(rng):
    def make(rows, cols, q=BIG_Q):
        return random_matrix(rows, cols, rng, q)
    return make


def naive_matmul(a: MatrixF, b: MatrixF) -> list[list[int]]:
    """Triple loop over Python ints."""
    q = a.q
    x, y = a.tolist(), b.tolist()
    return [[sum(x[i][k] * y[k][j] for k in range(a.cols)) % q for j in range(b.cols)]
            for i in range(a.rows)]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
