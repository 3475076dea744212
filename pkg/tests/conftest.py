import numpy as np
import pytest

ACCEPTANCE_LINES = []


def dense_shifted_laplacian(N, lam=0.0):
    """(A + lam I) assembled entry by entry; independent of the package's kron assembly."""
    m = N - 1
    h2 = (1.0 / N) ** 2
    A = np.zeros((m * m, m * m), dtype=complex)
    for i in range(m):
        for j in range(m):
            row = i * m + j
            A[row, row] = 4.0 / h2 + lam
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < m and 0 <= jj < m:
                    A[row, ii * m + jj] = -1.0 / h2
    return A


def heat_matrix(n, tau):
    """Heat BVM matrix typed in row by row."""
    B = np.zeros((n, n))
    for i in range(n - 1):
        if i > 0:
            B[i, i - 1] = -0.5
        B[i, i + 1] = 0.5
    B[n - 1, n - 2] = -1.0
    B[n - 1, n - 1] = 1.0
    return B / tau


@pytest.fixture
def rng():
    return np.random.default_rng(20211018)


def record_acceptance(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
