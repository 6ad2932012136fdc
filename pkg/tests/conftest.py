import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import unitary_group

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def rot_oracle(pauli, theta):
    """exp(-i theta P / 2) by matrix exponentiation."""
    return expm(-0.5j * theta * pauli)


def kron_embed(n, q, m):
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, m if k == q else np.eye(2))
    return out


def cnot_oracle(n, control, target):
    """sum of projector products: |0><0|_c (x) I + |1><1|_c (x) X_t."""
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    a = kron_embed(n, control, p0)
    b = kron_embed(n, control, p1) @ kron_embed(n, target, PAULI_X)
    return a + b


def haar_unitary(dim, rng):
    return unitary_group.rvs(dim, random_state=rng)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# -- acceptance reporting ---------------------------------------------------------

ACCEPTANCE_LINES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        status = "PASS" if report.passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"[{status}] criterion {number:2d}: {title} ({report.duration:.1f} s)"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
