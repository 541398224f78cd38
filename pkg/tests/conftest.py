import numpy as np
import pytest

from tomoewv import ftt_scheme, pauli_six_scheme, sic_povm_qubit


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["pauli6", "sic2", "ftt"])
def builtin_scheme(request):
    if request.param == "pauli6":
        return pauli_six_scheme(1.0)
    if request.param == "sic2":
        return sic_povm_qubit(1.0)
    return ftt_scheme(7 * np.pi / 10, 6, 1.0)


def pauli_matrices():
    return [
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]]),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]


def m12(beta, ncal=1.0):
    """Reference 12 x 4 FTT measurement matrix in closed form, row by row."""
    c, s, r3 = np.cos(beta), np.sin(beta), np.sqrt(3)
    x = r3 * (c - 1) / 4
    z = (c + 3) / 4
    rows = [
        [1, -x, -s / 2, z],
        [1, 0, -s, c],
        [1, x, -s / 2, z],
        [1, -x, s / 2, z],
        [1, 0, s, c],
        [1, x, s / 2, z],
        [1, x, s / 2, -z],
        [1, 0, s, -c],
        [1, -x, s / 2, -z],
        [1, x, -s / 2, -z],
        [1, 0, -s, -c],
        [1, -x, -s / 2, -z],
    ]
    return ncal / 2 * np.array(rows)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
