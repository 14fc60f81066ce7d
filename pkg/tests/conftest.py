import contextlib
import time

import numpy as np
import pytest

# Literal single-qubit matrices, kept independent of stabgraph.pauli.
I2 = np.eye(2, dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
LETTER = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def pauli_oracle(letters: str, coeff: complex = 1) -> np.ndarray:
    """Dense matrix of a letter string, built straight from the 2x2 matrices."""
    return coeff * kron(*(LETTER[c] for c in letters))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------- acceptance summary

_ACCEPTANCE: dict = {}


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record a PASS/FAIL line (with wall time) for the terminal summary."""
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        _ACCEPTANCE[number] = (title, False, time.perf_counter() - start)
        raise
    _ACCEPTANCE[number] = (title, True, time.perf_counter() - start)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, elapsed = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title} ({elapsed:.2f} s)")
