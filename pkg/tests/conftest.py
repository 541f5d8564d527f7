import numpy as np
import pytest
import scipy.linalg as sl

ACCEPTANCE_LINES = []


def dense_spin_matrices(n_atoms):
    """Jx, Jy, Jz as dense matrices in ascending-m order (independent of the package)."""
    j = n_atoms / 2
    m = np.arange(n_atoms + 1) - j
    jp = np.zeros((n_atoms + 1, n_atoms + 1))
    for k in range(n_atoms):
        jp[k + 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    jz = np.diag(m)
    return jx, jy, jz


def dense_css(n_atoms):
    """exp(-i pi Jy / 2)|j, -j> by matrix exponential."""
    _, jy, _ = dense_spin_matrices(n_atoms)
    lowest = np.zeros(n_atoms + 1, dtype=complex)
    lowest[0] = 1
    return sl.expm(-1j * np.pi / 2 * jy) @ lowest


def dense_evolve(n_atoms, coupling, c, t):
    jx, _, jz = dense_spin_matrices(n_atoms)
    h = 2 * jz @ jz + coupling * jx
    return sl.expm(-1j * h * t) @ c


def dense_expect(op, c):
    return np.vdot(c, op @ c)


@pytest.fixture
def spin_matrices():
    return dense_spin_matrices


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion and assert it."""

    def record(number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{'ok' if passed else 'FAIL'}: {desc}" for desc, passed in checks)
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
