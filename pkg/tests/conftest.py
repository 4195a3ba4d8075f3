import numpy as np

from bell_hunter.cspsa import gradient_estimate, sample_perturbation
from bell_hunter.measurement import chsh_exact


def wirtinger_central(rho, z, h=1e-6):
    """Conjugate Wirtinger gradient of the noiseless CHSH value by central differences."""
    grad = np.empty(8, dtype=complex)
    for i in range(8):
        e = np.zeros(8, dtype=complex)
        e[i] = h
        dx = (chsh_exact(rho, z + e) - chsh_exact(rho, z - e)) / (2 * h)
        dy = (chsh_exact(rho, z + 1j * e) - chsh_exact(rho, z - 1j * e)) / (2 * h)
        grad[i] = 0.5 * (dx + 1j * dy)
    return grad


def gradient_samples(rho, z, c, n, rng):
    """``n`` simultaneous-perturbation estimates at ``z`` with the noiseless objective."""
    delta = sample_perturbation(rng, (n,))
    zb = np.broadcast_to(z, (n, 8))
    return gradient_estimate(chsh_exact(rho, zb + c * delta), chsh_exact(rho, zb - c * delta), c, delta)


ACCEPTANCE_LINES: list[str] = []


def report(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
