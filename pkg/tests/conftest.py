import numpy as np
import pytest

from atollpr.grid import Lattice


def square_lattice(lo, hi, h):
    """Cell-centred square lattice on [lo, hi]^2 with spacing h."""
    n = int(round((hi - lo) / h))
    return Lattice(lo + h / 2, lo + h / 2, h, h, n, n)


def centred_lattice(radius, h, center=0j):
    n = int(np.ceil(2 * radius / h)) + 4
    n += 1 - n % 2  # odd, so a cell sits on the centre
    o = -(n - 1) / 2 * h
    return Lattice(center.real + o, center.imag + o, h, h, n, n)


def gaussian_mixture(rng, k=3, rad=0.75):
    """Random k-term mixture of time-frequency shifted Gaussians with centres in a disc."""
    r = rad * np.sqrt(rng.random(k))
    th = 2 * np.pi * rng.random(k)
    xs, ys = r * np.cos(th), r * np.sin(th)
    c = rng.standard_normal(k) + 1j * rng.standard_normal(k)

    def f(t):
        out = np.zeros_like(t, dtype=complex)
        for a, b, w in zip(xs, ys, c):
            out += w * np.exp(-np.pi * (t - a) ** 2) * np.exp(2j * np.pi * b * t)
        return out

    return f


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
