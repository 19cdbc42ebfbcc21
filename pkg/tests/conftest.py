import numpy as np
import pytest

from smmdesign.systems import benchmark_system

N, L0, LF, SIGMA2 = 63, 8, 13, 0.01


def recursion_impulse_response(num, den, length):
    """Markov parameters by long division of num(z)/den(z), written out as a plain loop."""
    num = list(num)
    den = list(den)
    n = len(den) - 1
    b = [0.0] * (len(den) - len(num)) + num  # coefficients of z^-i after dividing by z^n
    h = []
    for t in range(length):
        acc = b[t] if t < len(b) else 0.0
        for i in range(1, n + 1):
            if t - i >= 0:
                acc -= den[i] * h[t - i]
        h.append(acc)
    return np.array(h)


@pytest.fixture(scope="session")
def bench():
    return benchmark_system()


@pytest.fixture(scope="session")
def h_true_long(bench):
    return recursion_impulse_response(bench.numerator, bench.denominator, 200)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_series_csv(path, values):
    path.write_text("index,value\n" + "".join(f"{i},{float(v):.17g}\n" for i, v in enumerate(values)))
    return path
