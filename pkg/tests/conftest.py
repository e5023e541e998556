import numpy as np
import pytest

from dppeakons.classify import TABLE, random_state
from dppeakons.spectral import PeakonState

SIGNATURES = [row.signature for row in TABLE]

# the (+-+) portrait state at j = k = 1
PORTRAIT_STATE = PeakonState([-0.2, 0.0, 0.1], [1.22, -5.01, 4.0])


def sig_id(sig):
    return "".join("p" if s > 0 else "m" for s in sig)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def portrait_state():
    return PORTRAIT_STATE


def states_for(signature, count, seed):
    g = np.random.default_rng(seed)
    return [random_state(g, signature) for _ in range(count)]


def anti_resonant_state():
    """(+-+) data whose spectrum contains a pair +-l.

    The cubic 1 - M1 z + M2 z^2 - M3 z^3 has such a pair exactly when
    M3 = M1 M2; m3 is tuned to reach that at x = (-0.5, 0, 0.5), m1 = 1, m2 = -2.
    """
    from scipy.optimize import brentq

    from dppeakons.dynamics import conserved

    x = np.array([-0.5, 0.0, 0.5])

    def f(m3):
        M1, M2, M3 = conserved(PeakonState(x, [1.0, -2.0, m3]))
        return M3 - M1 * M2

    return PeakonState(x, [1.0, -2.0, brentq(f, 1.0, 2.0, xtol=1e-15)])


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
