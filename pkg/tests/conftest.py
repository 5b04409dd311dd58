import numpy as np
import pytest

from odcbf.acc import AccParams, acc_cbf, acc_clf, acc_controller_defaults, acc_input_box, acc_system
from odcbf.controllers import ControllerConfig


class Acc:
    def __init__(self):
        self.params = AccParams()
        self.sys = acc_system(self.params)
        self.h = acc_cbf(self.params)
        self.V = acc_clf(self.params)
        self.box = acc_input_box(self.params)
        self.cfg = ControllerConfig(**acc_controller_defaults(self.params))
        self.umax = 0.25 * 1650 * 9.81


@pytest.fixture(scope="session")
def acc():
    return Acc()


def random_safe_states(rng, n, margin=0.1):
    """ACC states with x2 in [0, 40] and x3 in [1.8 x2 + margin, 150]."""
    v = rng.uniform(0.0, 40.0, n)
    gap = rng.uniform(1.8 * v + margin, 150.0)
    return np.column_stack([np.zeros(n), v, gap])


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = [test_acceptance.RESULTS[k] for k in sorted(test_acceptance.RESULTS)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
