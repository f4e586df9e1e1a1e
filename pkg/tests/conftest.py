import sys

import numpy as np
import pytest

import toepcov as tc

# Published eigenvalues of the 17-element clutter model, descending.
CLUTTER_EIGS = np.array([
    1.49641081, 1.42482983, 1.13675988, 1.00087182, 1.00008334, 0.99237031,
    0.81498939, 0.45059824, 0.15840976, 0.02362155, 0.00204107, 0.00020973,
    0.00010417, 0.00010011, 0.00010000, 0.00010000, 0.00010000,
])


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(scope="session")
def clutter():
    return tc.clutter_covariance(tc.ClutterScenario())


@pytest.fixture(scope="session")
def clutter_sample(clutter):
    return tc.sample_covariance(tc.draw_snapshots(clutter, 85, (3, 0)))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, measured, requirement, passed in results:
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(
            f"{verdict}  {criterion}: {measured}  (required {requirement})"
        )
