import numpy as np
import pytest

from quadctl import RuntimeFault, bundled, load_robot, load_scenario, run_scenario


@pytest.fixture(scope="session")
def go2():
    return load_robot(bundled("go2.robot"))


@pytest.fixture(scope="session")
def synthetic():
    return load_robot(bundled("synthetic.robot"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


class TourRun:
    """A bundled scenario run once per session; ``fault`` holds a
    RuntimeFault if the loop aborted."""

    def __init__(self, name, params):
        self.name = name
        self.scenario = load_scenario(bundled(f"{name}.scn"))
        self.result = None
        self.fault = None
        try:
            self.result = run_scenario(params, self.scenario)
        except RuntimeFault as exc:
            self.fault = exc


_RUNS = {}


@pytest.fixture(scope="session")
def tour(go2):
    def get(name):
        if name not in _RUNS:
            _RUNS[name] = TourRun(name, go2)
        return _RUNS[name]

    return get
