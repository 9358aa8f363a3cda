import sys

import numpy as np
import pytest

from ricci_lab.config import ScenarioConfig
from ricci_lab.flow import run
from ricci_lab.geometry import Grid, Topology, WarpedState


def round_sphere(N: int, n: int = 3, r: float = 1.0) -> WarpedState:
    grid = Grid(N)
    w = r * np.sin(np.pi * grid.x)
    w[0] = w[-1] = 0.0
    return WarpedState(grid, n, 0.0, np.full(grid.nodes, np.pi * r), w, Topology.SPHERE)


def cylinder(N: int, n: int = 3, rho: float = 1.0, length: float = 2 * np.pi) -> WarpedState:
    grid = Grid(N)
    return WarpedState(grid, n, 0.0, np.full(grid.nodes, length), np.full(grid.nodes, rho), Topology.NECK)


def dumbbell_profile(N: int, n: int = 3) -> WarpedState:
    """w(s) = sin(s)(1 - 0.3 exp(-(s - pi/2)^2 / 0.1)) on [0, pi]."""
    grid = Grid(N)
    s = np.pi * grid.x
    w = np.sin(s) * (1 - 0.3 * np.exp(-((s - np.pi / 2) ** 2) / 0.1))
    w[0] = w[-1] = 0.0
    return WarpedState(grid, n, 0.0, np.full(grid.nodes, np.pi), w, Topology.SPHERE)


@pytest.fixture(scope="session")
def sphere_history():
    return run(ScenarioConfig(name="sphere", nodes=200, t_end=0.2))


@pytest.fixture(scope="session")
def dumbbell_history():
    return run(ScenarioConfig(name="dumbbell", profile="dumbbell", nodes=200, t_end=0.05))


@pytest.fixture(scope="session")
def cylinder_history():
    cfg = ScenarioConfig(name="cyl", topology="neck", profile="cylinder_caps", neck_amp=0.0, nodes=200, t_end=0.1)
    return run(cfg)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
