"""Bundled demonstration scenarios.

Two five-agent experiments sharing one marginally unstable planar
model: a static directed network and a periodically switching pair of
networks. Both are exercised end to end by the test suite; the
checked-in files under scenarios/ are their canonical text forms.
"""

import os

import numpy as np

from .graph import SwitchingSignal, Topology
from .scenario import Scenario, write_scenario

_A = [[-0.38, 0.72], [-0.68, 0.42]]
_B = [[0.26], [0.31]]
_X0 = [1.2, -0.8]
_XF = [[2.4, -1.6], [-1.4, 2.6], [1.8, -2.5], [-0.2, 1.3]]

_EDGES_1 = ((0, 1), (0, 2), (3, 2), (1, 3), (4, 3), (2, 4))
_EDGES_2 = ((0, 1), (0, 2), (1, 3), (2, 4), (3, 4))


def static_demo() -> Scenario:
    """Four followers on a fixed directed network."""
    return Scenario(
        name="static_demo",
        A=np.array(_A), B=np.array(_B), mu1=1.0, mu2=1.0,
        topologies=(Topology(4, frozenset(_EDGES_1)),),
        signal=SwitchingSignal.static(),
        T_low=0.001, T_high=0.018, grid_h=0.001, seed=7, horizon=30.0,
        x0_leader=np.array(_X0), x0_followers=np.array(_XF),
        out_traj="static_demo_trajectory.csv",
        out_sched="static_demo_schedule.csv")


def switching_demo() -> Scenario:
    """Same agents alternating between two directed networks, two
    thirds of each second on the first and one third on the second."""
    return Scenario(
        name="switching_demo",
        A=np.array(_A), B=np.array(_B), mu1=1.0, mu2=1.0,
        topologies=(Topology(4, frozenset(_EDGES_1)),
                    Topology(4, frozenset(_EDGES_2))),
        signal=SwitchingSignal(mode_count=2, period=1.0,
                               phases=((0, 2.0 / 3.0), (1, 1.0 / 3.0))),
        T_low=0.001, T_high=0.016, grid_h=0.001, seed=7, horizon=30.0,
        x0_leader=np.array(_X0), x0_followers=np.array(_XF),
        out_traj="switching_demo_trajectory.csv",
        out_sched="switching_demo_schedule.csv")


def write_bundled(directory) -> list:
    """Write both demo scenario files; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for sc, fname in ((static_demo(), "static.txt"),
                      (switching_demo(), "switching.txt")):
        path = os.path.join(directory, fname)
        write_scenario(sc, path)
        paths.append(path)
    return paths
