import math

import numpy as np
import pytest

from leadersync import (GroundedLaplacian, InvalidTime, SwitchingSignal,
                        Topology, build_H, is_nonsingular_M, leader_reachable,
                        signal_mode)

import oracles

EDGES_1 = frozenset([(0, 1), (0, 2), (3, 2), (1, 3), (4, 3), (2, 4)])
EDGES_2 = frozenset([(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)])


def test_topology_validation():
    with pytest.raises(ValueError):
        Topology(0, frozenset())
    with pytest.raises(ValueError):
        Topology(2, frozenset([(1, 1)]))
    with pytest.raises(ValueError):
        Topology(2, frozenset([(0, 3)]))
    with pytest.raises(ValueError):
        Topology(2, frozenset([(-1, 0)]))


def test_build_H_demo_graphs():
    H1 = build_H(Topology(4, EDGES_1)).H
    expected1 = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, -1.0, 0.0],
        [-1.0, 0.0, 2.0, -1.0],
        [0.0, -1.0, 0.0, 1.0]])
    assert np.array_equal(H1, expected1)

    H2 = build_H(Topology(4, EDGES_2)).H
    expected2 = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 1.0, 0.0],
        [0.0, -1.0, -1.0, 2.0]])
    assert np.array_equal(H2, expected2)


def test_build_H_ignores_edges_into_leader():
    a = build_H(Topology(2, frozenset([(0, 1), (0, 2)]))).H
    b = build_H(Topology(2, frozenset([(0, 1), (0, 2), (1, 0), (2, 0)]))).H
    assert np.array_equal(a, b)


def test_build_H_counts_parallel_inputs():
    H = build_H(Topology(2, frozenset([(0, 1), (2, 1), (0, 2)]))).H
    assert H[0, 0] == 2.0
    assert H[0, 1] == -1.0
    assert H[1, 1] == 1.0


def test_grounded_laplacian_immutable():
    gl = build_H(Topology(2, frozenset([(0, 1), (1, 2)])))
    with pytest.raises(ValueError):
        gl.H[0, 0] = 99.0


def test_leader_reachable_demo_and_counterexample():
    assert leader_reachable(Topology(4, EDGES_1))
    assert leader_reachable(Topology(4, EDGES_2))
    # follower 2 only feeds follower 1, nothing reaches it
    assert not leader_reachable(Topology(2, frozenset([(0, 1), (2, 1)])))
    assert not leader_reachable(Topology(1, frozenset()))


def test_leader_reachable_matches_closure_oracle():
    rng = np.random.default_rng(201)
    for _ in range(200):
        N = int(rng.integers(1, 7))
        edges = set()
        for j in range(N + 1):
            for i in range(N + 1):
                if j != i and rng.random() < 0.25:
                    edges.add((j, i))
        t = Topology(N, frozenset(edges))
        assert leader_reachable(t) == oracles.reachable_closure(N, edges)


def test_nonsingular_M_iff_reachable():
    rng = np.random.default_rng(202)
    for _ in range(120):
        N = int(rng.integers(1, 7))
        edges = set()
        for j in range(N + 1):
            for i in range(N + 1):
                if j != i and rng.random() < 0.3:
                    edges.add((j, i))
        t = Topology(N, frozenset(edges))
        gl = build_H(t)
        assert is_nonsingular_M(gl) == leader_reachable(t)


def test_nonsingular_M_rejects_generic_matrix():
    assert not is_nonsingular_M(GroundedLaplacian(np.zeros((2, 2))))


def test_switching_signal_validation():
    with pytest.raises(ValueError):
        SwitchingSignal(mode_count=0, events=((0.0, 0),))
    with pytest.raises(ValueError):
        SwitchingSignal(mode_count=2)
    with pytest.raises(ValueError):
        SwitchingSignal(mode_count=2, period=1.0, phases=((0, 0.5), (1, 0.4)))
    with pytest.raises(ValueError):
        SwitchingSignal(mode_count=2, period=1.0, phases=((2, 1.0),))
    with pytest.raises(ValueError):
        SwitchingSignal(mode_count=2, events=((0.5, 0),))
    with pytest.raises(ValueError):
        SwitchingSignal(mode_count=2, events=((0.0, 0), (0.0, 1)))
    with pytest.raises(ValueError):
        SwitchingSignal(mode_count=1, period=1.0, phases=((0, 1.0),),
                        events=((0.0, 0),))


def test_signal_mode_periodic_demo_pattern():
    sig = SwitchingSignal(mode_count=2, period=1.0,
                          phases=((0, 2.0 / 3.0), (1, 1.0 / 3.0)))
    assert signal_mode(sig, 0.0) == 0
    assert signal_mode(sig, 0.5) == 0
    assert signal_mode(sig, 0.7) == 1
    assert signal_mode(sig, 1.0) == 0
    assert signal_mode(sig, 1.9) == 1
    assert signal_mode(sig, 100.5) == 0


def test_signal_mode_periodic_boundary_shortfall():
    # phase sums can land one ulp short of the period
    sig = SwitchingSignal(mode_count=3, period=1.0,
                          phases=((0, 0.1), (1, 0.7), (2, 0.2)))
    t = math.nextafter(3.0, 0.0)
    assert signal_mode(sig, t) == 2


def test_signal_mode_events():
    sig = SwitchingSignal(mode_count=3,
                          events=((0.0, 1), (2.5, 0), (4.0, 2)))
    assert signal_mode(sig, 0.0) == 1
    assert signal_mode(sig, 2.4999) == 1
    assert signal_mode(sig, 2.5) == 0
    assert signal_mode(sig, 3.9) == 0
    assert signal_mode(sig, 4.0) == 2
    assert signal_mode(sig, 1e9) == 2


def test_signal_mode_negative_time():
    with pytest.raises(InvalidTime):
        signal_mode(SwitchingSignal.static(), -0.001)


def test_static_signal_single_mode():
    sig = SwitchingSignal.static()
    assert sig.mode_count == 1
    for t in (0.0, 0.1, 57.3):
        assert signal_mode(sig, t) == 0
