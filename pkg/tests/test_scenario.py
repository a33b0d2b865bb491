from pathlib import Path

import numpy as np
import pytest

from leadersync import (ScenarioError, load_scenario, parse_model,
                        parse_scenario, scenario_text, write_scenario)
from leadersync.demos import static_demo, switching_demo

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

TINY = """\
name tiny
A 2  -0.38 0.72  -0.68 0.42
B 2 1  0.26 0.31
mu1 1.0
mu2 1.0
topology 2  0 1  1 2
T_low 0.001
T_high 0.01
grid_h 0.001
seed 7
horizon 1.0
x0 1.0 -1.0
x1 2.0 0.5
x2 -1.0 0.4
"""


def _mutate(remove=None, append=None, replace=None):
    lines = TINY.splitlines()
    if remove is not None:
        lines = [l for l in lines if not l.startswith(remove + " ")]
    if replace is not None:
        old, new = replace
        lines = [new if l.startswith(old + " ") else l for l in lines]
    if append is not None:
        lines.append(append)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------- round trips

def test_static_demo_text_round_trip():
    sc = static_demo()
    assert parse_scenario(scenario_text(sc)) == sc


def test_switching_demo_text_round_trip():
    sc = switching_demo()
    assert parse_scenario(scenario_text(sc)) == sc


def test_file_round_trip(tmp_path):
    sc = switching_demo()
    path = tmp_path / "sc.txt"
    write_scenario(sc, path)
    assert load_scenario(path) == sc


def test_bundled_files_are_canonical():
    assert (SCENARIO_DIR / "static.txt").read_text() == \
        scenario_text(static_demo())
    assert (SCENARIO_DIR / "switching.txt").read_text() == \
        scenario_text(switching_demo())


def test_optional_fields_round_trip():
    sc = static_demo()
    text = scenario_text(sc)
    assert "out_traj" in text
    assert sc.D is None and sc.K is None
    explicit = _mutate(append="D 1.0 0.5\nK 0.8 1.2\noutput_dt 0.01")
    parsed = parse_scenario(explicit)
    assert np.allclose(parsed.D, [1.0, 0.5])
    assert np.allclose(parsed.K, [[0.8, 1.2]])
    assert parsed.output_dt == 0.01
    assert parse_scenario(scenario_text(parsed)) == parsed


def test_tiny_parses_and_tolerates_comments():
    noisy = TINY.replace("mu1 1.0", "mu1 1.0   # weight")
    noisy = "# leading comment\n\n" + noisy + "\n   \n# trailing\n"
    sc = parse_scenario(noisy)
    assert sc.name == "tiny"
    assert sc.mu1 == 1.0
    assert sc.topologies[0].N == 2
    assert sc.signal.mode_count == 1
    assert np.allclose(sc.x0_followers, [[2.0, 0.5], [-1.0, 0.4]])


def test_parse_model_ignores_scenario_keys():
    ms = parse_model(TINY)
    assert ms.name == "tiny"
    assert np.allclose(ms.A, [[-0.38, 0.72], [-0.68, 0.42]])
    assert np.allclose(ms.B, [[0.26], [0.31]])
    assert ms.mu1 == ms.mu2 == 1.0


# --------------------------------------------------------- error paths

def test_unknown_key_reports_line():
    with pytest.raises(ScenarioError) as e:
        parse_scenario(_mutate(append="bogus 3"))
    assert e.value.line == len(TINY.splitlines()) + 1
    assert "unknown key" in str(e.value)


def test_duplicate_key_reports_line():
    with pytest.raises(ScenarioError, match="duplicate key seed"):
        parse_scenario(_mutate(append="seed 8"))


def test_missing_required_key():
    with pytest.raises(ScenarioError, match="missing required key horizon"):
        parse_scenario(_mutate(remove="horizon"))


def test_bad_number_reports_line_and_key():
    with pytest.raises(ScenarioError, match="line 4: mu1: not a number"):
        parse_scenario(_mutate(replace=("mu1", "mu1 abc")))


def test_odd_edge_tokens():
    with pytest.raises(ScenarioError, match="pairs"):
        parse_scenario(_mutate(replace=("topology", "topology 2  0 1  1")))


def test_follower_state_out_of_range():
    with pytest.raises(ScenarioError, match="x3: follower index exceeds"):
        parse_scenario(_mutate(append="x3 0.0 0.0"))


def test_missing_follower_state():
    with pytest.raises(ScenarioError, match="missing required key x2"):
        parse_scenario(_mutate(remove="x2"))


def test_wrong_state_arity():
    with pytest.raises(ScenarioError, match="x0: expected 2 entries"):
        parse_scenario(_mutate(replace=("x0", "x0 1.0")))


def test_seed_range():
    with pytest.raises(ScenarioError, match="unsigned 64-bit"):
        parse_scenario(_mutate(replace=("seed", "seed -1")))
    with pytest.raises(ScenarioError, match="unsigned 64-bit"):
        parse_scenario(_mutate(replace=("seed", f"seed {1 << 64}")))


def test_interval_bounds_ordered():
    with pytest.raises(ScenarioError, match="T_low"):
        parse_scenario(_mutate(replace=("T_low", "T_low 0.5")))


def test_period_and_event_conflict():
    bad = _mutate(append="period 1.0\nphase 0 1.0\nevent 0.0 0")
    with pytest.raises(ScenarioError):
        parse_scenario(bad)


def test_phase_without_period():
    with pytest.raises(ScenarioError, match="period"):
        parse_scenario(_mutate(append="phase 0 1.0"))


def test_static_rejects_multiple_topologies():
    bad = _mutate(append="topology 2  0 1  0 2")
    with pytest.raises(ScenarioError):
        parse_scenario(bad)


def test_gain_arity():
    with pytest.raises(ScenarioError, match=r"K: expected 1\*2 entries"):
        parse_scenario(_mutate(append="K 0.8 1.2 0.5"))


def test_scaling_positivity():
    with pytest.raises(ScenarioError, match="D entries must be positive"):
        parse_scenario(_mutate(append="D 1.0 0.0"))
    with pytest.raises(ScenarioError, match="D: expected 2 entries"):
        parse_scenario(_mutate(append="D 1.0"))


def test_bad_topology_edge():
    with pytest.raises(ScenarioError, match="topology"):
        parse_scenario(_mutate(replace=("topology", "topology 2  0 0")))


def test_model_validation():
    with pytest.raises(ScenarioError, match="mu1 must be positive"):
        parse_scenario(_mutate(replace=("mu1", "mu1 -1.0")))
    with pytest.raises(ScenarioError, match="B: row count"):
        parse_scenario(_mutate(replace=("B", "B 1 1  0.26")))
    with pytest.raises(ScenarioError, match="name"):
        parse_scenario(_mutate(replace=("name", "name two tokens")))
