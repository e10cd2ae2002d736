import json
import math

import numpy as np
import pytest
from conftest import grid_from
from hypothesis import given
from hypothesis import strategies as st

from pibt_tiebreak import Instance, normalized_soc, sum_of_costs, throughput, validate_solution
from pibt_tiebreak.lifelong import SimResult
from pibt_tiebreak.metrics import InvalidSolution


@pytest.fixture
def row5():
    return grid_from(["....."])


def path(*qs):
    return [np.array(q) for q in qs]


def test_valid_single_agent(row5):
    inst = Instance(row5, [0], [4])
    sol = path([0], [1], [2], [3], [4])
    assert validate_solution(inst, sol) is None
    assert sum_of_costs(inst, sol) == 4
    assert normalized_soc(inst, sol) == 1.0


def test_swap_detected(row5):
    inst = Instance(row5, [1, 2], [2, 1])
    v = validate_solution(inst, path([1, 2], [2, 1]))
    assert v.kind == "edge-conflict" and v.timestep == 1 and v.agents == (0, 1)


def test_conflicts_mid_path(row5):
    inst = Instance(row5, [0, 4], [3, 1])
    v = validate_solution(inst, path([0, 4], [1, 3], [2, 2], [3, 1]))
    assert v.kind == "vertex-conflict" and v.timestep == 2 and v.agents == (0, 1)
    v = validate_solution(inst, path([0, 4], [1, 3], [2, 3], [3, 2], [3, 1]))
    assert v.kind == "edge-conflict" and v.timestep == 3


def test_teleport_detected(row5):
    inst = Instance(row5, [0], [3])
    v = validate_solution(inst, path([0], [2], [3]))
    assert v.kind == "transition" and v.timestep == 1 and v.agents == (0,)


@pytest.mark.parametrize(
    "sol, kind",
    [
        ([], "empty"),
        ([[1], [2]], "start"),
        ([[0], [1]], "goal"),
        ([[0, 1]], "shape"),
    ],
)
def test_endpoint_violations(row5, sol, kind):
    inst = Instance(row5, [0], [2])
    assert validate_solution(inst, path(*sol)).kind == kind


def test_violation_json(row5):
    inst = Instance(row5, [0], [3])
    v = validate_solution(inst, path([0], [2], [3]))
    assert json.loads(v.to_json()) == {"kind": "transition", "timestep": 1, "agents": [0], "detail": "0 -> 2 is not a move"}


def test_invalid_solution_raises(row5):
    inst = Instance(row5, [0], [3])
    with pytest.raises(InvalidSolution):
        sum_of_costs(inst, path([0], [2], [3]))


def test_cost_counts_final_arrival(row5):
    # reaches goal 3 at t=3, leaves at t=5, returns at t=7 and rests
    inst = Instance(row5, [0], [3])
    sol = path([0], [1], [2], [3], [3], [4], [4], [3], [3], [3])
    assert sum_of_costs(inst, sol) == 7


def test_agent_at_goal_costs_zero(row5):
    inst = Instance(row5, [0, 2], [0, 4])
    assert sum_of_costs(inst, path([0, 2], [0, 3], [0, 4])) == 2


def test_soc_ratio():
    g = grid_from(["....", "....", "...."])
    inst = Instance(g, [0, 11], [4, 7])
    # agent 0 detours 0 -> 1 -> 5 -> 4 (cost 3, bound 1); agent 1 waits, arrives at t=5 (bound 1)
    sol = path([0, 11], [1, 11], [5, 11], [4, 11], [4, 11], [4, 7])
    assert sum_of_costs(inst, sol) == 8
    assert normalized_soc(inst, sol) == pytest.approx(8 / 2)


def test_zero_lower_bound(row5):
    inst = Instance(row5, [0], [0])
    assert normalized_soc(inst, path([0])) == 1.0
    assert normalized_soc(inst, path([0], [1], [0]), lower_bound=0) == math.inf


@given(st.integers(0, 5))
def test_appending_stays_keeps_soc(extra):
    g = grid_from(["...", "...", "..."])
    inst = Instance(g, [0, 8], [2, 6])
    sol = path([0, 8], [1, 7], [2, 6])
    assert sum_of_costs(inst, sol + [sol[-1]] * extra) == 4


def test_throughput():
    assert throughput(SimResult(0, 1000, np.zeros(1000))) == 0.0
    assert throughput(SimResult(50, 1000, np.zeros(1000))) == 0.05
