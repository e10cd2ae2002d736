import numpy as np
import pytest
from conftest import grid_from
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import bfs
from test_pibt import oracle_valid

from pibt_tiebreak import Rng, StrategyConfig, assign_goal, run_lifelong
from pibt_tiebreak.grid_graph import generate_random_map

STRATEGIES = ["original", "vacancy", "hindrance", "regret", "hr", "rh", "mc"]


def replay(res):
    """Recount completions from the recorded trajectory and goal log."""
    goals = {}
    log = sorted(res.goal_log)
    k = 0
    while k < len(log) and log[k][0] == 0:
        goals[log[k][1]] = log[k][2]
        k += 1
    done = 0
    for t in range(1, res.horizon + 1):
        q = res.trajectory[t]
        done += sum(int(q[i] == g) for i, g in goals.items())
        while k < len(log) and log[k][0] == t:
            assert q[log[k][1]] == goals[log[k][1]], "reassigned before arrival"
            goals[log[k][1]] = log[k][2]
            k += 1
    assert k == len(log)
    return done


def test_single_agent_throughput_matches_mean_distance():
    g = grid_from(["........"] * 8)
    nv = g.num_vertices
    total = sum(sum(bfs(g, s).values()) for s in range(nv))
    expected = 1.0 / (total / (nv * (nv - 1)))
    res = run_lifelong(g, 1, 20_000, StrategyConfig(), seed=3)
    assert res.throughput == pytest.approx(expected, rel=0.05)


def test_two_cell_map_completes_every_step():
    g = grid_from([".."])
    assert run_lifelong(g, 1, 1, StrategyConfig(), seed=0).tasks_completed == 1
    assert run_lifelong(g, 1, 7, StrategyConfig(), seed=0).tasks_completed == 7


@pytest.mark.parametrize("kind", STRATEGIES)
def test_recorded_run_consistent(kind):
    g = generate_random_map(10, 10, 12, seed=6)
    res = run_lifelong(g, 25, 60, StrategyConfig(kind), seed=4, record=True)
    assert len(res.trajectory) == 61 and res.per_step_response.shape == (60,)
    for a, b in zip(res.trajectory, res.trajectory[1:]):
        assert oracle_valid(g, a.tolist(), b.tolist())
    assert replay(res) == res.tasks_completed
    for t, agent, goal in res.goal_log:
        assert 0 <= goal < g.num_vertices
        if t > 0:
            assert goal != res.trajectory[t][agent]


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.sampled_from(STRATEGIES))
def test_fuzzed_runs_valid(seed, kind):
    r = Rng(seed)
    g = generate_random_map(3 + r.below(8), 3 + r.below(8), r.below(6), seed=seed)
    if g.num_vertices < 2:
        return
    n = 1 + r.below(g.num_vertices)
    res = run_lifelong(g, n, 15, StrategyConfig(kind), seed=seed, record=True)
    for a, b in zip(res.trajectory, res.trajectory[1:]):
        assert oracle_valid(g, a.tolist(), b.tolist())
    assert replay(res) == res.tasks_completed


def test_deterministic_and_strategy_independent_tasks():
    g = generate_random_map(12, 12, 14, seed=1)
    a = run_lifelong(g, 30, 40, StrategyConfig("hindrance"), seed=8, record=True)
    b = run_lifelong(g, 30, 40, StrategyConfig("hindrance"), seed=8, record=True)
    assert a.tasks_completed == b.tasks_completed
    assert all(np.array_equal(x, y) for x, y in zip(a.trajectory, b.trajectory))
    c = run_lifelong(g, 30, 40, StrategyConfig("original"), seed=8, record=True)
    assert np.array_equal(a.trajectory[0], c.trajectory[0])
    assert [e for e in a.goal_log if e[0] == 0] == [e for e in c.goal_log if e[0] == 0]


def test_assign_goal_two_cells():
    g = grid_from([".."])
    rng = Rng(0)
    assert {assign_goal(rng, g, 0) for _ in range(50)} == {1}
    assert {assign_goal(rng, g, 1) for _ in range(50)} == {0}


def test_assign_goal_uniform():
    g = grid_from(["...", "...", "..."])
    rng = Rng(11)
    draws = np.array([assign_goal(rng, g, 4) for _ in range(10_000)])
    assert not (draws == 4).any()
    counts = np.bincount(draws, minlength=9)[[0, 1, 2, 3, 5, 6, 7, 8]]
    expected = 10_000 / 8
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 29.9  # 7 dof, p = 1e-4


def test_assign_goal_skips_obstacles():
    g = grid_from([".@.", "@.@", ".@."])
    rng = Rng(2)
    for _ in range(200):
        v = assign_goal(rng, g, 0)
        assert 0 < v < g.num_vertices


def test_argument_errors():
    g = grid_from(["..."])
    with pytest.raises(ValueError):
        run_lifelong(g, 0, 10, StrategyConfig())
    with pytest.raises(ValueError):
        run_lifelong(g, 4, 10, StrategyConfig())
    with pytest.raises(ValueError):
        run_lifelong(g, 1, 0, StrategyConfig())
    with pytest.raises(ValueError):
        assign_goal(Rng(0), grid_from([".@"]), 0)
