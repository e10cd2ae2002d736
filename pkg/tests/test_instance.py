import numpy as np
import pytest
from conftest import grid_from
from hypothesis import given
from hypothesis import strategies as st

from pibt_tiebreak import Instance, ScenarioError, parse_scen, random_instance, soc_lower_bound
from pibt_tiebreak.instance import format_scen
from pibt_tiebreak.maps import resolve_map


def scen_line(sx, sy, gx, gy, w=3, h=3):
    return f"0\tm.map\t{w}\t{h}\t{sx}\t{sy}\t{gx}\t{gy}\t0"


def test_single_row_scen(open3):
    inst = parse_scen("version 1\n" + scen_line(0, 0, 2, 1) + "\n", open3, 1)
    assert inst.num_agents == 1
    # x is the column, y the row
    assert open3.coord(int(inst.starts[0])) == (0, 0)
    assert open3.coord(int(inst.goals[0])) == (1, 2)


def test_too_few_rows(open3):
    with pytest.raises(ScenarioError, match="1 entries, 2 requested"):
        parse_scen("version 1\n" + scen_line(0, 0, 2, 1) + "\n", open3, 2)


@pytest.mark.parametrize(
    "text, message",
    [
        ("0\tm.map\t3\t3\t0\t0\t1\t1\t0\n", "version"),
        ("version 1\n" + scen_line(0, 0, 1, 1, w=4) + "\n", "4x3 map"),
        ("version 1\n0\tm.map\t3\t3\t0\t0\n", "9 fields"),
        ("version 1\n" + scen_line(0, 0, 5, 1) + "\n", "line 2"),
    ],
)
def test_scen_errors(open3, text, message):
    with pytest.raises(ScenarioError, match=message):
        parse_scen(text, open3, 1)


def test_scen_blocked_cell():
    g = grid_from(["...", ".@.", "..."])
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scen("version 1\n" + scen_line(1, 1, 0, 0) + "\n", g, 1)


def test_scen_duplicate_starts(open3):
    text = "version 1\n" + scen_line(0, 0, 2, 2) + "\n" + scen_line(0, 0, 1, 1) + "\n"
    with pytest.raises(ScenarioError, match="distinct"):
        parse_scen(text, open3, 2)


@given(st.integers(0, 2**32), st.integers(1, 9))
def test_scen_round_trip(seed, n):
    g = grid_from(["...", "...", "..."])
    inst = random_instance(g, n, seed)
    back = parse_scen(format_scen(inst, "m.map"), g, n)
    assert np.array_equal(back.starts, inst.starts)
    assert np.array_equal(back.goals, inst.goals)


@given(st.integers(0, 2**32), st.integers(1, 30))
def test_random_instance_invariants(seed, n):
    g = grid_from(["......", "..@@..", "......", "......", ".@....", "......"])
    inst = random_instance(g, n, seed)
    for arr in (inst.starts, inst.goals):
        assert len(set(arr.tolist())) == n
        assert arr.min() >= 0 and arr.max() < g.num_vertices


def test_same_seed_same_instance():
    g = resolve_map("random-32-32-10")
    a, b = random_instance(g, 50, 7), random_instance(g, 50, 7)
    assert np.array_equal(a.starts, b.starts) and np.array_equal(a.goals, b.goals)
    c = random_instance(g, 50, 8)
    assert not np.array_equal(a.starts, c.starts)


def test_full_density_covers_every_vertex():
    g = resolve_map("empty-48-48")
    inst = random_instance(g, g.num_vertices, 1)
    assert sorted(inst.starts.tolist()) == list(range(g.num_vertices))


def test_start_frequencies_uniform():
    g = grid_from(["....", "....", "....", "...."])
    counts = np.zeros(g.num_vertices)
    trials = 1000
    for seed in range(trials):
        counts[random_instance(g, 2, seed).starts] += 1
    p = 2 / g.num_vertices
    sigma = np.sqrt(trials * p * (1 - p))
    assert np.all(np.abs(counts - trials * p) < 5 * sigma)


def test_too_many_agents(open3):
    with pytest.raises(ValueError):
        random_instance(open3, 10, 0)


def test_instance_validation(open3):
    with pytest.raises(ValueError):
        Instance(open3, [0, 0], [1, 2])
    with pytest.raises(ValueError):
        Instance(open3, [0, 1], [2, 2])
    with pytest.raises(ValueError):
        Instance(open3, [0], [9])


def test_lower_bound(open3):
    assert soc_lower_bound(Instance(open3, [0, 4], [0, 4])) == 0
    assert soc_lower_bound(Instance(open3, [open3.vertex(0, 0)], [open3.vertex(2, 2)])) == 4


def test_lower_bound_disconnected():
    g = grid_from([".@."])
    with pytest.raises(ValueError, match="cannot reach"):
        soc_lower_bound(Instance(g, [0], [1]))
