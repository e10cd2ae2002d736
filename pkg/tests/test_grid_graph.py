import numpy as np
import pytest
from conftest import grid_from
from hypothesis import given
from hypothesis import strategies as st
from oracles import bfs

from pibt_tiebreak import DistanceCache, MapParseError, distance_table, parse_map, serialize_map
from pibt_tiebreak.grid_graph import (
    UNREACHABLE,
    GridMap,
    generate_random_map,
    generate_sortation_map,
    generate_warehouse_map,
    is_connected,
)
from pibt_tiebreak.maps import MapNotFound, resolve_map
from pibt_tiebreak.rng import Rng


def map_text(rows):
    return "\n".join(["type octile", f"height {len(rows)}", f"width {len(rows[0])}", "map", *rows]) + "\n"


def test_parse_open_2x2():
    g = parse_map(map_text(["..", ".."]))
    assert g.num_vertices == 4
    assert g.max_degree == 2


def test_parse_center_obstacle():
    assert parse_map(map_text(["...", ".@.", "..."])).num_vertices == 8


def test_terrain_characters():
    g = parse_map(map_text([".G@", "OT."]))
    assert g.num_vertices == 3


@pytest.mark.parametrize(
    "text, line",
    [
        ("type octile\nheight 2\nwidth 2\n", "line 4"),
        ("type octile\nheight x\nwidth 2\nmap\n..\n..\n", "line 2"),
        ("type octile\nheight 2\nwidth 2\nmap\n..\n", "line 6"),
        ("type octile\nheight 2\nwidth 2\nmap\n..\n...\n", "line 6"),
        ("type octile\nheight 2\nwidth 2\nmap\n..\n.#\n", "line 6"),
        ("kind octile\nheight 2\nwidth 2\nmap\n..\n..\n", "line 1"),
    ],
)
def test_parse_errors_name_line(text, line):
    with pytest.raises(MapParseError, match=line):
        parse_map(text)


def test_serialize_round_trip():
    g = generate_random_map(9, 7, 10, seed=3)
    back = parse_map(serialize_map(g))
    assert np.array_equal(back.passable, g.passable)


def test_neighbors_center_corner_isolated():
    g = grid_from(["...", "...", "..."])
    assert len(g.neighbors(g.vertex(1, 1))) == 4
    assert len(g.neighbors(g.vertex(0, 0))) == 2
    iso = grid_from([".@.", "@.@", ".@."])
    assert iso.neighbors(iso.vertex(1, 1)) == []


def test_vertex_rejects_blocked():
    g = grid_from([".@"])
    with pytest.raises(ValueError):
        g.vertex(0, 1)


def test_distance_open_and_blocked_center():
    g = grid_from(["...", "...", "..."])
    t = distance_table(g, g.vertex(2, 2))
    assert t[g.vertex(2, 2)] == 0
    assert t[g.vertex(0, 0)] == 4
    h = grid_from(["...", ".@.", "..."])
    assert distance_table(h, h.vertex(2, 2))[h.vertex(0, 0)] == 4


def test_unreachable_sentinel():
    g = grid_from([".@."])
    assert distance_table(g, 0)[1] == UNREACHABLE


@given(st.integers(3, 12), st.integers(3, 12), st.integers(0, 2**16), st.data())
def test_distances_match_oracle_bfs(h, w, seed, data):
    obstacles = data.draw(st.integers(0, h * w // 3))
    mask = np.ones(h * w, dtype=bool)
    mask[Rng(seed).sample_without_replacement(h * w, obstacles)] = False
    if not mask.any():
        return
    g = GridMap.from_mask(mask.reshape(h, w))
    goal = data.draw(st.integers(0, g.num_vertices - 1))
    ref = bfs(g, goal)
    table = distance_table(g, goal)
    for v in range(g.num_vertices):
        assert table[v] == ref.get(v, UNREACHABLE)


def test_cache_memoises_and_bounds():
    g = generate_random_map(10, 10, 15, seed=1)
    cache = DistanceCache(g, capacity=3)
    r = cache.rows([0, 1, 2])
    assert len(set(r.tolist())) == 3
    assert len(cache) == 3
    cache.rows([5])  # evicts the least recently used
    assert len(cache) == 3
    for goal in (0, 5, 7, 1):
        assert cache.dist(goal, goal) == 0
        assert np.array_equal(cache.table(goal).dist, distance_table(g, goal).dist)
    with pytest.raises(RuntimeError):
        cache.rows([10, 11, 12, 13])


def test_sortation_5x5():
    g = generate_sortation_map(5, 5)
    assert g.num_vertices == 21
    assert not g.passable[1, 1] and not g.passable[3, 3] and g.passable[2, 2]
    assert is_connected(g)


def test_sortation_3x3():
    g = generate_sortation_map(3, 3)
    assert g.num_vertices == 8 and not g.passable[1, 1]


@given(st.integers(3, 30), st.integers(3, 30))
def test_sortation_always_connected(rows, cols):
    g = generate_sortation_map(rows, cols)
    ref = bfs(g, 0)
    assert len(ref) == g.num_vertices


def test_sortation_rejects_small():
    with pytest.raises(ValueError):
        generate_sortation_map(2, 5)


def test_benchmark_sizes():
    assert resolve_map("random-32-32-10").num_vertices == 922
    assert resolve_map("room-64-64-8").num_vertices == 3232
    assert resolve_map("empty-48-48").num_vertices == 2304


def test_warehouse_stand_in_shape():
    g = generate_warehouse_map()
    assert (g.height, g.width) == (84, 170)
    assert g.num_vertices == 9776
    assert is_connected(g)


def test_resolve_prefers_data_dir(tmp_path, monkeypatch):
    (tmp_path / "random-32-32-10.map").write_text(map_text(["..", ".."]))
    monkeypatch.setenv("PIBT_TIEBREAK_DATA", str(tmp_path))
    assert resolve_map("random-32-32-10").num_vertices == 4


def test_resolve_missing():
    with pytest.raises(MapNotFound):
        resolve_map("no-such-map")
