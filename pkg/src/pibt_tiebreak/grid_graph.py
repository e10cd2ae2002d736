"""4-connected grid maps and exact shortest-path distance tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .rng import Rng

# Distinguished "no path" distance. Large enough to rank last in every
# preference comparison, small enough that differences never overflow int32.
UNREACHABLE = 1 << 30

PASSABLE = frozenset(".G")
BLOCKED = frozenset("@OT")

# Neighbour enumeration order is fixed: up, down, left, right.
MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


class MapParseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GridMap:
    """Passable-cell graph of a rectangular grid.

    Vertices are dense ids over passable cells in row-major order.
    ``nbrs[v]`` holds up/down/left/right neighbour ids with ``-1`` where
    the move leaves the grid or hits an obstacle.
    """

    width: int
    height: int
    passable: np.ndarray
    vertex_ids: np.ndarray
    cells: np.ndarray
    nbrs: np.ndarray
    name: str = ""

    @classmethod
    def from_mask(cls, passable, name: str = "") -> "GridMap":
        mask = np.array(passable, dtype=bool)
        if mask.ndim != 2:
            raise ValueError("passable mask must be 2-D")
        height, width = mask.shape
        vertex_ids = np.full(mask.shape, -1, dtype=np.int32)
        rows, cols = np.nonzero(mask)
        vertex_ids[rows, cols] = np.arange(rows.size, dtype=np.int32)
        cells = np.stack([rows, cols], axis=1).astype(np.int32)
        nbrs = np.full((rows.size, 4), -1, dtype=np.int32)
        for k, (dr, dc) in enumerate(MOVES):
            r2, c2 = rows + dr, cols + dc
            inside = (r2 >= 0) & (r2 < height) & (c2 >= 0) & (c2 < width)
            ids = np.full(rows.size, -1, dtype=np.int32)
            ids[inside] = vertex_ids[r2[inside], c2[inside]]
            nbrs[:, k] = ids
        for arr in (mask, vertex_ids, cells, nbrs):
            arr.flags.writeable = False
        return cls(width, height, mask, vertex_ids, cells, nbrs, name)

    @property
    def num_vertices(self) -> int:
        return int(self.cells.shape[0])

    @property
    def max_degree(self) -> int:
        if self.num_vertices == 0:
            return 0
        return int((self.nbrs >= 0).sum(axis=1).max())

    def vertex(self, row: int, col: int) -> int:
        """Vertex id of cell ``(row, col)``; raises if blocked or outside."""
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise ValueError(f"cell ({row}, {col}) is outside the {self.height}x{self.width} map")
        v = int(self.vertex_ids[row, col])
        if v < 0:
            raise ValueError(f"cell ({row}, {col}) is blocked")
        return v

    def coord(self, v: int) -> tuple[int, int]:
        r, c = self.cells[v]
        return int(r), int(c)

    def neighbors(self, v: int) -> list[int]:
        return [int(u) for u in self.nbrs[v] if u >= 0]


def parse_map(text: str, name: str = "") -> GridMap:
    """Parse a MovingAI ``.map`` file.

    Raises:
        MapParseError: on a malformed header, a wrong number of rows, a row
            of the wrong length or an unknown terrain character. The message
            names the offending (1-based) line.
    """
    lines = text.splitlines()
    if len(lines) < 4:
        raise MapParseError(f"line {len(lines) + 1}: truncated header")

    def header(idx: int, key: str) -> str:
        parts = lines[idx].split()
        if len(parts) != 2 or parts[0] != key:
            raise MapParseError(f"line {idx + 1}: expected '{key} <value>', got {lines[idx]!r}")
        return parts[1]

    header(0, "type")
    try:
        height = int(header(1, "height"))
        width = int(header(2, "width"))
    except ValueError as exc:
        if isinstance(exc, MapParseError):
            raise
        raise MapParseError(f"line 2-3: non-integer dimension ({exc})") from None
    if lines[3].strip() != "map":
        raise MapParseError(f"line 4: expected 'map', got {lines[3]!r}")
    if height <= 0 or width <= 0:
        raise MapParseError("line 2-3: dimensions must be positive")

    body = lines[4:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != height:
        raise MapParseError(f"line {5 + min(len(body), height)}: expected {height} grid rows, found {len(body)}")

    mask = np.zeros((height, width), dtype=bool)
    for r, row in enumerate(body):
        row = row.rstrip("\r")
        if len(row) != width:
            raise MapParseError(f"line {r + 5}: expected {width} characters, found {len(row)}")
        for c, ch in enumerate(row):
            if ch in PASSABLE:
                mask[r, c] = True
            elif ch not in BLOCKED:
                raise MapParseError(f"line {r + 5}: unknown terrain character {ch!r}")
    return GridMap.from_mask(mask, name)


def serialize_map(grid: GridMap) -> str:
    rows = ["".join("." if p else "@" for p in line) for line in grid.passable]
    return "\n".join(["type octile", f"height {grid.height}", f"width {grid.width}", "map", *rows]) + "\n"


def load_map(path) -> GridMap:
    path = Path(path)
    return parse_map(path.read_text(), name=path.name.split(".")[0])


def neighbors(grid: GridMap, v: int) -> list[int]:
    return grid.neighbors(v)


@njit(cache=True)
def _bfs(nbrs, goal, out):
    n = nbrs.shape[0]
    for v in range(n):
        out[v] = UNREACHABLE
    queue = np.empty(n, dtype=np.int32)
    out[goal] = 0
    queue[0] = goal
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        d = out[u] + 1
        for k in range(4):
            w = nbrs[u, k]
            if w >= 0 and out[w] == UNREACHABLE:
                out[w] = d
                queue[tail] = w
                tail += 1


@dataclass(frozen=True)
class DistanceTable:
    """Exact distances from every vertex to ``goal`` (``UNREACHABLE`` if none)."""

    goal: int
    dist: np.ndarray

    def __getitem__(self, v: int) -> int:
        return int(self.dist[v])


def distance_table(grid: GridMap, goal: int) -> DistanceTable:
    if not 0 <= goal < grid.num_vertices:
        raise ValueError(f"goal {goal} is not a vertex")
    out = np.empty(grid.num_vertices, dtype=np.int32)
    _bfs(grid.nbrs, np.int32(goal), out)
    out.flags.writeable = False
    return DistanceTable(goal, out)


@dataclass(eq=False)
class DistanceCache:
    """Lazily built, memoised distance tables keyed by goal vertex.

    Tables live as rows of one contiguous ``int32`` pool so that compiled
    kernels can address them by row index. ``capacity`` bounds the number
    of resident tables (least recently used rows are recycled); ``None``
    means unbounded. A bounded cache must hold at least as many tables as
    there are distinct goals in any single request.
    """

    grid: GridMap
    capacity: int | None = None
    pool: np.ndarray = field(init=False, repr=False)
    _slot_of_goal: np.ndarray = field(init=False, repr=False)
    _goal_of_slot: np.ndarray = field(init=False, repr=False)
    _last_used: np.ndarray = field(init=False, repr=False)
    _size: int = field(init=False, default=0)
    _tick: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        if self.capacity is not None and self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        nv = self.grid.num_vertices
        initial = 16 if self.capacity is None else min(16, self.capacity)
        self.pool = np.empty((initial, nv), dtype=np.int32)
        self._slot_of_goal = np.full(nv, -1, dtype=np.int64)
        self._goal_of_slot = np.full(initial, -1, dtype=np.int64)
        self._last_used = np.zeros(initial, dtype=np.int64)

    def __len__(self) -> int:
        return self._size

    def _grow(self) -> None:
        old = self.pool.shape[0]
        new = old * 2 if self.capacity is None else min(old * 2, self.capacity)
        pool = np.empty((new, self.pool.shape[1]), dtype=np.int32)
        pool[:old] = self.pool
        self.pool = pool
        self._goal_of_slot = np.concatenate([self._goal_of_slot, np.full(new - old, -1, dtype=np.int64)])
        self._last_used = np.concatenate([self._last_used, np.zeros(new - old, dtype=np.int64)])

    def _free_slot(self, pinned: np.ndarray) -> int:
        if self._size < self.pool.shape[0]:
            self._size += 1
            return self._size - 1
        if self.capacity is None or self.pool.shape[0] < self.capacity:
            self._grow()
            self._size += 1
            return self._size - 1
        recency = self._last_used.copy()
        recency[pinned] = np.iinfo(np.int64).max
        slot = int(np.argmin(recency))
        if recency[slot] == np.iinfo(np.int64).max:
            raise RuntimeError("distance cache capacity is smaller than the number of goals in one request")
        self._slot_of_goal[self._goal_of_slot[slot]] = -1
        return slot

    def rows(self, goals) -> np.ndarray:
        """Pool row index of each goal's table, building missing tables."""
        goals = np.asarray(goals, dtype=np.int64)
        self._tick += 1
        slots = self._slot_of_goal[goals]
        missing = np.unique(goals[slots < 0])
        if missing.size:
            pinned = slots[slots >= 0]
            for g in missing:
                slot = self._free_slot(pinned)
                _bfs(self.grid.nbrs, np.int32(g), self.pool[slot])
                self._slot_of_goal[g] = slot
                self._goal_of_slot[slot] = g
                pinned = np.append(pinned, slot)
            slots = self._slot_of_goal[goals]
        self._last_used[slots] = self._tick
        return slots.astype(np.int32)

    def table(self, goal: int) -> DistanceTable:
        row = int(self.rows([goal])[0])
        view = self.pool[row].copy()
        view.flags.writeable = False
        return DistanceTable(int(goal), view)

    def dist(self, v: int, goal: int) -> int:
        row = int(self.rows([goal])[0])
        return int(self.pool[row, v])

    def lookup(self, vertices, goals) -> np.ndarray:
        """Elementwise ``dist(vertices[k], goals[k])``."""
        # rows() may reallocate the pool, so resolve it first
        rows = self.rows(goals)
        return self.pool[rows, np.asarray(vertices)]


def is_connected(grid: GridMap) -> bool:
    if grid.num_vertices == 0:
        return True
    return bool((distance_table(grid, 0).dist < UNREACHABLE).all())


def generate_sortation_map(rows: int, cols: int) -> GridMap:
    """Single-cell obstacles on the odd (row, col) lattice.

    This reproduces "an obstacle every two rows/columns"; the official
    200x140 sortation map differs slightly, so prefer that file when
    available.
    """
    if rows < 3 or cols < 3:
        raise ValueError(f"sortation map needs at least 3x3 cells, got {rows}x{cols}")
    mask = np.ones((rows, cols), dtype=bool)
    mask[1::2, 1::2] = False
    return GridMap.from_mask(mask, name=f"sortation-{cols}-{rows}")


def generate_empty_map(height: int, width: int) -> GridMap:
    return GridMap.from_mask(np.ones((height, width), dtype=bool), name=f"empty-{width}-{height}")


def generate_random_map(height: int, width: int, obstacles: int, seed: int = 0) -> GridMap:
    """Uniformly scattered obstacles, resampled until the free space is connected."""
    cells = height * width
    if not 0 <= obstacles < cells:
        raise ValueError("obstacle count must be in [0, cells)")
    rng = Rng(seed)
    for _ in range(10_000):
        blocked = rng.sample_without_replacement(cells, obstacles)
        mask = np.ones(cells, dtype=bool)
        mask[blocked] = False
        grid = GridMap.from_mask(mask.reshape(height, width), name=f"random-{width}-{height}")
        if is_connected(grid):
            return grid
    raise RuntimeError("could not draw a connected random map")


def generate_warehouse_map(
    shelf_cols: int = 10,
    shelf_rows: int = 20,
    shelf_length: int = 10,
    shelf_depth: int = 2,
    aisle: int = 2,
    side_margin: int = 25,
) -> GridMap:
    """Shelf-block warehouse with a one-cell wall border.

    Shelves are ``shelf_length`` wide and ``shelf_depth`` deep, laid out in a
    ``shelf_rows`` x ``shelf_cols`` block separated by ``aisle``-wide
    corridors (also above the first and below the last shelf row), with
    open staging areas of ``side_margin`` columns left and right. The
    defaults give 170x84 with |V| = 9,776.
    """
    width = 2 + 2 * side_margin + shelf_cols * shelf_length + (shelf_cols - 1) * aisle
    height = 2 + shelf_rows * shelf_depth + (shelf_rows + 1) * aisle
    mask = np.zeros((height, width), dtype=bool)
    mask[1:-1, 1:-1] = True
    for br in range(shelf_rows):
        top = 1 + aisle + br * (shelf_depth + aisle)
        for bc in range(shelf_cols):
            left = 1 + side_margin + bc * (shelf_length + aisle)
            mask[top : top + shelf_depth, left : left + shelf_length] = False
    return GridMap.from_mask(mask, name="warehouse")

