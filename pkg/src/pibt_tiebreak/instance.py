"""One-shot MAPF instances and MovingAI ``.scen`` files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid_graph import UNREACHABLE, DistanceCache, GridMap
from .rng import Rng


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Instance:
    grid: GridMap
    starts: np.ndarray
    goals: np.ndarray

    def __post_init__(self) -> None:
        starts = np.array(self.starts, dtype=np.int32)
        goals = np.array(self.goals, dtype=np.int32)
        if starts.ndim != 1 or starts.shape != goals.shape or starts.size < 1:
            raise ValueError("starts and goals must be equally long, non-empty sequences")
        nv = self.grid.num_vertices
        if starts.min() < 0 or goals.min() < 0 or starts.max() >= nv or goals.max() >= nv:
            raise ValueError("start or goal is not a passable vertex")
        if np.unique(starts).size != starts.size:
            raise ValueError("starts must be pairwise distinct")
        if np.unique(goals).size != goals.size:
            raise ValueError("goals must be pairwise distinct")
        starts.flags.writeable = False
        goals.flags.writeable = False
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "goals", goals)

    @property
    def num_agents(self) -> int:
        return int(self.starts.shape[0])


def parse_scen(text: str, grid: GridMap, n: int) -> Instance:
    """First ``n`` rows of a MovingAI scenario as an instance.

    Rows are ``bucket map width height sx sy gx gy optimal`` (tab
    separated, x = column, y = row); bucket and optimal are ignored.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip().startswith("version"):
        raise ScenarioError("line 1: expected 'version' header")
    rows = [(i + 2, ln) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if n < 1:
        raise ScenarioError("agent count must be >= 1")
    if len(rows) < n:
        raise ScenarioError(f"scenario has {len(rows)} entries, {n} requested")
    starts, goals = [], []
    for lineno, ln in rows[:n]:
        fields = ln.split("\t") if "\t" in ln else ln.split()
        if len(fields) < 9:
            raise ScenarioError(f"line {lineno}: expected 9 fields, found {len(fields)}")
        try:
            w, h, sx, sy, gx, gy = (int(f) for f in fields[2:8])
        except ValueError:
            raise ScenarioError(f"line {lineno}: non-integer field") from None
        if (w, h) != (grid.width, grid.height):
            raise ScenarioError(f"line {lineno}: scenario is for a {w}x{h} map, map is {grid.width}x{grid.height}")
        try:
            starts.append(grid.vertex(sy, sx))
            goals.append(grid.vertex(gy, gx))
        except ValueError as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from None
    try:
        return Instance(grid, starts, goals)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def format_scen(instance: Instance, map_name: str = "") -> str:
    grid = instance.grid
    dists = DistanceCache(grid)
    rows = dists.rows(instance.goals)
    optimal = dists.pool[rows, instance.starts]
    out = ["version 1"]
    for s, g, d in zip(instance.starts, instance.goals, optimal):
        sy, sx = grid.coord(int(s))
        gy, gx = grid.coord(int(g))
        out.append(f"0\t{map_name}\t{grid.width}\t{grid.height}\t{sx}\t{sy}\t{gx}\t{gy}\t{int(d)}")
    return "\n".join(out) + "\n"


def load_scen(path, grid: GridMap, n: int) -> Instance:
    return parse_scen(Path(path).read_text(), grid, n)


def random_instance(grid: GridMap, n: int, seed: int) -> Instance:
    """Uniform starts and, independently, uniform goals, each without replacement."""
    nv = grid.num_vertices
    if not 1 <= n <= nv:
        raise ValueError(f"agent count {n} must be in [1, {nv}]")
    rng = Rng(seed)
    starts = rng.sample_without_replacement(nv, n)
    goals = rng.sample_without_replacement(nv, n)
    return Instance(grid, starts, goals)


def soc_lower_bound(instance: Instance, dists: DistanceCache | None = None) -> int:
    """Sum of start-to-goal shortest path lengths."""
    dists = dists or DistanceCache(instance.grid)
    d = dists.lookup(instance.starts, instance.goals).astype(np.int64)
    bad = np.nonzero(d >= UNREACHABLE)[0]
    if bad.size:
        raise ValueError(f"agent {int(bad[0])} cannot reach its goal")
    return int(d.sum())
