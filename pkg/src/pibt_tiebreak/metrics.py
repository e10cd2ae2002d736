"""Solution validation and evaluation metrics."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .instance import Instance, soc_lower_bound


@dataclass(frozen=True)
class Violation:
    kind: str
    timestep: int
    agents: tuple[int, ...]
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self))


class InvalidSolution(ValueError):
    def __init__(self, violation: Violation) -> None:
        super().__init__(f"{violation.kind} at t={violation.timestep}: {violation.detail}")
        self.violation = violation


def validate_solution(instance: Instance, configs: Sequence) -> Violation | None:
    """First violation found, or ``None`` if the solution is valid.

    Checks the endpoints, then for each step transitionability, vertex
    conflicts and swaps.
    """
    if len(configs) == 0:
        return Violation("empty", 0, (), "solution has no configurations")
    grid = instance.grid
    qs = [np.asarray(q) for q in configs]
    n = instance.num_agents
    for t, q in enumerate(qs):
        if q.shape != (n,):
            return Violation("shape", t, (), f"expected {n} agents, got {q.shape}")
    bad = np.nonzero(qs[0] != instance.starts)[0]
    if bad.size:
        return Violation("start", 0, tuple(int(i) for i in bad), "agents not at their starts")
    bad = np.nonzero(qs[-1] != instance.goals)[0]
    if bad.size:
        return Violation("goal", len(qs) - 1, tuple(int(i) for i in bad), "agents not at their goals")

    for t in range(len(qs)):
        q = qs[t]
        if np.any((q < 0) | (q >= grid.num_vertices)):
            i = int(np.nonzero((q < 0) | (q >= grid.num_vertices))[0][0])
            return Violation("vertex-id", t, (i,), "location is not a vertex")
        order = np.argsort(q, kind="stable")
        dup = np.nonzero(q[order][1:] == q[order][:-1])[0]
        if dup.size:
            a, b = int(order[dup[0]]), int(order[dup[0] + 1])
            return Violation("vertex-conflict", t, (min(a, b), max(a, b)), f"both at vertex {int(q[a])}")
        if t == 0:
            continue
        prev = qs[t - 1]
        moved = prev != q
        adjacent = (grid.nbrs[prev] == q[:, None]).any(axis=1)
        jump = np.nonzero(moved & ~adjacent)[0]
        if jump.size:
            i = int(jump[0])
            return Violation("transition", t, (i,), f"{int(prev[i])} -> {int(q[i])} is not a move")
        where = {int(v): i for i, v in enumerate(prev)}
        for i in np.nonzero(moved)[0]:
            j = where.get(int(q[i]))
            if j is not None and j != i and q[j] == prev[i]:
                return Violation("edge-conflict", t, (min(int(i), j), max(int(i), j)), "agents swap")
    return None


def _agent_costs(instance: Instance, configs: Sequence) -> np.ndarray:
    arr = np.asarray([np.asarray(q) for q in configs])
    off = arr != instance.goals[None, :]
    # cost = 1 + last timestep off the goal, 0 if never off
    T = arr.shape[0]
    last = np.where(off.any(axis=0), T - 1 - np.argmax(off[::-1], axis=0), -1)
    return last + 1


def sum_of_costs(instance: Instance, configs: Sequence) -> int:
    """Per-agent time until it finally rests on its goal, summed."""
    violation = validate_solution(instance, configs)
    if violation is not None:
        raise InvalidSolution(violation)
    return int(_agent_costs(instance, configs).sum())


def normalized_soc(instance: Instance, configs: Sequence, lower_bound: int | None = None) -> float:
    soc = sum_of_costs(instance, configs)
    lb = soc_lower_bound(instance) if lower_bound is None else lower_bound
    if lb == 0:
        return 1.0 if soc == 0 else math.inf
    return soc / lb


def throughput(result) -> float:
    """Task completions per timestep of a :class:`~pibt_tiebreak.lifelong.SimResult`."""
    if result.horizon < 1:
        raise ValueError("horizon must be >= 1")
    return result.tasks_completed / result.horizon
