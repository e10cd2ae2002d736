"""Lifelong MAPF: one-step PIBT planning with immediate random goal reassignment."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .generator import ConfigGenerator
from .grid_graph import DistanceCache, GridMap
from .pibt import PriorityState, StrategyConfig, update_priorities
from .rng import Rng, mix_seed


@dataclass
class SimResult:
    """Outcome of a lifelong run.

    ``per_step_response`` is the wallclock time (seconds) spent planning each
    timestep. With recording on, ``trajectory`` holds ``horizon + 1``
    configurations and ``goal_log`` the ``(timestep, agent, goal)``
    assignments, timestep 0 being the initial goals.
    """

    tasks_completed: int
    horizon: int
    per_step_response: np.ndarray
    trajectory: list[np.ndarray] | None = None
    goal_log: list[tuple[int, int, int]] | None = field(default=None, repr=False)

    @property
    def throughput(self) -> float:
        return self.tasks_completed / self.horizon

    @property
    def mean_response_ms(self) -> float:
        return float(self.per_step_response.mean() * 1000.0)

    @property
    def p99_response_ms(self) -> float:
        return float(np.percentile(self.per_step_response, 99) * 1000.0)

    def summary(self) -> dict:
        return {
            "throughput": self.throughput,
            "tasks_completed": self.tasks_completed,
            "horizon": self.horizon,
            "mean_response_ms": self.mean_response_ms,
            "p99_response_ms": self.p99_response_ms,
        }


def assign_goal(rng: Rng, grid: GridMap, current: int) -> int:
    """Uniform passable vertex other than ``current``."""
    nv = grid.num_vertices
    if nv < 2:
        raise ValueError("goal assignment needs at least two passable cells")
    while True:
        g = rng.below(nv)
        if g != current:
            return g


def run_lifelong(
    grid: GridMap,
    n: int,
    horizon: int,
    strategy: StrategyConfig,
    seed: int = 0,
    record: bool = False,
    dists: DistanceCache | None = None,
) -> SimResult:
    """Simulate ``horizon`` timesteps with ``n`` agents.

    Three independent streams are derived from ``seed``: start sampling,
    task assignment and planning. Starts and the task stream therefore do
    not depend on the strategy.
    """
    nv = grid.num_vertices
    if not 1 <= n <= nv:
        raise ValueError(f"agent count {n} must be in [1, {nv}]")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    dists = dists or DistanceCache(grid)
    start_rng = Rng(mix_seed(seed, 0))
    task_rng = Rng(mix_seed(seed, 1))
    plan_rng = Rng(mix_seed(seed, 2))

    q = start_rng.sample_without_replacement(nv, n)
    goals = np.array([assign_goal(task_rng, grid, int(v)) for v in q], dtype=np.int32)
    gen = ConfigGenerator(dists, goals, strategy)
    priorities = PriorityState.initial(dists, q, goals)

    trajectory = [q.copy()] if record else None
    goal_log = [(0, i, int(g)) for i, g in enumerate(goals)] if record else None
    response = np.empty(horizon)
    completed = 0

    for t in range(1, horizon + 1):
        t0 = time.perf_counter()
        q = gen(q, priorities.order(), plan_rng)
        reached = np.nonzero(q == gen.goals)[0]
        completed += reached.size
        priorities = update_priorities(priorities, q, gen.goals)
        if reached.size:
            new_goals = np.array([assign_goal(task_rng, grid, int(q[i])) for i in reached], dtype=np.int32)
            gen.update_goals(reached, new_goals)
        response[t - 1] = time.perf_counter() - t0
        if record:
            trajectory.append(q.copy())
            goal_log.extend((t, int(i), int(g)) for i, g in zip(reached, gen.goals[reached]))

    return SimResult(completed, horizon, response, trajectory, goal_log)
