"""Strategy dispatch for callers that generate many configurations per goal set."""

from __future__ import annotations

import numpy as np

from .grid_graph import DistanceCache
from .monte_carlo import mc_select
from .pibt import Constraints, Strategy, StrategyConfig, run_pibt
from .regret import run_regret
from .rng import Rng


class ConfigGenerator:
    """Binds a distance cache, a goal assignment and a strategy.

    Goal rows are resolved once (or incrementally via :meth:`set_goals`),
    which keeps per-call overhead out of search and simulation loops.
    """

    def __init__(self, dists: DistanceCache, goals, strategy: StrategyConfig) -> None:
        self.dists = dists
        self.strategy = strategy
        self.set_goals(goals)

    def set_goals(self, goals) -> None:
        self.goals = np.array(goals, dtype=np.int32)
        self.rows = self.dists.rows(self.goals)

    def update_goals(self, agents, new_goals) -> None:
        self.goals[agents] = new_goals
        self.rows[agents] = self.dists.rows(new_goals)

    def __call__(
        self, q_from: np.ndarray, order: np.ndarray, rng: Rng, constraints: Constraints | None = None
    ) -> np.ndarray | None:
        s = self.strategy
        if s.kind is Strategy.MC:
            return mc_select(self.dists, self.rows, q_from, self.goals, order, rng, s.k, constraints)
        if s.kind.learns_regret:
            q_to, _, _ = run_regret(self.dists, self.rows, q_from, order, s.kind.code, s.m, s.w, rng, constraints)
            return q_to
        return run_pibt(self.dists, self.rows, q_from, order, s.kind.code, rng, constraints)
