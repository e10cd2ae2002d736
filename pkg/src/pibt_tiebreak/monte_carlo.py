"""Monte-Carlo baseline: best of k independently seeded Original PIBT runs."""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .grid_graph import UNREACHABLE, DistanceCache
from .pibt import Configuration, Constraints, PriorityState, StrategyConfig, run_pibt
from .rng import Rng, mix_seed


def transition_cost_g(q, q_next, goals) -> int:
    """Agents that are not resting on their goal throughout the transition."""
    q, q_next, goals = (np.asarray(a) for a in (q, q_next, goals))
    if q.shape != q_next.shape:
        raise ValueError("configurations differ in agent count")
    return int(np.count_nonzero(~((q == q_next) & (q_next == goals))))


def heuristic_h(dists: DistanceCache, q, goals) -> int:
    q = np.asarray(q)
    d = dists.lookup(q, goals).astype(np.int64)
    bad = np.nonzero(d >= UNREACHABLE)[0]
    if bad.size:
        raise ValueError(f"agent {int(bad[0])} cannot reach its goal")
    return int(d.sum())


def mc_select(dists, rows, q_from, goals, order, rng: Rng, k: int, constraints=None):
    """Low-level driver shared by :func:`mc_step` and the search."""
    step_seed = rng.next_u64()
    best, best_cost = None, None
    goals = np.asarray(goals)
    for j in range(k):
        sample = run_pibt(dists, rows, q_from, order, K.ORIGINAL, Rng(mix_seed(step_seed, j)), constraints)
        if sample is None:
            continue
        d = dists.pool[rows, sample].astype(np.int64)
        cost = int(np.count_nonzero(~((q_from == sample) & (sample == goals)))) + int(d.sum())
        if best_cost is None or cost < best_cost:
            best, best_cost = sample, cost
    return best


def mc_step(
    dists: DistanceCache,
    q_from,
    goals,
    priorities: PriorityState,
    k: int | StrategyConfig,
    rng: Rng,
    constraints: Constraints | None = None,
) -> Configuration | None:
    """Sample ``k`` Original PIBT configurations and keep the one minimising g + h.

    Sample ``j`` is seeded with ``mix_seed(s, j)`` where ``s`` is one draw
    from ``rng``; ties go to the earliest sample.
    """
    if isinstance(k, StrategyConfig):
        k = k.k
    if k < 1:
        raise ValueError("k must be >= 1")
    q_from = np.ascontiguousarray(q_from, dtype=np.int32)
    rows = dists.rows(goals)
    return mc_select(dists, rows, q_from, goals, priorities.order(), rng, k, constraints)
