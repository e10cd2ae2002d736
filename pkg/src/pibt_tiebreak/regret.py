"""Regret learning: repeated PIBT runs that learn which actions make others regret."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .grid_graph import DistanceCache
from .pibt import (
    Configuration,
    Constraints,
    PriorityState,
    Strategy,
    StrategyConfig,
    _constraint_arrays,
)
from .rng import Rng


@dataclass(eq=False)
class RegretTable:
    """Learned regret ``R[i, v]`` for each agent and each of its candidate vertices.

    Stored per candidate slot (four grid moves, then stay) relative to
    ``q_from``; use :meth:`get` to look entries up by vertex.
    """

    nbrs: np.ndarray
    q_from: np.ndarray
    values: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        if self.values is None:
            self.values = np.zeros((self.q_from.shape[0], K.NUM_SLOTS))

    def slot(self, agent: int, v: int) -> int:
        vi = int(self.q_from[agent])
        if v == vi:
            return K.STAY_SLOT
        for k in range(4):
            if self.nbrs[vi, k] == v:
                return k
        raise KeyError(f"vertex {v} is not a candidate of agent {agent}")

    def get(self, agent: int, v: int) -> float:
        return float(self.values[agent, self.slot(agent, v)])


@dataclass
class RegretTrace:
    """Backtracking events recorded during regret learning.

    ``returns`` rows: agent, parent (-1 at top level), valid, returned regret,
    the agent's own regret, the vertex it ended on, the child it inherited to
    (-1 if none). ``updates`` rows: agent, slot, value before, backtracked
    regret, value after.
    """

    returns: np.ndarray
    updates: np.ndarray


def update_regret(current: float, regret: float, w: float) -> float:
    return (1.0 - w) * current + w * regret


def agent_regret(dists: DistanceCache, q_from, agent: int, chosen: int, goals) -> int:
    """``dist(chosen) - min over candidates`` for one agent's goal."""
    q_from = np.asarray(q_from)
    goal = int(np.asarray(goals)[agent])
    row = int(dists.rows([goal])[0])
    table = dists.pool[row]
    vi = int(q_from[agent])
    cands = dists.grid.neighbors(vi) + [vi]
    if chosen not in cands:
        raise ValueError(f"vertex {chosen} is not a candidate of agent {agent}")
    return int(table[chosen]) - min(int(table[u]) for u in cands)


def run_regret(
    dists: DistanceCache,
    rows: np.ndarray,
    q_from: np.ndarray,
    order: np.ndarray,
    kind: int,
    m: int,
    w: float,
    rng: Rng,
    constraints: Constraints | None = None,
    trace_capacity: int = 0,
):
    """Low-level driver; returns ``(config or None, table, trace or None)``."""
    n = q_from.shape[0]
    cons_a, cons_v = _constraint_arrays(constraints)
    table = np.zeros((n, K.NUM_SLOTS))
    q_to = np.empty(n, dtype=np.int32)
    trace_ret = np.zeros((trace_capacity, 7))
    trace_upd = np.zeros((trace_capacity, 5))
    counts = np.zeros(2, dtype=np.int64)
    ok = K.regret_run(
        dists.grid.nbrs,
        dists.pool,
        rows,
        q_from,
        order,
        kind,
        table,
        float(w),
        int(m),
        rng.state,
        cons_a,
        cons_v,
        q_to,
        trace_capacity > 0,
        trace_ret,
        trace_upd,
        counts,
    )
    trace = None
    if trace_capacity > 0:
        if counts.max() > trace_capacity:
            raise RuntimeError("trace capacity exceeded")
        trace = RegretTrace(trace_ret[: counts[0]], trace_upd[: counts[1]])
    return (q_to if ok else None), table, trace


def regret_step(
    dists: DistanceCache,
    q_from,
    goals,
    priorities: PriorityState,
    strategy: StrategyConfig,
    rng: Rng,
    constraints: Constraints | None = None,
) -> Configuration | None:
    """Run PIBT ``strategy.m`` times while learning regret; return the last run.

    The regret table starts at zero for every call. ``strategy.kind``
    selects where regret sits in the key tuple (Regret, HR or RH); any other
    kind is treated as Regret.
    """
    kind = strategy.kind if strategy.kind.learns_regret else Strategy.REGRET
    q_from = np.ascontiguousarray(q_from, dtype=np.int32)
    rows = dists.rows(goals)
    q_to, _, _ = run_regret(
        dists, rows, q_from, priorities.order(), kind.code, strategy.m, strategy.w, rng, constraints
    )
    return q_to
