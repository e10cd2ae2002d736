"""PIBT configuration generation with pluggable tiebreaking.

A configuration is an ``int32`` array holding one vertex id per agent.
Preferences sort the candidates ``neigh(v) + [v]`` ascending by a key
tuple whose first field is the distance to the goal and whose last is a
fresh uniform epsilon:

=========  ====================================
Original   (dist, eps)
Vacancy    (dist, occupied, eps)
Hindrance  (dist, hindrance, eps)
Regret     (dist, regret, eps)
HR         (dist, hindrance, regret, eps)
RH         (dist, regret, hindrance, eps)
MC         Original keys, best of k samples
=========  ====================================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .grid_graph import DistanceCache
from .rng import Rng

Configuration = np.ndarray
Constraints = Sequence[tuple[int, int]]

_EMPTY_I32 = np.zeros(0, dtype=np.int32)
_NO_TRACE_RET = np.zeros((0, 7))
_NO_TRACE_UPD = np.zeros((0, 5))


class Strategy(enum.Enum):
    ORIGINAL = "original"
    VACANCY = "vacancy"
    HINDRANCE = "hindrance"
    REGRET = "regret"
    HR = "hr"
    RH = "rh"
    MC = "mc"

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown strategy {name!r} (expected one of: {valid})") from None

    @property
    def code(self) -> int:
        return _CODES[self]

    @property
    def learns_regret(self) -> bool:
        return self in (Strategy.REGRET, Strategy.HR, Strategy.RH)


_CODES = {
    Strategy.ORIGINAL: K.ORIGINAL,
    Strategy.VACANCY: K.VACANCY,
    Strategy.HINDRANCE: K.HINDRANCE,
    Strategy.REGRET: K.REGRET,
    Strategy.HR: K.HR,
    Strategy.RH: K.RH,
    Strategy.MC: K.MC,
}


@dataclass(frozen=True)
class StrategyConfig:
    """Tiebreaking strategy plus its parameters.

    Attributes:
        kind: which preference key to use.
        m: learning iterations for the regret family.
        w: regret averaging weight.
        k: sample count for MC.
    """

    kind: Strategy = Strategy.ORIGINAL
    m: int = 3
    w: float = 0.9
    k: int = 10

    def __post_init__(self) -> None:
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", Strategy.parse(self.kind))
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"w must be in [0, 1], got {self.w}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True, eq=False)
class PriorityState:
    """Dynamic PIBT priorities: ``elapsed + base``, higher plans first.

    ``base`` holds distinct fractions in [0, 1) and never changes, so every
    node of a search can share it; ``elapsed`` counts timesteps since the
    agent last stood on its goal.
    """

    base: np.ndarray
    elapsed: np.ndarray

    @classmethod
    def initial(cls, dists: DistanceCache, starts, goals) -> "PriorityState":
        """Agents farther from their goals start with larger base fractions."""
        starts = np.asarray(starts)
        rows = dists.rows(goals)
        d = dists.pool[rows, starts].astype(np.int64)
        n = starts.shape[0]
        # rank by (distance, agent id): distinct and deterministic
        rank = np.empty(n, dtype=np.int64)
        rank[np.lexsort((np.arange(n), d))] = np.arange(n)
        base = rank / float(n)
        base.flags.writeable = False
        return cls(base, np.zeros(n, dtype=np.int32))

    def effective(self) -> np.ndarray:
        return self.elapsed + self.base

    def order(self) -> np.ndarray:
        """Agent ids by descending effective priority."""
        return np.argsort(-self.effective(), kind="stable").astype(np.int32)


def update_priorities(priorities: PriorityState, q: Configuration, goals) -> PriorityState:
    at_goal = np.asarray(q) == np.asarray(goals)
    elapsed = np.where(at_goal, 0, priorities.elapsed + 1).astype(np.int32)
    return PriorityState(priorities.base, elapsed)


def collision_ok(q_from, q_to_partial, agent: int, v: int) -> bool:
    """Whether ``q_to_partial[agent] = v`` keeps the partial assignment conflict-free.

    ``q_to_partial`` uses ``-1`` for unassigned agents.
    """
    q_from = np.asarray(q_from)
    q_to = np.asarray(q_to_partial)
    others = np.arange(q_to.shape[0]) != agent
    assigned = others & (q_to >= 0)
    if np.any(assigned & (q_to == v)):
        return False
    return not np.any(assigned & (q_from == v) & (q_to == q_from[agent]))


def _constraint_arrays(constraints: Constraints | None):
    if not constraints:
        return _EMPTY_I32, _EMPTY_I32
    agents = np.fromiter((a for a, _ in constraints), dtype=np.int32, count=len(constraints))
    verts = np.fromiter((v for _, v in constraints), dtype=np.int32, count=len(constraints))
    return agents, verts


def _occupancy(num_vertices: int, q: np.ndarray) -> np.ndarray:
    occ = np.full(num_vertices, -1, dtype=np.int32)
    occ[q] = np.arange(q.shape[0], dtype=np.int32)
    return occ


def hindrance_of(dists: DistanceCache, q, agent: int, action: int, goals) -> int:
    """Number of adjacent agents whose next-step progress ``action`` would block."""
    q = np.asarray(q, dtype=np.int32)
    rows = dists.rows(goals)
    occ = _occupancy(dists.grid.num_vertices, q)
    return int(K.hindrance(agent, action, q, dists.grid.nbrs, dists.pool, rows, occ))


def compute_preference(
    dists: DistanceCache,
    q_from,
    agent: int,
    goals,
    strategy: StrategyConfig,
    rng: Rng,
    regret_table=None,
) -> list[int]:
    """Agent's candidate vertices sorted by the strategy's key tuple.

    ``regret_table`` is a :class:`~pibt_tiebreak.regret.RegretTable`; when
    absent the regret field is zero. Draws one epsilon per candidate.
    """
    q_from = np.asarray(q_from, dtype=np.int32)
    rows = dists.rows(goals)
    occ = _occupancy(dists.grid.num_vertices, q_from)
    table = regret_table.values if regret_table is not None else np.zeros((q_from.shape[0], K.NUM_SLOTS))
    cand = np.empty(K.NUM_SLOTS, dtype=np.int32)
    slot = np.empty(K.NUM_SLOTS, dtype=np.int32)
    nc, _ = K.sort_candidates(
        agent, q_from, dists.grid.nbrs, dists.pool, rows, occ, strategy.kind.code, table, rng.state, cand, slot
    )
    return [int(u) for u in cand[:nc]]


def pibt_step(
    dists: DistanceCache,
    q_from,
    goals,
    priorities: PriorityState,
    strategy: StrategyConfig,
    rng: Rng,
    constraints: Constraints | None = None,
) -> Configuration | None:
    """Generate the next configuration with one PIBT run.

    Regret-family strategies use an all-zero regret table here (one run, no
    learning); use :func:`pibt_tiebreak.regret.regret_step` to learn it.

    Returns:
        The new configuration, or ``None`` if the constraint bindings are
        jointly infeasible.
    """
    q_from = np.ascontiguousarray(q_from, dtype=np.int32)
    rows = dists.rows(goals)
    return run_pibt(dists, rows, q_from, priorities.order(), strategy.kind.code, rng, constraints)


def run_pibt(
    dists: DistanceCache,
    rows: np.ndarray,
    q_from: np.ndarray,
    order: np.ndarray,
    kind: int,
    rng: Rng,
    constraints: Constraints | None = None,
    table: np.ndarray | None = None,
) -> Configuration | None:
    n = q_from.shape[0]
    cons_a, cons_v = _constraint_arrays(constraints)
    if table is None:
        table = np.zeros((n, K.NUM_SLOTS))
    q_to = np.empty(n, dtype=np.int32)
    ok = K.pibt_run(
        dists.grid.nbrs,
        dists.pool,
        rows,
        q_from,
        order,
        kind,
        table,
        0.0,
        False,
        rng.state,
        cons_a,
        cons_v,
        q_to,
        False,
        _NO_TRACE_RET,
        _NO_TRACE_UPD,
        np.zeros(2, dtype=np.int64),
    )
    return q_to if ok else None


def is_collision_free(q: Iterable[int]) -> bool:
    q = np.asarray(q)
    return np.unique(q).shape[0] == q.shape[0]


def is_transition_valid(grid, q_from, q_to) -> bool:
    """Transitionable and free of vertex and swap conflicts."""
    q_from = np.asarray(q_from)
    q_to = np.asarray(q_to)
    if q_from.shape != q_to.shape or not is_collision_free(q_to):
        return False
    moved = q_from != q_to
    adjacent = (grid.nbrs[q_from] == q_to[:, None]).any(axis=1)
    if np.any(moved & ~adjacent):
        return False
    pos = {int(v): i for i, v in enumerate(q_from)}
    for i in np.nonzero(moved)[0]:
        j = pos.get(int(q_to[i]))
        if j is not None and j != i and q_to[j] == q_from[i]:
            return False
    return True
