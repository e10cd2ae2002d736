"""Vanilla LaCAM: depth-first search over configurations with lazy constraints.

Each high-level node owns a FIFO of low-level constraint nodes. Popping
one extends it with the next agent (in the node's priority order) bound to
each of its candidate vertices, then asks the configured generator for a
successor that honours the bindings. Unseen successors are pushed on the
open stack. Tiebreaking only reorders candidates, so completeness is the
same for every strategy: a solvable instance is found given enough time,
and an exhausted open stack proves there is no solution.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .generator import ConfigGenerator
from .grid_graph import UNREACHABLE, DistanceCache
from .instance import Instance, soc_lower_bound
from .metrics import sum_of_costs
from .pibt import PriorityState, Strategy, StrategyConfig, _occupancy, update_priorities
from .rng import Rng

SUCCESS = "success"
TIMEOUT = "timeout"
UNSOLVABLE = "unsolvable"  # some goal is disconnected from its start
EXHAUSTED = "exhausted"  # search space exhausted: no solution exists


@dataclass(frozen=True, eq=False)
class ConstraintNode:
    """Bindings ``agents[d] -> vertices[d]`` for the first ``depth`` agents in order."""

    depth: int = 0
    agents: tuple[int, ...] = ()
    vertices: tuple[int, ...] = ()

    @property
    def bindings(self) -> list[tuple[int, int]]:
        return list(zip(self.agents, self.vertices))

    def child(self, agent: int, vertex: int) -> "ConstraintNode":
        return ConstraintNode(self.depth + 1, self.agents + (agent,), self.vertices + (vertex,))


class HighLevelNode:
    """Search node; ``key`` is the configuration as compact bytes (hash-consed)."""

    __slots__ = ("key", "parent", "elapsed", "constraint_queue", "_dtype")

    def __init__(self, key: bytes, parent: "HighLevelNode | None", elapsed: np.ndarray, dtype) -> None:
        self.key = key
        self.parent = parent
        self.elapsed = elapsed
        self.constraint_queue: deque[ConstraintNode] = deque([ConstraintNode()])
        self._dtype = dtype

    @property
    def config(self) -> np.ndarray:
        return np.frombuffer(self.key, dtype=self._dtype).astype(np.int32)


@dataclass
class Solution:
    configs: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.configs)


@dataclass
class SolveResult:
    status: str
    solution: Solution | None
    runtime_ms: float
    soc: int | None = None
    soc_lb: int | None = None
    nodes: int = 0
    generated: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    @property
    def normalized_soc(self) -> float | None:
        if self.soc is None or self.soc_lb is None:
            return None
        if self.soc_lb == 0:
            return 1.0 if self.soc == 0 else float("inf")
        return self.soc / self.soc_lb

    def summary(self) -> dict:
        return {
            "success": self.success,
            "status": self.status,
            "runtime_ms": round(self.runtime_ms, 3),
            "soc": self.soc,
            "soc_lb": self.soc_lb,
            "normalized_soc": self.normalized_soc,
        }


class _Expansion:
    """Per-node scratch (order, occupancy) cached for the node at the top of the stack."""

    __slots__ = ("node", "q", "order", "occ")

    def __init__(self) -> None:
        self.node = None

    def load(self, node: HighLevelNode, base: np.ndarray, num_vertices: int) -> None:
        if self.node is node:
            return
        self.node = node
        self.q = node.config
        self.order = np.argsort(-(node.elapsed + base), kind="stable").astype(np.int32)
        self.occ = _occupancy(num_vertices, self.q)


def constrained_successor(
    generator: ConfigGenerator,
    q_from: np.ndarray,
    order: np.ndarray,
    cnode: ConstraintNode,
    rng: Rng,
) -> np.ndarray | None:
    """Successor extending ``cnode``'s bindings, or ``None`` if they are infeasible."""
    nbrs = generator.dists.grid.nbrs
    for a, v in zip(cnode.agents, cnode.vertices):
        if v != q_from[a] and v not in nbrs[q_from[a]]:
            raise ValueError(f"binding ({a}, {v}) is not a move of agent {a}")
    return generator(q_from, order, rng, cnode.bindings)


def _reconstruct(node: HighLevelNode) -> Solution:
    configs = []
    while node is not None:
        configs.append(node.config)
        node = node.parent
    configs.reverse()
    return Solution(configs)


def solve_oneshot(
    instance: Instance,
    strategy: StrategyConfig,
    time_limit: float = 1.0,
    seed: int = 0,
    dists: DistanceCache | None = None,
) -> SolveResult:
    """Solve a one-shot instance with LaCAM driven by ``strategy``.

    Args:
        instance: the problem.
        strategy: generator for successor configurations.
        time_limit: wallclock budget in seconds, checked at every node pop.
        seed: seed of the epsilon stream.
        dists: optional shared distance cache for ``instance.grid``.
    """
    t0 = time.perf_counter()
    deadline = t0 + time_limit
    grid = instance.grid
    dists = dists or DistanceCache(grid)
    gen = ConfigGenerator(dists, instance.goals, strategy)
    starts = np.ascontiguousarray(instance.starts, dtype=np.int32)
    goals = gen.goals
    n = instance.num_agents

    def done(status, solution=None, nodes=0, generated=0):
        ms = (time.perf_counter() - t0) * 1000.0
        res = SolveResult(status, solution, ms, nodes=nodes, generated=generated)
        if solution is not None:
            res.soc = sum_of_costs(instance, solution.configs)
            res.soc_lb = soc_lower_bound(instance, dists)
        return res

    unreachable = np.nonzero(dists.pool[gen.rows, starts] >= UNREACHABLE)[0]
    if unreachable.size:
        res = done(UNSOLVABLE)
        res.meta["agent"] = int(unreachable[0])
        return res

    dtype = np.uint16 if grid.num_vertices <= np.iinfo(np.uint16).max else np.int32
    goal_key = goals.astype(dtype).tobytes()
    priorities = PriorityState.initial(dists, starts, goals)
    base = priorities.base
    root = HighLevelNode(starts.astype(dtype).tobytes(), None, priorities.elapsed, dtype)
    explored = {root.key: root}
    open_stack = [root]
    rng = Rng(seed)
    scratch = _Expansion()
    kind = K.ORIGINAL if strategy.kind is Strategy.MC else strategy.kind.code
    zero_table = np.zeros((n, K.NUM_SLOTS))
    cand = np.empty(K.NUM_SLOTS, dtype=np.int32)
    slot = np.empty(K.NUM_SLOTS, dtype=np.int32)
    nv = grid.num_vertices
    generated = 0

    while open_stack:
        if time.perf_counter() > deadline:
            return done(TIMEOUT, nodes=len(explored), generated=generated)
        node = open_stack[-1]
        if node.key == goal_key:
            return done(SUCCESS, _reconstruct(node), len(explored), generated)
        if not node.constraint_queue:
            open_stack.pop()
            continue
        cnode = node.constraint_queue.popleft()
        scratch.load(node, base, nv)
        q_from = scratch.q

        if cnode.depth < n:
            i = int(scratch.order[cnode.depth])
            nc, _ = K.sort_candidates(
                i, q_from, grid.nbrs, dists.pool, gen.rows, scratch.occ, kind, zero_table, rng.state, cand, slot
            )
            for u in cand[:nc]:
                node.constraint_queue.append(cnode.child(i, int(u)))

        q_to = gen(q_from, scratch.order, rng, cnode.bindings)
        generated += 1
        if q_to is None:
            continue
        key = q_to.astype(dtype).tobytes()
        if key in explored:
            continue
        elapsed = update_priorities(PriorityState(base, node.elapsed), q_to, goals).elapsed
        child = HighLevelNode(key, node, elapsed, dtype)
        explored[key] = child
        open_stack.append(child)

    return done(EXHAUSTED, nodes=len(explored), generated=generated)


__all__ = [
    "ConstraintNode",
    "HighLevelNode",
    "Solution",
    "SolveResult",
    "constrained_successor",
    "solve_oneshot",
    "SUCCESS",
    "TIMEOUT",
    "UNSOLVABLE",
    "EXHAUSTED",
]
