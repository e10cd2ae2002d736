"""Compiled PIBT engine.

Shared by every generator (plain PIBT, regret learning, Monte-Carlo) so that
the hot loop exists once. Priority inheritance is driven by an explicit
frame stack instead of recursion; frame ``d`` holds the agent, its sorted
candidate list and the index of the candidate currently reserved.

Conventions: ``-1`` marks an unassigned agent / empty cell. Candidate slot
``k < 4`` is the ``k``-th grid move (up, down, left, right); slot 4 is "stay".
Regret tables are ``float64[n_agents, 5]`` indexed by slot.
"""

import numpy as np
from numba import njit

from .rng import next_float

ORIGINAL = 0
VACANCY = 1
HINDRANCE = 2
REGRET = 3
HR = 4
RH = 5
MC = 6

STAY_SLOT = 4
NUM_SLOTS = 5

# columns of the trace buffers
RET_AGENT, RET_PARENT, RET_VALID, RET_REGRET, RET_OWN, RET_VERTEX, RET_CHILD = range(7)
UPD_AGENT, UPD_SLOT, UPD_BEFORE, UPD_REGRET, UPD_AFTER = range(5)


@njit(cache=True)
def hindrance(i, u, q_from, nbrs, dist_pool, rows, occ_now):
    vi = q_from[i]
    h = 0
    for k in range(4):
        w = nbrs[vi, k]
        if w < 0:
            continue
        j = occ_now[w]
        if j < 0:
            continue
        row = rows[j]
        if u != w and dist_pool[row, u] < dist_pool[row, vi]:
            h += 1
    return h


@njit(cache=True)
def _key_less(a, b):
    for c in range(4):
        if a[c] < b[c]:
            return True
        if a[c] > b[c]:
            return False
    return False


@njit(cache=True)
def sort_candidates(i, q_from, nbrs, dist_pool, rows, occ_now, kind, table, rng_state, cand, slot):
    """Fill ``cand``/``slot`` with agent ``i``'s sorted preference.

    Returns ``(count, min_dist)``. One epsilon is drawn per candidate in
    enumeration order regardless of strategy.
    """
    vi = q_from[i]
    row = rows[i]
    keys = np.zeros((NUM_SLOTS, 4))
    nc = 0
    for k in range(NUM_SLOTS):
        if k < 4:
            u = nbrs[vi, k]
            if u < 0:
                continue
        else:
            u = vi
        cand[nc] = u
        slot[nc] = k
        d = dist_pool[row, u]
        keys[nc, 0] = d
        if kind == VACANCY:
            keys[nc, 1] = 1.0 if occ_now[u] >= 0 else 0.0
        elif kind == HINDRANCE:
            keys[nc, 1] = hindrance(i, u, q_from, nbrs, dist_pool, rows, occ_now)
        elif kind == REGRET:
            keys[nc, 1] = table[i, k]
        elif kind == HR:
            keys[nc, 1] = hindrance(i, u, q_from, nbrs, dist_pool, rows, occ_now)
            keys[nc, 2] = table[i, k]
        elif kind == RH:
            keys[nc, 1] = table[i, k]
            keys[nc, 2] = hindrance(i, u, q_from, nbrs, dist_pool, rows, occ_now)
        keys[nc, 3] = next_float(rng_state)
        nc += 1

    # stable insertion sort; full-key ties keep enumeration order
    tmp = np.empty(4)
    for a in range(1, nc):
        tmp[:] = keys[a]
        cu = cand[a]
        cs = slot[a]
        b = a - 1
        while b >= 0 and _key_less(tmp, keys[b]):
            keys[b + 1] = keys[b]
            cand[b + 1] = cand[b]
            slot[b + 1] = slot[b]
            b -= 1
        keys[b + 1] = tmp
        cand[b + 1] = cu
        slot[b + 1] = cs

    min_dist = dist_pool[row, cand[0]]
    for a in range(1, nc):
        d = dist_pool[row, cand[a]]
        if d < min_dist:
            min_dist = d
    return nc, min_dist


@njit(cache=True)
def _record_return(trace_ret, counts, agent, parent, valid, regret, own, vertex, child):
    c = counts[0]
    if c < trace_ret.shape[0]:
        trace_ret[c, RET_AGENT] = agent
        trace_ret[c, RET_PARENT] = parent
        trace_ret[c, RET_VALID] = 1.0 if valid else 0.0
        trace_ret[c, RET_REGRET] = regret
        trace_ret[c, RET_OWN] = own
        trace_ret[c, RET_VERTEX] = vertex
        trace_ret[c, RET_CHILD] = child
    counts[0] = c + 1


@njit(cache=True)
def _record_update(trace_upd, counts, agent, slot, before, regret, after):
    c = counts[1]
    if c < trace_upd.shape[0]:
        trace_upd[c, UPD_AGENT] = agent
        trace_upd[c, UPD_SLOT] = slot
        trace_upd[c, UPD_BEFORE] = before
        trace_upd[c, UPD_REGRET] = regret
        trace_upd[c, UPD_AFTER] = after
    counts[1] = c + 1


@njit(cache=True)
def pibt_run(
    nbrs,
    dist_pool,
    rows,
    q_from,
    order,
    kind,
    table,
    weight,
    learn,
    rng_state,
    cons_agents,
    cons_verts,
    q_to,
    trace_on,
    trace_ret,
    trace_upd,
    trace_counts,
):
    """One full PIBT configuration generation.

    Constrained agents are bound first (with vertex/swap checks), then the
    remaining agents are processed in ``order``. With ``learn`` set, each
    priority-inheritance return updates ``table`` as a weighted average and
    backtracking carries the accumulated regret. Returns False when the
    constraints are jointly infeasible or a top-level agent cannot be placed;
    ``q_to`` is then unspecified.
    """
    n = q_from.shape[0]
    nv = nbrs.shape[0]
    occ_now = np.full(nv, -1, np.int32)
    occ_next = np.full(nv, -1, np.int32)
    for a in range(n):
        occ_now[q_from[a]] = a
        q_to[a] = -1

    for c in range(cons_agents.shape[0]):
        a = cons_agents[c]
        v = cons_verts[c]
        if occ_next[v] >= 0:
            return False
        j = occ_now[v]
        if j >= 0 and j != a and q_to[j] == q_from[a]:
            return False
        q_to[a] = v
        occ_next[v] = a

    st_agent = np.empty(n, np.int32)
    st_idx = np.empty(n, np.int32)
    st_nc = np.empty(n, np.int32)
    st_min = np.empty(n, np.int64)
    st_cand = np.empty((n, NUM_SLOTS), np.int32)
    st_slot = np.empty((n, NUM_SLOTS), np.int32)

    for root in order:
        if q_to[root] >= 0:
            continue

        depth = 0
        st_agent[0] = root
        nc, md = sort_candidates(
            root, q_from, nbrs, dist_pool, rows, occ_now, kind, table, rng_state, st_cand[0], st_slot[0]
        )
        st_nc[0] = nc
        st_min[0] = md
        st_idx[0] = 0
        depth = 1

        returning = False
        ret_valid = False
        ret_regret = 0.0
        ret_agent = -1

        while True:
            d = depth - 1
            i = st_agent[d]
            vi = q_from[i]
            row = rows[i]

            if returning:
                returning = False
                k = st_idx[d]
                v = st_cand[d, k]
                if learn:
                    s = st_slot[d, k]
                    before = table[i, s]
                    after = (1.0 - weight) * before + weight * ret_regret
                    table[i, s] = after
                    if trace_on:
                        _record_update(trace_upd, trace_counts, i, s, before, ret_regret, after)
                if ret_valid:
                    own = np.float64(dist_pool[row, v] - st_min[d])
                    child = ret_agent
                    ret_regret = ret_regret + own
                    ret_valid = True
                    ret_agent = i
                    if trace_on:
                        parent = st_agent[d - 1] if d > 0 else -1
                        _record_return(trace_ret, trace_counts, i, parent, True, ret_regret, own, v, child)
                    depth -= 1
                    if depth == 0:
                        break
                    returning = True
                    continue
                st_idx[d] = k + 1

            pushed = False
            done = False
            while st_idx[d] < st_nc[d]:
                k = st_idx[d]
                v = st_cand[d, k]
                if occ_next[v] >= 0:
                    st_idx[d] = k + 1
                    continue
                j = occ_now[v]
                if j >= 0 and j != i and q_to[j] == vi:
                    st_idx[d] = k + 1
                    continue
                q_to[i] = v
                occ_next[v] = i
                if j >= 0 and j != i and q_to[j] < 0:
                    st_agent[depth] = j
                    nc, md = sort_candidates(
                        j,
                        q_from,
                        nbrs,
                        dist_pool,
                        rows,
                        occ_now,
                        kind,
                        table,
                        rng_state,
                        st_cand[depth],
                        st_slot[depth],
                    )
                    st_nc[depth] = nc
                    st_min[depth] = md
                    st_idx[depth] = 0
                    depth += 1
                    pushed = True
                    break
                own = np.float64(dist_pool[row, v] - st_min[d])
                ret_valid = True
                ret_regret = own
                ret_agent = i
                if trace_on:
                    parent = st_agent[d - 1] if d > 0 else -1
                    _record_return(trace_ret, trace_counts, i, parent, True, own, own, v, -1)
                done = True
                break

            if pushed:
                continue

            if not done:
                q_to[i] = vi
                occ_next[vi] = i
                own = np.float64(dist_pool[row, vi] - st_min[d])
                ret_valid = False
                ret_regret = own
                ret_agent = i
                if trace_on:
                    parent = st_agent[d - 1] if d > 0 else -1
                    _record_return(trace_ret, trace_counts, i, parent, False, own, own, vi, -1)

            depth -= 1
            if depth == 0:
                break
            returning = True

        if not ret_valid:
            return False
    return True


@njit(cache=True)
def regret_run(
    nbrs,
    dist_pool,
    rows,
    q_from,
    order,
    kind,
    table,
    weight,
    iterations,
    rng_state,
    cons_agents,
    cons_verts,
    q_to,
    trace_on,
    trace_ret,
    trace_upd,
    trace_counts,
):
    """``iterations`` learning runs sharing ``table``; the last run is the output."""
    ok = False
    for _ in range(iterations):
        ok = pibt_run(
            nbrs,
            dist_pool,
            rows,
            q_from,
            order,
            kind,
            table,
            weight,
            True,
            rng_state,
            cons_agents,
            cons_verts,
            q_to,
            trace_on,
            trace_ret,
            trace_upd,
            trace_counts,
        )
    return ok

