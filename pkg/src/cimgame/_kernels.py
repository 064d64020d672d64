"""Numba kernels for reverse-reachability sampling, cascades and greedy cover.

Hot loops only; orchestration stays in the owning modules. Each kernel takes
one explicit uint64 seed per unit of work (RR set, diffusion run) driving an
inline splitmix64 stream, so results are bit-identical for any batching or
thread count. Kernels are nogil so batches can run on a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(inline="always")
def _mix(state):
    # splitmix64 step: golden-ratio increment, then finalizer.
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(inline="always")
def _u01(state):
    state, z = _mix(state)
    return state, (z >> np.uint64(11)) * _INV53


@njit(nogil=True, cache=True)
def sample_rr_batch(
    in_indptr, in_nodes, in_prob, n_nodes, seeds, opp_mark, buf, set_indptr, roots
):
    """Sample one RR set per seed by probabilistic reverse BFS.

    Roots are uniform over nodes; an in-neighbor is admitted with its edge
    probability, admitted nodes are never revisited, and nodes flagged in
    ``opp_mark`` are admitted but not expanded. Each finished set is sorted
    in place inside ``buf``. Returns the flat length written, or -1 when
    ``buf`` is too small (caller re-runs the batch with a larger buffer;
    identical seeds make the retry bit-identical).
    """
    visited = np.zeros(n_nodes, np.int64)
    queue = np.empty(n_nodes, np.int32)
    cap = buf.shape[0]
    pos = 0
    set_indptr[0] = 0
    for b in range(seeds.shape[0]):
        state = seeds[b]
        stamp = np.int64(b + 1)
        state, z = _mix(state)
        root = np.int32(z % np.uint64(n_nodes))
        roots[b] = root
        start = pos
        if pos >= cap:
            return -1
        buf[pos] = root
        pos += 1
        visited[root] = stamp
        qh = 0
        qt = 0
        if not opp_mark[root]:
            queue[qt] = root
            qt += 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for e in range(in_indptr[u], in_indptr[u + 1]):
                w = in_nodes[e]
                if visited[w] == stamp:
                    continue
                state, r = _u01(state)
                if r < in_prob[e]:
                    visited[w] = stamp
                    if pos >= cap:
                        return -1
                    buf[pos] = w
                    pos += 1
                    if not opp_mark[w]:
                        queue[qt] = w
                        qt += 1
        buf[start:pos].sort()
        set_indptr[b + 1] = pos
    return pos


@njit(nogil=True, cache=True)
def diffuse_batch(
    out_indptr,
    out_nodes,
    out_prob,
    n_nodes,
    s1_flat,
    s1_indptr,
    s2_flat,
    s2_indptr,
    seeds,
    i1_out,
    i2_out,
):
    """Run one two-party cascade per seed; returns per-run activation counts.

    Round 0 colors both seed sets. Each later round gathers every
    (activator, free out-neighbor) attempt from nodes colored in the
    previous round, shuffles the attempts uniformly, and processes them in
    order: the first attempt whose coin succeeds colors the target with the
    activator's color. Colored nodes never change.
    """
    color = np.zeros(n_nodes, np.int8)
    frontier = np.empty(n_nodes, np.int32)
    incoming = np.empty(n_nodes, np.int32)
    n_edges = out_nodes.shape[0]
    att_edge = np.empty(n_edges, np.int64)
    att_color = np.empty(n_edges, np.int8)

    for run in range(seeds.shape[0]):
        state = seeds[run]
        for i in range(n_nodes):
            color[i] = 0
        fn = 0
        for i in range(s1_indptr[run], s1_indptr[run + 1]):
            v = s1_flat[i]
            color[v] = 1
            frontier[fn] = v
            fn += 1
        for i in range(s2_indptr[run], s2_indptr[run + 1]):
            v = s2_flat[i]
            color[v] = 2
            frontier[fn] = v
            fn += 1

        while fn > 0:
            na = 0
            for fi in range(fn):
                u = frontier[fi]
                cu = color[u]
                for e in range(out_indptr[u], out_indptr[u + 1]):
                    if color[out_nodes[e]] == 0:
                        att_edge[na] = e
                        att_color[na] = cu
                        na += 1
            for i in range(na - 1, 0, -1):
                state, z = _mix(state)
                j = np.int64(z % np.uint64(i + 1))
                te = att_edge[i]
                att_edge[i] = att_edge[j]
                att_edge[j] = te
                tc = att_color[i]
                att_color[i] = att_color[j]
                att_color[j] = tc
            nn = 0
            for i in range(na):
                e = att_edge[i]
                v = out_nodes[e]
                if color[v] != 0:
                    continue
                state, r = _u01(state)
                if r < out_prob[e]:
                    color[v] = att_color[i]
                    incoming[nn] = v
                    nn += 1
            for i in range(nn):
                frontier[i] = incoming[i]
            fn = nn

        c1 = 0
        c2 = 0
        for i in range(n_nodes):
            if color[i] == 1:
                c1 += 1
            elif color[i] == 2:
                c2 += 1
        i1_out[run] = c1
        i2_out[run] = c2


@njit(cache=True)
def greedy_max_cover(rr_indptr, rr_nodes, cov_indptr, cov_sets, n_nodes, n_select, banned):
    """Greedy max-coverage over RR sets; ties go to the lowest node index.

    Each pick takes the node covering the most not-yet-covered sets, then
    retires those sets. ``banned`` nodes are never picked. Returns picks in
    selection order.
    """
    sentinel = np.int64(-(1 << 40))
    counts = np.empty(n_nodes, np.int64)
    for v in range(n_nodes):
        counts[v] = cov_indptr[v + 1] - cov_indptr[v]
    for i in range(banned.shape[0]):
        counts[banned[i]] = sentinel
    covered = np.zeros(rr_indptr.shape[0] - 1, np.bool_)
    chosen = np.empty(n_select, np.int32)
    for t in range(n_select):
        best = 0
        for v in range(1, n_nodes):
            if counts[v] > counts[best]:
                best = v
        chosen[t] = best
        for ci in range(cov_indptr[best], cov_indptr[best + 1]):
            s = cov_sets[ci]
            if not covered[s]:
                covered[s] = True
                for p in range(rr_indptr[s], rr_indptr[s + 1]):
                    counts[rr_nodes[p]] -= 1
        counts[best] = sentinel
    return chosen
