"""Deterministic synthetic graphs for tests.

Pure-numpy generators so fixtures never depend on external library RNG
details: a preferential-attachment graph (hub-heavy, overlapping reverse
reachability like citation/collaboration networks) and a uniform random
directed graph.
"""

from __future__ import annotations

import numpy as np

from cimgame import Graph, from_edge_array


def ba_edges(n: int, m: int, seed: int) -> np.ndarray:
    """Undirected preferential-attachment edges, expanded to both directions."""
    assert n > m >= 1
    rng = np.random.default_rng(seed)
    edges = []
    repeated: list[int] = []
    for v in range(m, n):
        if v == m:
            chosen = list(range(m))
        else:
            picks: set[int] = set()
            while len(picks) < m:
                picks.add(int(repeated[int(rng.integers(len(repeated)))]))
            chosen = sorted(picks)
        for u in chosen:
            edges.append((u, v))
            edges.append((v, u))
            repeated.append(u)
            repeated.append(v)
    return np.asarray(edges, dtype=np.int64)


def ba_graph(n: int, m: int, seed: int) -> Graph:
    """Preferential-attachment graph with indegree edge probabilities."""
    return from_edge_array(ba_edges(n, m, seed), n_nodes=n)


def er_directed_edges(n: int, n_edges: int, seed: int) -> np.ndarray:
    """Uniform random distinct directed edges (no self-loops)."""
    rng = np.random.default_rng(seed)
    seen: set[tuple[int, int]] = set()
    while len(seen) < n_edges:
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u != v:
            seen.add((u, v))
    return np.asarray(sorted(seen), dtype=np.int64)


def er_graph(n: int, n_edges: int, seed: int, prob: float | None = None) -> Graph:
    edges = er_directed_edges(n, n_edges, seed)
    probs = None if prob is None else np.full(edges.shape[0], prob)
    return from_edge_array(edges, n_nodes=n, probs=probs)
