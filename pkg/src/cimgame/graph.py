"""Directed influence graphs: edge-list loading and activation probabilities.

Graphs are loaded from SNAP-style edge lists (one ``u v`` pair per line,
``#`` comments ignored, optional third column holding a per-edge
probability), normalized to a directed graph with dense node indices, and
stored in CSR form in both edge directions so that forward diffusion and
reverse-reachability sampling are both cache-friendly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np


class GraphError(ValueError):
    """Malformed graph input or violated graph precondition."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph with per-edge activation probabilities.

    ``out_*`` arrays index edges by source node, ``in_*`` by target node;
    both views describe the same edge set and carry the same probability for
    each edge. ``node_ids`` maps the dense internal index back to the
    external id from the input file.
    """

    n_nodes: int
    out_indptr: np.ndarray
    out_nodes: np.ndarray
    out_prob: np.ndarray
    in_indptr: np.ndarray
    in_nodes: np.ndarray
    in_prob: np.ndarray
    node_ids: np.ndarray
    source_path: str | None = None
    loaded_directed: bool = True

    @property
    def n_edges(self) -> int:
        return int(self.out_nodes.shape[0])

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def index_of(self) -> dict[int, int]:
        """External id -> internal index."""
        return {int(ext): i for i, ext in enumerate(self.node_ids)}

    def edges(self) -> np.ndarray:
        """All directed edges as an (E, 2) array of internal indices."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int32), self.out_degrees())
        return np.column_stack([src, self.out_nodes])

    def content_hash(self) -> str:
        """Hash of node ids, edge set and probabilities; keys RR-index caches."""
        h = hashlib.sha256()
        h.update(np.int64(self.n_nodes).tobytes())
        h.update(np.ascontiguousarray(self.node_ids, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.out_indptr, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.out_nodes, dtype=np.int32).tobytes())
        h.update(np.ascontiguousarray(self.out_prob, dtype=np.float64).tobytes())
        return h.hexdigest()

    def save(self, path) -> None:
        """Write the graph as a directed edge list with a probability column.

        Isolated nodes are written as ``u u 0`` self-loop lines: the loader
        drops self-loops but still registers the node id, so a save/load
        round trip preserves the node set exactly.
        """
        ids = self.node_ids
        with open(path, "w") as fh:
            fh.write("# directed edge list: source target probability\n")
            deg_total = self.out_degrees() + self.in_degrees()
            for u in np.flatnonzero(deg_total == 0):
                fh.write(f"{int(ids[u])} {int(ids[u])} 0\n")
            for u in range(self.n_nodes):
                for e in range(self.out_indptr[u], self.out_indptr[u + 1]):
                    v = self.out_nodes[e]
                    fh.write(f"{int(ids[u])} {int(ids[v])} {self.out_prob[e]:.17g}\n")


def _parse_edge_file(path):
    """Yield (lineno, u, v, prob-or-None) for every non-comment line."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) not in (2, 3):
                raise GraphError(
                    f"{path}:{lineno}: expected 'u v' or 'u v p', got {len(tokens)} fields"
                )
            try:
                u = int(tokens[0])
                v = int(tokens[1])
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: non-integer node id") from exc
            p = None
            if len(tokens) == 3:
                try:
                    p = float(tokens[2])
                except ValueError as exc:
                    raise GraphError(f"{path}:{lineno}: bad probability field") from exc
            rows.append((lineno, u, v, p))
    return rows


def _edge_dict(rows, path, directed: bool):
    """Dedupe parsed rows into {(u_ext, v_ext): prob-or-None} plus the id set.

    Self-loops are dropped (their node ids are kept); duplicate edges
    collapse, last probability wins; undirected input doubles every edge.
    """
    ids: set[int] = set()
    edges: dict[tuple[int, int], float | None] = {}
    for lineno, u, v, p in rows:
        ids.add(u)
        ids.add(v)
        if u == v:
            continue
        if p is not None and not 0.0 <= p <= 1.0:
            raise GraphError(f"{path}:{lineno}: probability {p} outside [0,1]")
        edges[(u, v)] = p
        if not directed:
            edges[(v, u)] = p
    return ids, edges


def load_edge_list(path, directed: bool = True) -> Graph:
    """Load a SNAP-style edge list and apply the default indegree weighting.

    Node ids are compacted to 0..N-1 (ascending external id); the id map is
    retained on the graph. Undirected input expands each edge to both
    directions before anything else, so indegree-based probabilities are
    computed on the expanded graph.
    """
    rows = _parse_edge_file(path)
    ids, edges = _edge_dict(rows, path, directed)
    if not ids:
        raise GraphError(f"{path}: empty graph")

    node_ids = np.array(sorted(ids), dtype=np.int64)
    index = {int(ext): i for i, ext in enumerate(node_ids)}
    pairs = np.array(
        [(index[u], index[v]) for (u, v) in edges], dtype=np.int64
    ).reshape(-1, 2)
    g = _build_csr(len(node_ids), pairs, node_ids, str(path), directed)
    return assign_probabilities(g, "indegree")


def _build_csr(n, pairs, node_ids, source_path, loaded_directed) -> Graph:
    m = pairs.shape[0]
    if m:
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        pairs = pairs[order]
    src = pairs[:, 0]
    dst = pairs[:, 1]

    out_indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(out_indptr, src + 1, 1)
    np.cumsum(out_indptr, out=out_indptr)

    rev = np.lexsort((src, dst))
    in_indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(in_indptr, dst + 1, 1)
    np.cumsum(in_indptr, out=in_indptr)

    return Graph(
        n_nodes=n,
        out_indptr=out_indptr,
        out_nodes=dst.astype(np.int32),
        out_prob=np.zeros(m, dtype=np.float64),
        in_indptr=in_indptr,
        in_nodes=src[rev].astype(np.int32),
        in_prob=np.zeros(m, dtype=np.float64),
        node_ids=node_ids,
        source_path=source_path,
        loaded_directed=loaded_directed,
    )


def _in_to_out_map(g: Graph) -> np.ndarray:
    """Out-edge position of each in-edge (both CSR views are (src,dst)-sorted)."""
    src = np.repeat(np.arange(g.n_nodes, dtype=np.int64), g.out_degrees())
    return np.lexsort((src, g.out_nodes.astype(np.int64)))


def _with_in_probs(g: Graph, in_prob: np.ndarray) -> Graph:
    if not ((in_prob >= 0.0) & (in_prob <= 1.0)).all():
        raise GraphError("edge probability outside [0,1]")
    out_prob = np.empty_like(in_prob)
    out_prob[_in_to_out_map(g)] = in_prob
    return replace(g, out_prob=out_prob, in_prob=in_prob)


def assign_probabilities(
    g: Graph, scheme: str, *, p: float | None = None, path=None
) -> Graph:
    """Return a graph with edge probabilities set by the named scheme.

    ``indegree``  P(w->u) = 1/indegree(u);
    ``constant``  P = p for every edge;
    ``file``      probabilities from the third column of the edge file
                  (defaults to the file the graph was loaded from).
    """
    if scheme == "indegree":
        indeg = g.in_degrees()
        per_node = np.zeros(g.n_nodes, dtype=np.float64)
        nz = indeg > 0
        per_node[nz] = 1.0 / indeg[nz]
        in_prob = np.repeat(per_node, indeg)
    elif scheme == "constant":
        if p is None or not 0.0 <= p <= 1.0:
            raise GraphError(f"constant scheme needs p in [0,1], got {p}")
        in_prob = np.full(g.n_edges, float(p))
    elif scheme == "file":
        src_path = path if path is not None else g.source_path
        if src_path is None:
            raise GraphError("file scheme: no edge file associated with this graph")
        in_prob = _probs_from_file(g, src_path)
    else:
        raise GraphError(f"unknown probability scheme {scheme!r}")
    return _with_in_probs(g, in_prob)


def _probs_from_file(g: Graph, path) -> np.ndarray:
    rows = _parse_edge_file(path)
    _, edges = _edge_dict(rows, path, g.loaded_directed)
    index = g.index_of()
    by_edge: dict[tuple[int, int], float] = {}
    for (u, v), prob in edges.items():
        if prob is None:
            raise GraphError(f"{path}: file scheme requires a third column on every edge")
        if u in index and v in index:
            by_edge[(index[u], index[v])] = prob

    in_prob = np.empty(g.n_edges, dtype=np.float64)
    pos = 0
    for v in range(g.n_nodes):
        for e in range(g.in_indptr[v], g.in_indptr[v + 1]):
            u = int(g.in_nodes[e])
            try:
                in_prob[pos] = by_edge[(u, v)]
            except KeyError as exc:
                raise GraphError(
                    f"{path}: no probability for edge {g.node_ids[u]} -> {g.node_ids[v]}"
                ) from exc
            pos += 1
    return in_prob


def from_edge_array(
    edges: np.ndarray,
    n_nodes: int | None = None,
    probs: np.ndarray | None = None,
) -> Graph:
    """Build a graph directly from an (E, 2) internal-index edge array.

    Convenience for synthetic graphs; self-loops and duplicate edges are
    collapsed exactly as in file loading. Default weighting is indegree
    unless explicit per-edge ``probs`` (aligned with ``edges``) are given.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    keep = edges[:, 0] != edges[:, 1]
    if probs is not None:
        probs = np.asarray(probs, dtype=np.float64)[keep]
    edges = edges[keep]
    if n_nodes is None:
        n_nodes = int(edges.max()) + 1 if edges.size else 0
    if n_nodes <= 0:
        raise GraphError("empty graph")

    uniq = np.unique(edges, axis=0) if edges.size else edges
    g = _build_csr(n_nodes, uniq, np.arange(n_nodes, dtype=np.int64), None, True)
    if probs is None:
        return assign_probabilities(g, "indegree")

    prob_map = {(int(u), int(v)): pr for (u, v), pr in zip(edges, probs)}
    in_prob = np.empty(g.n_edges, dtype=np.float64)
    pos = 0
    for v in range(g.n_nodes):
        for e in range(g.in_indptr[v], g.in_indptr[v + 1]):
            in_prob[pos] = prob_map[(int(g.in_nodes[e]), v)]
            pos += 1
    return _with_in_probs(g, in_prob)
