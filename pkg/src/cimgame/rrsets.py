"""Reverse-reachable set index: sampling, spread, seed selection, values.

A sampled index holds theta node sets, each recorded with its root, plus the
inverted node -> set coverage map. Spread of a seed set is estimated as
(N/theta) times the number of sets it intersects. Influential values split
each covered set's unit weight equally among the covering members of S, so
the values of S always sum to the plain spread estimate of S.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import Graph, GraphError
from .rng import draw_seeds, stream_seeds

_CACHE_MAGIC = b"CIMRRIDX"
_CACHE_VERSION = 1
_BATCH = 1 << 16


@dataclass(frozen=True, eq=False)
class InfluenceValues:
    """Ordered influential nodes with per-node estimated values."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int32)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if nodes.shape[0] != values.shape[0]:
            raise ValueError("nodes and values length mismatch")
        if nodes.shape[0] == 0:
            raise ValueError("empty influential set")
        if len(set(nodes.tolist())) != nodes.shape[0]:
            raise ValueError("influential nodes must be distinct")
        if (values < 0).any():
            raise ValueError("influential values must be non-negative")

    @property
    def n(self) -> int:
        return int(self.nodes.shape[0])

    def total(self) -> float:
        return float(np.sum(self.values))

    def to_records(self, graph: Graph | None = None) -> list[dict]:
        ids = graph.node_ids if graph is not None else self.nodes
        return [
            {"node_id": int(ids[node]), "value": float(val)}
            for node, val in zip(self.nodes, self.values)
        ]


@dataclass(frozen=True, eq=False)
class RRIndex:
    """theta sampled RR sets in flat CSR-like storage plus coverage index."""

    theta: int
    n_nodes: int
    graph_hash: str
    seed: int
    roots: np.ndarray      # int32[theta]
    indptr: np.ndarray     # int64[theta+1]
    nodes: np.ndarray      # int32[flat], each set sorted
    cov_indptr: np.ndarray  # int64[n_nodes+1]
    cov_sets: np.ndarray    # int32[flat], set ids per node, ascending
    set_of: np.ndarray      # int32[flat], owning set of each flat slot

    @classmethod
    def from_raw(cls, roots, indptr, nodes, n_nodes, graph_hash, seed) -> "RRIndex":
        roots = np.asarray(roots, dtype=np.int32)
        indptr = np.asarray(indptr, dtype=np.int64)
        nodes = np.asarray(nodes, dtype=np.int32)
        theta = roots.shape[0]
        set_of = np.repeat(
            np.arange(theta, dtype=np.int32), np.diff(indptr).astype(np.int64)
        )
        counts = np.bincount(nodes, minlength=n_nodes).astype(np.int64)
        cov_indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=cov_indptr[1:])
        order = np.argsort(nodes, kind="stable")
        cov_sets = set_of[order]
        return cls(
            theta=theta,
            n_nodes=n_nodes,
            graph_hash=graph_hash,
            seed=seed,
            roots=roots,
            indptr=indptr,
            nodes=nodes,
            cov_indptr=cov_indptr,
            cov_sets=cov_sets,
            set_of=set_of,
        )

    @classmethod
    def from_sets(cls, sets, n_nodes, graph_hash="00" * 32, seed=0) -> "RRIndex":
        """Build an index from explicit (root, members) pairs (test fixtures)."""
        roots = []
        indptr = [0]
        flat: list[int] = []
        for root, members in sets:
            members = sorted(set(members))
            if root not in members:
                raise ValueError(f"root {root} missing from its RR set")
            roots.append(root)
            flat.extend(members)
            indptr.append(len(flat))
        return cls.from_raw(roots, indptr, flat, n_nodes, graph_hash, seed)

    def sets(self) -> list[np.ndarray]:
        return [
            self.nodes[self.indptr[i]: self.indptr[i + 1]] for i in range(self.theta)
        ]

    def coverage_counts(self) -> np.ndarray:
        """Number of RR sets containing each node."""
        return np.diff(self.cov_indptr)


def sample_rr_set(g: Graph, rng: np.random.Generator):
    """One random RR set; returns (sorted member array, root node)."""
    return _sample_single(g, rng, np.zeros(g.n_nodes, dtype=np.bool_))


def sample_competitive_rr_set(g: Graph, opponent_seeds, rng: np.random.Generator):
    """RR set whose reverse expansion stops at opponent-held nodes.

    Opponent nodes are admitted when reached but their in-neighbors are not
    explored; with an empty opponent set this is exactly ``sample_rr_set``.
    """
    mark = np.zeros(g.n_nodes, dtype=np.bool_)
    opp = np.asarray(list(opponent_seeds), dtype=np.int64)
    if opp.size:
        if opp.min() < 0 or opp.max() >= g.n_nodes:
            raise GraphError("opponent seed outside node range")
        mark[opp] = True
    return _sample_single(g, rng, mark)


def _sample_single(g, rng, mark):
    if g.n_nodes == 0:
        raise GraphError("empty graph")
    seeds = draw_seeds(rng, 1)
    buf = np.empty(max(64, g.n_nodes), dtype=np.int32)
    set_indptr = np.empty(2, dtype=np.int64)
    roots = np.empty(1, dtype=np.int32)
    written = _kernels.sample_rr_batch(
        g.in_indptr, g.in_nodes, g.in_prob, g.n_nodes, seeds, mark, buf, set_indptr, roots
    )
    return buf[:written].copy(), int(roots[0])


def build_index(
    g: Graph,
    theta: int,
    seed: int,
    opponent_seeds=None,
    workers: int = 1,
) -> RRIndex:
    """Sample theta independent RR sets and build the coverage index.

    Per-set seeds are derived from the master seed and the set index, so the
    result is byte-identical for any ``workers`` value. ``opponent_seeds``
    switches every set to the competitive stopping rule.
    """
    if theta < 1:
        raise ValueError(f"theta must be >= 1, got {theta}")
    if g.n_nodes == 0:
        raise GraphError("empty graph")

    mark = np.zeros(g.n_nodes, dtype=np.bool_)
    stream = "rrset"
    if opponent_seeds is not None:
        opp = np.asarray(list(opponent_seeds), dtype=np.int64)
        if opp.size:
            mark[opp] = True
        stream = "rrset-competitive"
    seeds = stream_seeds(seed, stream, theta)

    starts = list(range(0, theta, _BATCH))
    jobs = [(s, min(s + _BATCH, theta)) for s in starts]

    def run_batch(lohi):
        lo, hi = lohi
        batch_seeds = seeds[lo:hi]
        cap = 16 * (hi - lo) + g.n_nodes
        while True:
            buf = np.empty(cap, dtype=np.int32)
            set_indptr = np.empty(hi - lo + 1, dtype=np.int64)
            roots = np.empty(hi - lo, dtype=np.int32)
            written = _kernels.sample_rr_batch(
                g.in_indptr, g.in_nodes, g.in_prob, g.n_nodes,
                batch_seeds, mark, buf, set_indptr, roots,
            )
            if written >= 0:
                return roots, set_indptr, buf[:written].copy()
            cap *= 2

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_batch, jobs))
    else:
        results = [run_batch(job) for job in jobs]

    roots = np.concatenate([r for r, _, _ in results])
    nodes = np.concatenate([n for _, _, n in results])
    indptr = np.zeros(theta + 1, dtype=np.int64)
    offset = 0
    pos = 1
    for _, set_indptr, batch_nodes in results:
        indptr[pos: pos + set_indptr.shape[0] - 1] = set_indptr[1:] + offset
        offset += batch_nodes.shape[0]
        pos += set_indptr.shape[0] - 1
    return RRIndex.from_raw(roots, indptr, nodes, g.n_nodes, g.content_hash(), seed)


def _member_flat_mask(idx: RRIndex, seed_set) -> np.ndarray:
    mark = np.zeros(idx.n_nodes, dtype=np.bool_)
    members = np.asarray(list(seed_set), dtype=np.int64)
    if members.size:
        if members.min() < 0 or members.max() >= idx.n_nodes:
            raise ValueError("seed set contains a node outside the graph")
        mark[members] = True
    return mark[idx.nodes]


def _per_set_counts(idx: RRIndex, flat_mask: np.ndarray) -> np.ndarray:
    csum = np.zeros(flat_mask.shape[0] + 1, dtype=np.int64)
    np.cumsum(flat_mask, out=csum[1:])
    return csum[idx.indptr[1:]] - csum[idx.indptr[:-1]]


def estimate_spread(idx: RRIndex, seed_set) -> float:
    """(N/theta) times the number of RR sets the seed set intersects."""
    members = list(seed_set)
    if not members:
        return 0.0
    covered = _per_set_counts(idx, _member_flat_mask(idx, members)) > 0
    return idx.n_nodes / idx.theta * int(np.count_nonzero(covered))


def select_seeds(idx: RRIndex, n: int, banned=()) -> np.ndarray:
    """Greedy max-coverage selection of n nodes, in selection order."""
    banned = np.asarray(list(banned), dtype=np.int32)
    if not 1 <= n <= idx.n_nodes - banned.shape[0]:
        raise ValueError(
            f"cannot select {n} nodes from {idx.n_nodes} ({banned.shape[0]} banned)"
        )
    return _kernels.greedy_max_cover(
        idx.indptr, idx.nodes, idx.cov_indptr, idx.cov_sets, idx.n_nodes, n, banned
    )


def estimate_values(idx: RRIndex, nodes) -> InfluenceValues:
    """Influential values with each RR set's weight split among members of S.

    A set covered by c >= 1 members of S contributes weight 1/c to each of
    them; sets disjoint from S contribute nothing. Summed over S this
    reproduces the plain spread estimate of S exactly.
    """
    nodes = np.asarray(list(nodes), dtype=np.int64)
    flat_mask = _member_flat_mask(idx, nodes)
    counts = _per_set_counts(idx, flat_mask)
    weights = np.zeros(idx.theta, dtype=np.float64)
    covered = counts > 0
    weights[covered] = 1.0 / counts[covered]
    per_node = np.bincount(
        idx.nodes[flat_mask],
        weights=weights[idx.set_of[flat_mask]],
        minlength=idx.n_nodes,
    )
    scale = idx.n_nodes / idx.theta
    return InfluenceValues(nodes=nodes, values=scale * per_node[nodes])


def estimate_values_simple(idx: RRIndex, nodes) -> InfluenceValues:
    """Per-node singleton spread estimates (ignores shared RR-set coverage)."""
    nodes = np.asarray(list(nodes), dtype=np.int64)
    if nodes.size == 0:
        raise ValueError("empty influential set")
    if nodes.min() < 0 or nodes.max() >= idx.n_nodes:
        raise ValueError("seed set contains a node outside the graph")
    scale = idx.n_nodes / idx.theta
    return InfluenceValues(
        nodes=nodes, values=scale * idx.coverage_counts()[nodes].astype(np.float64)
    )


def save_cache(idx: RRIndex, path) -> None:
    """Binary index cache: magic, version, graph hash, theta, seed, arrays."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", _CACHE_VERSION))
        fh.write(bytes.fromhex(idx.graph_hash))
        fh.write(struct.pack("<QQ", idx.theta, idx.seed))
        for arr, dtype in ((idx.roots, np.int32), (idx.indptr, np.int64), (idx.nodes, np.int32)):
            data = np.ascontiguousarray(arr, dtype=dtype)
            fh.write(struct.pack("<Q", data.shape[0]))
            fh.write(data.tobytes())


def load_cache(path, g: Graph, theta: int, seed: int) -> RRIndex | None:
    """Load a cached index; None on any key mismatch or unreadable file."""
    try:
        with open(path, "rb") as fh:
            if fh.read(len(_CACHE_MAGIC)) != _CACHE_MAGIC:
                return None
            (version,) = struct.unpack("<I", fh.read(4))
            if version != _CACHE_VERSION:
                return None
            graph_hash = fh.read(32).hex()
            cached_theta, cached_seed = struct.unpack("<QQ", fh.read(16))
            if (graph_hash, cached_theta, cached_seed) != (g.content_hash(), theta, seed):
                return None

            def read_array(dtype):
                (count,) = struct.unpack("<Q", fh.read(8))
                data = np.frombuffer(fh.read(count * np.dtype(dtype).itemsize), dtype=dtype)
                if data.shape[0] != count:
                    raise EOFError
                return data

            roots = read_array(np.int32)
            indptr = read_array(np.int64)
            nodes = read_array(np.int32)
    except (OSError, EOFError, struct.error):
        return None
    if roots.shape[0] != theta or indptr.shape[0] != theta + 1:
        return None
    return RRIndex.from_raw(roots, indptr, nodes, g.n_nodes, graph_hash, seed)
