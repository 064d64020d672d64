"""Two-party cascade simulation: seed resolution, tournaments, error study.

Allocations resolve to seed sets (higher offer wins a node, equal positive
offers flip a fair coin), the cascade runs to quiescence with per-round
attempt shuffling, and tournaments aggregate win percentage and spread
difference over repeated rounds.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .game import Allocation, GameError, GameSpec
from .graph import Graph
from .rng import draw_seeds
from .rrsets import RRIndex, estimate_values, estimate_values_simple, select_seeds


@dataclass(frozen=True)
class CompetitionStats:
    """Tournament aggregate over repeated cascades."""

    rounds: int
    win_pct: float
    draw_pct: float
    avg: float
    std: float
    seed: int | None = None

    def to_csv_fields(self) -> dict:
        return {
            "rounds": self.rounds,
            "win_pct": f"{self.win_pct:.17g}",
            "draw_pct": f"{self.draw_pct:.17g}",
            "avg": f"{self.avg:.17g}",
            "std": f"{self.std:.17g}",
            "seed": "" if self.seed is None else self.seed,
        }


def assign_seeds(a1: Allocation, a2: Allocation, nodes, rng: np.random.Generator):
    """Resolve an action pair into disjoint seed sets over the node list.

    A node goes to whoever offered strictly more; equal positive offers are
    settled by a fair coin; nodes both sides ignored stay unseeded.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    if len(a1) != nodes.shape[0] or len(a2) != nodes.shape[0]:
        raise GameError("allocation length does not match node list")
    s1, s2 = [], []
    for j, node in enumerate(nodes):
        x, y = a1.amounts[j], a2.amounts[j]
        if x > y:
            s1.append(node)
        elif y > x:
            s2.append(node)
        elif x > 0:
            (s1 if rng.random() < 0.5 else s2).append(node)
    return np.asarray(s1, dtype=np.int32), np.asarray(s2, dtype=np.int32)


def _as_seed_array(g: Graph, seeds) -> np.ndarray:
    arr = np.asarray(list(seeds), dtype=np.int32)
    if arr.size and (arr.min() < 0 or arr.max() >= g.n_nodes):
        raise GameError("seed node outside graph")
    return arr


def diffuse(g: Graph, s1, s2, rng: np.random.Generator) -> tuple[int, int]:
    """One competitive cascade; returns both players' activation counts."""
    s1 = _as_seed_array(g, s1)
    s2 = _as_seed_array(g, s2)
    if np.intersect1d(s1, s2).size:
        raise GameError("seed sets overlap")
    i1, i2 = _diffuse_many(g, [(s1, s2)], draw_seeds(rng, 1))
    return int(i1[0]), int(i2[0])


def _diffuse_many(g: Graph, seed_pairs, run_seeds, workers: int = 1):
    """Cascade once per (s1, s2, seed) triple; deterministic in run order."""
    runs = len(seed_pairs)
    s1_indptr = np.zeros(runs + 1, dtype=np.int64)
    s2_indptr = np.zeros(runs + 1, dtype=np.int64)
    for i, (s1, s2) in enumerate(seed_pairs):
        s1_indptr[i + 1] = s1_indptr[i] + len(s1)
        s2_indptr[i + 1] = s2_indptr[i] + len(s2)
    s1_flat = (
        np.concatenate([np.asarray(s1, dtype=np.int32) for s1, _ in seed_pairs])
        if s1_indptr[-1]
        else np.empty(0, dtype=np.int32)
    )
    s2_flat = (
        np.concatenate([np.asarray(s2, dtype=np.int32) for _, s2 in seed_pairs])
        if s2_indptr[-1]
        else np.empty(0, dtype=np.int32)
    )
    i1 = np.empty(runs, dtype=np.int64)
    i2 = np.empty(runs, dtype=np.int64)

    if workers <= 1 or runs < 4:
        _kernels.diffuse_batch(
            g.out_indptr, g.out_nodes, g.out_prob, g.n_nodes,
            s1_flat, s1_indptr, s2_flat, s2_indptr, run_seeds, i1, i2,
        )
        return i1, i2

    chunks = np.array_split(np.arange(runs), workers)

    def run_chunk(rows):
        lo, hi = rows[0], rows[-1] + 1
        _kernels.diffuse_batch(
            g.out_indptr, g.out_nodes, g.out_prob, g.n_nodes,
            s1_flat[s1_indptr[lo]: s1_indptr[hi]],
            (s1_indptr[lo: hi + 1] - s1_indptr[lo]),
            s2_flat[s2_indptr[lo]: s2_indptr[hi]],
            (s2_indptr[lo: hi + 1] - s2_indptr[lo]),
            run_seeds[lo:hi], i1[lo:hi], i2[lo:hi],
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_chunk, [c for c in chunks if c.size]))
    return i1, i2


def run_competition(
    g: Graph,
    spec: GameSpec,
    strat1,
    strat2,
    rounds: int,
    rng: np.random.Generator,
    seed: int | None = None,
    workers: int = 1,
) -> CompetitionStats:
    """Tournament of repeated cascades between two strategies.

    Each round independently samples a pure action from both strategies,
    resolves seeds, and cascades; a win for player 1 is a strictly positive
    spread difference, equal spreads count as draws. ``seed`` is recorded in
    the stats only; all randomness comes from ``rng``.
    """
    if rounds < 1:
        raise GameError("rounds must be >= 1")
    run_seeds = draw_seeds(rng, rounds)
    nodes = spec.values.nodes
    pairs = []
    for _ in range(rounds):
        a1 = strat1.sample(rng)
        a2 = strat2.sample(rng)
        spec.validate_allocation(a1, 1)
        spec.validate_allocation(a2, 2)
        pairs.append(assign_seeds(a1, a2, nodes, rng))
    i1, i2 = _diffuse_many(g, pairs, run_seeds, workers=workers)
    diff = (i1 - i2).astype(np.float64)
    return CompetitionStats(
        rounds=rounds,
        win_pct=100.0 * float(np.count_nonzero(diff > 0)) / rounds,
        draw_pct=100.0 * float(np.count_nonzero(diff == 0)) / rounds,
        avg=float(np.mean(diff)),
        std=float(np.std(diff)),
        seed=seed,
    )


def degree_values(g: Graph, nodes) -> np.ndarray:
    """Out-degree of each node; the plain centrality baseline value table."""
    return g.out_degrees()[np.asarray(nodes, dtype=np.int64)].astype(np.float64)


def payoff_error_experiment(
    g: Graph,
    idx: RRIndex,
    n: int,
    trials: int,
    mc_rounds: int,
    rng: np.random.Generator,
    workers: int = 1,
) -> dict[str, float]:
    """Mean absolute payoff-estimation error of each value method.

    Per trial the top-n influential nodes are split uniformly among player 1,
    player 2 and neither; ground truth is the mean cascade spread difference
    over ``mc_rounds`` runs, and each method's estimate is its value sum over
    player 1 minus player 2.
    """
    top = select_seeds(idx, n)
    tables = {
        "weighted": estimate_values(idx, top).values,
        "simple": estimate_values_simple(idx, top).values,
        "degree": degree_values(g, top),
    }
    errors = {name: 0.0 for name in tables}
    for _ in range(trials):
        assignment = rng.integers(0, 3, size=n)
        run_seeds = draw_seeds(rng, mc_rounds)
        s1 = top[assignment == 0].astype(np.int32)
        s2 = top[assignment == 1].astype(np.int32)
        i1, i2 = _diffuse_many(g, [(s1, s2)] * mc_rounds, run_seeds, workers=workers)
        truth = float(np.mean(i1 - i2))
        for name, values in tables.items():
            estimate = float(np.sum(values[assignment == 0]) - np.sum(values[assignment == 1]))
            errors[name] += abs(truth - estimate)
    return {name: err / trials for name, err in errors.items()}
