"""Exact pure best response to a mixed strategy.

Against a fixed opponent mixture the expected gain at each node is a step
function of the amount offered: it only changes where a comparison against
some amount in the opponent's support flips from losing to tying or from
tying to winning. Evaluating the gain at just those candidate amounts and
running a budget-constrained DP over (node, remaining budget) yields the
exact optimum over the full action space.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .game import Allocation, GameSpec, MixedStrategy, node_gain, payoff_mixed


@dataclass(frozen=True)
class StepProfile:
    """Candidate amounts for one node with their expected gains.

    Candidates are ascending, always start at 0, carry non-decreasing gains,
    and keep only the cheapest amount of each distinct gain level; any
    feasible amount not listed gains exactly as much as the nearest listed
    amount below it.
    """

    candidates: tuple[int, ...]
    gains: tuple[float, ...]


def _gain(b: int, opp_amounts, probs, value: float) -> float:
    total = 0.0
    for p, a in zip(probs, opp_amounts):
        total += p * node_gain(b, a, value)
    return float(total)


def build_step_profiles(
    q: MixedStrategy, spec: GameSpec, player: int
) -> list[StepProfile]:
    """Per-node candidate amounts and gains against opponent mixture ``q``."""
    packages = spec.packages(player)
    package_set = set(packages)
    values = spec.values.values
    profiles = []
    for j in range(spec.n):
        opp = [action.amounts[j] for action in q.support]
        cands = {0}
        for a in set(opp):
            if a in package_set:
                cands.add(a)  # cheapest tie
            pos = bisect_right(packages, a)
            if pos < len(packages):
                cands.add(packages[pos])  # cheapest win over a
        ordered = sorted(cands)
        gains = [_gain(b, opp, q.probs, values[j]) for b in ordered]
        kept_c = [ordered[0]]
        kept_g = [gains[0]]
        for b, g in zip(ordered[1:], gains[1:]):
            if g != kept_g[-1]:
                kept_c.append(b)
                kept_g.append(g)
        profiles.append(StepProfile(candidates=tuple(kept_c), gains=tuple(kept_g)))
    return profiles


def best_response(
    q: MixedStrategy, spec: GameSpec, player: int
) -> tuple[Allocation, float]:
    """Exact argmax pure action against ``q`` plus its expected payoff.

    DP over suffixes: val[j][r] is the best gain from nodes j.. with budget r
    left, sp[j][r] the minimum spend achieving it. Reconstruction takes the
    smallest candidate at every node, so ties resolve to maximum payoff,
    then minimum total spend, then the lexicographically smallest action.
    """
    profiles = build_step_profiles(q, spec, player)
    n = spec.n
    k = spec.budget(player)

    val = [[0.0] * (k + 1) for _ in range(n + 1)]
    sp = [[0] * (k + 1) for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        cands = profiles[j].candidates
        gains = profiles[j].gains
        for r in range(k + 1):
            best_v = None
            best_s = 0
            for c, g in zip(cands, gains):
                if c > r:
                    break
                v = g + val[j + 1][r - c]
                s = c + sp[j + 1][r - c]
                if best_v is None or v > best_v or (v == best_v and s < best_s):
                    best_v = v
                    best_s = s
            val[j][r] = best_v
            sp[j][r] = best_s

    amounts = []
    r = k
    for j in range(n):
        cands = profiles[j].candidates
        gains = profiles[j].gains
        for c, g in zip(cands, gains):
            if c > r:
                break
            if g + val[j + 1][r - c] == val[j][r] and c + sp[j + 1][r - c] == sp[j][r]:
                amounts.append(c)
                r -= c
                break
    action = Allocation(amounts=tuple(amounts))
    return action, payoff_mixed(action, q, spec, player)
