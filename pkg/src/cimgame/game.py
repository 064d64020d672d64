"""Budget-allocation game over influential nodes: actions, payoffs.

An action assigns one advertising-package value (or zero) to each
influential node, spending at most the player's budget. The game is
zero-sum: a node's value is gained by whoever offers it strictly more and
lost by the other side, with ties contributing zero in expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .rrsets import InfluenceValues


class GameError(ValueError):
    """Infeasible action or malformed game description."""


@dataclass(frozen=True)
class Allocation:
    """Per-node package amounts, indexed by position in the influential set."""

    amounts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "amounts", tuple(int(a) for a in self.amounts))

    @property
    def total(self) -> int:
        return sum(self.amounts)

    def __len__(self) -> int:
        return len(self.amounts)

    def to_json_obj(self) -> dict:
        return {"amounts": list(self.amounts)}

    @classmethod
    def from_json_obj(cls, obj) -> "Allocation":
        return cls(amounts=tuple(obj["amounts"]))

    @classmethod
    def zeros(cls, n: int) -> "Allocation":
        return cls(amounts=(0,) * n)


@dataclass(frozen=True)
class MixedStrategy:
    """Probability distribution over distinct allocations."""

    support: tuple[Allocation, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        support = tuple(self.support)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if len(support) != len(probs) or not support:
            raise GameError("support and probs must be nonempty and equal length")
        if len(set(support)) != len(support):
            raise GameError("support entries must be distinct")
        if any(p <= 0 for p in probs):
            raise GameError("support probabilities must be positive")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise GameError(f"probabilities sum to {sum(probs)!r}, not 1")

    @classmethod
    def point_mass(cls, action: Allocation) -> "MixedStrategy":
        return cls(support=(action,), probs=(1.0,))

    def sample(self, rng: np.random.Generator) -> Allocation:
        i = int(rng.choice(len(self.support), p=np.asarray(self.probs)))
        return self.support[i]

    def to_json_obj(self) -> dict:
        return {
            "support": [a.to_json_obj() for a in self.support],
            "probs": list(self.probs),
        }

    @classmethod
    def from_json_obj(cls, obj) -> "MixedStrategy":
        return cls(
            support=tuple(Allocation.from_json_obj(a) for a in obj["support"]),
            probs=tuple(obj["probs"]),
        )


def _check_packages(d) -> tuple[int, ...]:
    d = tuple(sorted(int(x) for x in d))
    if not d or any(x < 1 for x in d) or len(set(d)) != len(d):
        raise GameError(f"package set must be distinct positive integers, got {d}")
    return d


@dataclass(frozen=True, eq=False)
class GameSpec:
    """Influential values plus both players' budgets and package sets."""

    values: InfluenceValues
    k1: int
    k2: int
    d1: tuple[int, ...]
    d2: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "d1", _check_packages(self.d1))
        object.__setattr__(self, "d2", _check_packages(self.d2))
        if self.k1 < 1 or self.k2 < 1:
            raise GameError("budgets must be >= 1")

    @classmethod
    def symmetric_game(cls, values: InfluenceValues, k: int, d=None) -> "GameSpec":
        d = tuple(range(1, k + 1)) if d is None else tuple(d)
        return cls(values=values, k1=k, k2=k, d1=d, d2=d)

    @property
    def n(self) -> int:
        return self.values.n

    @property
    def symmetric(self) -> bool:
        return self.k1 == self.k2 and self.d1 == self.d2

    def budget(self, player: int) -> int:
        return self.k1 if player == 1 else self.k2

    def packages(self, player: int) -> tuple[int, ...]:
        return self.d1 if player == 1 else self.d2

    def is_feasible(self, a: Allocation, player: int) -> bool:
        allowed = set(self.packages(player))
        return (
            len(a) == self.n
            and a.total <= self.budget(player)
            and all(x == 0 or x in allowed for x in a.amounts)
        )

    def validate_allocation(self, a: Allocation, player: int) -> None:
        if not self.is_feasible(a, player):
            raise GameError(
                f"allocation {a.amounts} infeasible for player {player} "
                f"(k={self.budget(player)}, D={self.packages(player)}, n={self.n})"
            )


def node_gain(b: int, a: int, v: float) -> float:
    """Signed value of one node: win +v, lose -v, tie (or both zero) 0."""
    if b > a:
        return v
    if b < a:
        return -v
    return 0.0


def payoff_pure(a1: Allocation, a2: Allocation, spec: GameSpec) -> float:
    """First player's payoff for a pure action pair; player 2 gets the negation."""
    spec.validate_allocation(a1, 1)
    spec.validate_allocation(a2, 2)
    values = spec.values.values
    total = 0.0
    for j in range(spec.n):
        total += node_gain(a1.amounts[j], a2.amounts[j], values[j])
    return float(total)


def payoff_mixed(a: Allocation, q: MixedStrategy, spec: GameSpec, player: int = 1) -> float:
    """Expected payoff of pure ``a`` (for ``player``) against opponent mixture ``q``."""
    spec.validate_allocation(a, player)
    opponent = 2 if player == 1 else 1
    values = spec.values.values
    total = 0.0
    for prob, action in zip(q.probs, q.support):
        spec.validate_allocation(action, opponent)
        part = 0.0
        for j in range(spec.n):
            part += node_gain(a.amounts[j], action.amounts[j], values[j])
        total += prob * part
    return float(total)


def action_space_size(k: int, n: int) -> int:
    """Number of exhaustive-spend allocations with D = {1..k}: C(k+n-1, n-1)."""
    if k < 0 or n < 1:
        raise GameError(f"need k >= 0 and n >= 1, got k={k}, n={n}")
    return math.comb(k + n - 1, n - 1)


def enumerate_allocations(n: int, k: int, packages) -> Iterator[Allocation]:
    """All feasible allocations (sum <= k, entries in {0} u D), lexicographic."""
    packages = _check_packages(packages)
    choices = (0,) + packages

    def rec(j: int, remaining: int, prefix: tuple[int, ...]):
        if j == n:
            yield Allocation(amounts=prefix)
            return
        for c in choices:
            if c <= remaining:
                yield from rec(j + 1, remaining - c, prefix + (c,))

    yield from rec(0, k, ())
