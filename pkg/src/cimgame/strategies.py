"""Baseline allocation strategies and best responses to them.

Baselines: one unit on each of the top k nodes, two units on the top k/2,
and random allocations (optionally capped per node) that always spend the
whole budget. A strategy is anything with a ``sample(rng) -> Allocation``
method; tournaments resample it every round.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .best_response import best_response
from .game import Allocation, GameError, GameSpec, MixedStrategy


@dataclass(frozen=True)
class FixedStrategy:
    """Plays one pure allocation every round."""

    name: str
    action: Allocation

    def sample(self, rng) -> Allocation:
        return self.action


@dataclass(frozen=True)
class NashStrategy:
    """Samples an equilibrium mixture each round."""

    name: str
    mixed: MixedStrategy

    def sample(self, rng) -> Allocation:
        return self.mixed.sample(rng)


@dataclass(frozen=True)
class RandomStrategy:
    """Sequential random allocation that exhausts the budget.

    Walks the nodes in influence order drawing a positive amount up to the
    cap, clamped from below so the remaining nodes can still absorb the
    leftover budget; once the budget is spent the rest get zero.
    """

    spec: GameSpec
    player: int
    cap: int | None = None

    def __post_init__(self):
        k = self.spec.budget(self.player)
        cap = self.cap if self.cap is not None else k
        if not 1 <= cap <= k:
            raise GameError(f"random cap must be in 1..{k}, got {cap}")
        packages = set(self.spec.packages(self.player))
        if not set(range(1, cap + 1)) <= packages:
            raise GameError(f"random strategy draws need packages 1..{cap} available")
        if self.spec.n * cap < k:
            raise GameError(
                f"cannot exhaust budget {k} with {self.spec.n} nodes capped at {cap}"
            )

    @property
    def name(self) -> str:
        return "random" if self.cap is None else f"random{self.cap}"

    def sample(self, rng) -> Allocation:
        k = self.spec.budget(self.player)
        cap = self.cap if self.cap is not None else k
        n = self.spec.n
        amounts = [0] * n
        remaining = k
        for j in range(n):
            if remaining == 0:
                break
            hi = min(cap, remaining)
            lo = max(1, remaining - cap * (n - 1 - j))
            amounts[j] = int(rng.integers(lo, hi + 1))
            remaining -= amounts[j]
        return Allocation(amounts=tuple(amounts))


def gen_oneeach(spec: GameSpec, player: int = 1) -> Allocation:
    """One unit on each of the first k influential nodes."""
    k = spec.budget(player)
    if spec.n < k:
        raise GameError(f"oneeach needs n >= k, got n={spec.n}, k={k}")
    if 1 not in spec.packages(player):
        raise GameError("oneeach needs package value 1")
    return Allocation(amounts=tuple(1 if j < k else 0 for j in range(spec.n)))


def gen_twoeach(spec: GameSpec, player: int = 1) -> Allocation:
    """Two units on each of the first k/2 nodes; odd leftover unit if 1 is a package."""
    k = spec.budget(player)
    packages = spec.packages(player)
    if 2 not in packages:
        raise GameError("twoeach needs package value 2")
    pairs = k // 2
    leftover = 1 if (k % 2 == 1 and 1 in packages) else 0
    if pairs + (1 if leftover else 0) > spec.n:
        raise GameError(f"twoeach needs {pairs + leftover} nodes, have {spec.n}")
    amounts = [0] * spec.n
    for j in range(pairs):
        amounts[j] = 2
    if leftover:
        amounts[pairs] = 1
    return Allocation(amounts=tuple(amounts))


def gen_random(spec: GameSpec, z: int | None, rng) -> Allocation:
    """One draw of the random baseline with per-node cap z (or k uncapped)."""
    return RandomStrategy(spec=spec, player=1, cap=z).sample(rng)


def gen_best_response_to(
    target, spec: GameSpec, samples: int, rng, player: int
) -> Allocation:
    """Exact best response to what the target strategy plays.

    Fixed targets become point masses and mixtures are answered directly;
    stochastic generators are approximated by the empirical mixture of
    ``samples`` draws before best-responding.
    """
    if samples < 1:
        raise GameError("samples must be >= 1")
    if isinstance(target, FixedStrategy):
        q = MixedStrategy.point_mass(target.action)
    elif isinstance(target, NashStrategy):
        q = target.mixed
    else:
        counter = Counter(target.sample(rng) for _ in range(samples))
        actions = sorted(counter, key=lambda a: a.amounts)
        q = MixedStrategy(
            support=tuple(actions),
            probs=tuple(counter[a] / samples for a in actions),
        )
    return best_response(q, spec, player)[0]


def _load_equilibrium_strategy(path, player: int) -> MixedStrategy:
    with open(path) as fh:
        payload = json.load(fh)
    key = "nash1" if player == 1 else "nash2"
    try:
        return MixedStrategy.from_json_obj(payload[key])
    except KeyError as exc:
        raise GameError(f"{path}: missing {key} strategy") from exc


def parse_strategy(
    text: str,
    spec: GameSpec,
    player: int,
    rng,
    equilibrium_path=None,
    default_samples: int = 1000,
):
    """Build a strategy from its compact CLI form.

    Forms: ``oneeach``, ``twoeach``, ``random``, ``random:Z``,
    ``nash[:equilibrium.json]``, ``fixed:allocation.json``, and
    ``br:TARGET[:SAMPLES]`` for the best response to TARGET as played by the
    opponent.
    """
    tokens = text.strip().split(":")
    kind = tokens[0]
    if kind == "oneeach" and len(tokens) == 1:
        return FixedStrategy(name="oneeach", action=gen_oneeach(spec, player))
    if kind == "twoeach" and len(tokens) == 1:
        return FixedStrategy(name="twoeach", action=gen_twoeach(spec, player))
    if kind == "random":
        if len(tokens) == 1:
            return RandomStrategy(spec=spec, player=player, cap=None)
        if len(tokens) == 2:
            return RandomStrategy(spec=spec, player=player, cap=int(tokens[1]))
    if kind == "nash":
        path = ":".join(tokens[1:]) if len(tokens) > 1 else equilibrium_path
        if path is None:
            raise GameError("nash strategy needs an equilibrium file")
        return NashStrategy(name="nash", mixed=_load_equilibrium_strategy(path, player))
    if kind == "fixed" and len(tokens) >= 2:
        path = ":".join(tokens[1:])
        with open(path) as fh:
            action = Allocation.from_json_obj(json.load(fh))
        return FixedStrategy(name="fixed", action=action)
    if kind == "br" and len(tokens) >= 2:
        rest = tokens[1:]
        samples = default_samples
        if len(rest) >= 2 and rest[-1].isdigit():
            samples = int(rest[-1])
            rest = rest[:-1]
        target_text = ":".join(rest)
        opponent = 2 if player == 1 else 1
        target = parse_strategy(
            target_text, spec, opponent, rng, equilibrium_path, default_samples
        )
        action = gen_best_response_to(target, spec, samples, rng, player)
        return FixedStrategy(name=f"br({target.name})", action=action)
    raise GameError(f"cannot parse strategy {text!r}")
