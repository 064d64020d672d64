import json

import numpy as np
import pytest

from cimgame import (
    Allocation,
    GameError,
    GameSpec,
    InfluenceValues,
    MixedStrategy,
    gen_best_response_to,
    gen_oneeach,
    gen_random,
    gen_twoeach,
    parse_strategy,
    payoff_mixed,
)
from cimgame.strategies import FixedStrategy, NashStrategy, RandomStrategy

from _oracles import brute_force_best_response


def spec_for(values, k, d=None, n=None):
    values = list(values)
    iv = InfluenceValues(nodes=list(range(len(values))), values=values)
    d = tuple(range(1, k + 1)) if d is None else tuple(d)
    return GameSpec(values=iv, k1=k, k2=k, d1=d, d2=d)


class TestOneEach:
    def test_basic(self):
        assert gen_oneeach(spec_for([4, 3, 2, 1], k=3)).amounts == (1, 1, 1, 0)

    def test_budget_equals_nodes(self):
        assert gen_oneeach(spec_for([1, 1, 1], k=3)).amounts == (1, 1, 1)

    def test_larger_set(self):
        a = gen_oneeach(spec_for(range(1, 16), k=10))
        assert a.amounts == tuple([1] * 10 + [0] * 5)

    def test_requires_enough_nodes(self):
        with pytest.raises(GameError):
            gen_oneeach(spec_for([1, 2], k=3))

    def test_requires_unit_package(self):
        with pytest.raises(GameError):
            gen_oneeach(spec_for([1, 2, 3], k=2, d=(2,)))


class TestTwoEach:
    def test_even_budget(self):
        assert gen_twoeach(spec_for([4, 3, 2, 1], k=6)).amounts == (2, 2, 2, 0)

    def test_odd_budget_remainder_unit(self):
        assert gen_twoeach(spec_for([4, 3, 2, 1], k=3)).amounts == (2, 1, 0, 0)

    def test_odd_budget_without_unit_package_drops_remainder(self):
        assert gen_twoeach(spec_for([4, 3], k=3, d=(2, 3))).amounts == (2, 0)

    def test_single_node(self):
        assert gen_twoeach(spec_for([4], k=2)).amounts == (2,)

    def test_requires_two_package(self):
        with pytest.raises(GameError):
            gen_twoeach(spec_for([4, 3], k=2, d=(1, 3)))

    def test_requires_enough_nodes(self):
        with pytest.raises(GameError):
            gen_twoeach(spec_for([4, 3], k=10))


class TestRandom:
    def test_unit_cap_forces_prefix(self):
        rng = np.random.default_rng(60)
        for _ in range(20):
            a = gen_random(spec_for([5, 4, 3, 2, 1], k=3), z=1, rng=rng)
            assert a.amounts == (1, 1, 1, 0, 0)

    def test_single_node_full_budget(self):
        rng = np.random.default_rng(61)
        a = gen_random(spec_for([5], k=4), z=4, rng=rng)
        assert a.amounts == (4,)

    def test_always_exhausts_budget_within_cap(self):
        spec = spec_for([4, 3, 2, 1], k=4)
        rng = np.random.default_rng(62)
        seen = set()
        for _ in range(10_000):
            a = gen_random(spec, z=2, rng=rng)
            assert a.total == 4
            assert all(x <= 2 for x in a.amounts)
            seen.add(a.amounts)
        assert len(seen) > 1

    def test_infeasible_cap_rejected(self):
        with pytest.raises(GameError):
            gen_random(spec_for([1, 2], k=5), z=2, rng=np.random.default_rng(0))

    def test_earlier_positions_get_more_budget(self):
        spec = spec_for([4, 3, 2, 1], k=4)
        rng = np.random.default_rng(63)
        draws = np.array([gen_random(spec, 2, rng).amounts for _ in range(4000)])
        means = draws.mean(axis=0)
        assert means[0] > means[-1]

    def test_reproducible(self):
        spec = spec_for([4, 3, 2, 1], k=4)
        a = [gen_random(spec, 3, np.random.default_rng(64)) for _ in range(5)]
        b = [gen_random(spec, 3, np.random.default_rng(64)) for _ in range(5)]
        assert a == b


class TestBestResponseTo:
    def test_against_oneeach_matches_brute_force(self):
        spec = spec_for([4, 3, 2, 1], k=3)
        target = FixedStrategy("oneeach", gen_oneeach(spec))
        rng = np.random.default_rng(65)
        action = gen_best_response_to(target, spec, samples=10, rng=rng, player=2)
        q = MixedStrategy.point_mass(target.action)
        brute_action, brute_val = brute_force_best_response(q, spec, player=2)
        assert action == brute_action
        assert payoff_mixed(action, q, spec, player=2) == brute_val

    def test_against_nothing_buys_top_nodes_cheaply(self):
        spec = spec_for([5.0, 1.0, 4.0, 2.0], k=7, d=(2, 3))
        target = FixedStrategy("silent", Allocation((0, 0, 0, 0)))
        action = gen_best_response_to(target, spec, 10, np.random.default_rng(66), player=1)
        assert action.amounts == (2, 0, 2, 2)

    def test_nash_target_answered_exactly(self):
        spec = spec_for([4, 3, 2, 1], k=3)
        mixed = MixedStrategy(
            support=(Allocation((2, 0, 1, 0)), Allocation((2, 1, 0, 0))),
            probs=(0.8, 0.2),
        )
        target = NashStrategy("nash", mixed)
        action = gen_best_response_to(target, spec, 5000, np.random.default_rng(67), player=1)
        assert action.amounts == (3, 0, 0, 0)

    def test_stochastic_target_uses_empirical_mixture(self):
        spec = spec_for([4, 3, 2, 1], k=3)
        target = RandomStrategy(spec=spec, player=2, cap=2)
        rng = np.random.default_rng(68)
        action = gen_best_response_to(target, spec, samples=500, rng=rng, player=1)
        assert spec.is_feasible(action, 1)
        # answering the true sampler beats the baselines it was built against
        fresh = np.random.default_rng(69)
        draws = [target.sample(fresh) for _ in range(2000)]
        from collections import Counter

        counts = Counter(draws)
        q = MixedStrategy(
            support=tuple(counts), probs=tuple(c / 2000 for c in counts.values())
        )
        br_payoff = payoff_mixed(action, q, spec, player=1)
        base_payoff = payoff_mixed(gen_oneeach(spec), q, spec, player=1)
        assert br_payoff >= base_payoff - 1e-9

    def test_samples_validated(self):
        spec = spec_for([1.0], k=1)
        target = FixedStrategy("x", Allocation((0,)))
        with pytest.raises(GameError):
            gen_best_response_to(target, spec, 0, np.random.default_rng(0), player=1)


class TestParseStrategy:
    def make(self, text, spec, player=1, eq_path=None):
        rng = np.random.default_rng(70)
        return parse_strategy(text, spec, player, rng, equilibrium_path=eq_path)

    def test_named_baselines(self):
        spec = spec_for([4, 3, 2, 1], k=3)
        assert self.make("oneeach", spec).action.amounts == (1, 1, 1, 0)
        assert self.make("twoeach", spec).action.amounts == (2, 1, 0, 0)
        assert self.make("random", spec).cap is None
        assert self.make("random:2", spec).cap == 2

    def test_br_form_resolves_target_for_opponent(self):
        spec = spec_for([4, 3, 2, 1], k=3)
        strat = self.make("br:oneeach:50", spec, player=2)
        assert strat.name == "br(oneeach)"
        q = MixedStrategy.point_mass(gen_oneeach(spec, 1))
        brute_action, _ = brute_force_best_response(q, spec, player=2)
        assert strat.action == brute_action

    def test_nash_form_reads_equilibrium(self, tmp_path):
        spec = spec_for([4, 3], k=2)
        payload = {
            "nash1": {"support": [{"amounts": [1, 1]}], "probs": [1.0]},
            "nash2": {"support": [{"amounts": [2, 0]}, {"amounts": [1, 1]}],
                      "probs": [0.5, 0.5]},
        }
        path = tmp_path / "eq.json"
        path.write_text(json.dumps(payload))
        s1 = self.make("nash", spec, player=1, eq_path=str(path))
        s2 = self.make(f"nash:{path}", spec, player=2)
        assert s1.mixed.support == (Allocation((1, 1)),)
        assert len(s2.mixed.support) == 2

    def test_fixed_form_reads_allocation(self, tmp_path):
        spec = spec_for([4, 3], k=2)
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"amounts": [0, 2]}))
        strat = self.make(f"fixed:{path}", spec)
        assert strat.action.amounts == (0, 2)

    def test_unknown_form_rejected(self):
        spec = spec_for([4, 3], k=2)
        with pytest.raises(GameError):
            self.make("cleverness", spec)
        with pytest.raises(GameError):
            self.make("nash", spec)  # no equilibrium file anywhere
