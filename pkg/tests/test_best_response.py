import numpy as np
import pytest

from cimgame import (
    Allocation,
    GameSpec,
    InfluenceValues,
    MixedStrategy,
    best_response,
    build_step_profiles,
    enumerate_allocations,
    payoff_mixed,
)

from _oracles import brute_force_best_response, random_instance


@pytest.fixture
def worked_game(worked_values):
    spec = GameSpec(values=worked_values, k1=3, k2=3, d1=(1, 2, 3), d2=(1, 2, 3))
    q = MixedStrategy(
        support=(Allocation((2, 0, 1, 0)), Allocation((2, 1, 0, 0))),
        probs=(0.8, 0.2),
    )
    return spec, q


class TestStepProfiles:
    def test_worked_example_first_node(self, worked_game):
        spec, q = worked_game
        profile = build_step_profiles(q, spec, player=1)[0]
        # winning amount 3 gains +4, tying at 2 gains 0, 0 loses the node;
        # offering 1 is pruned because it gains exactly as much as 0
        assert profile.candidates == (0, 2, 3)
        assert profile.gains == (-4.0, 0.0, 4.0)

    def test_untargeted_node_single_step(self):
        iv = InfluenceValues(nodes=[0], values=[7.0])
        spec = GameSpec(values=iv, k1=3, k2=3, d1=(1, 2, 3), d2=(1, 2, 3))
        q = MixedStrategy.point_mass(Allocation((0,)))
        profile = build_step_profiles(q, spec, player=1)[0]
        assert profile.candidates == (0, 1)
        assert profile.gains == (0.0, 7.0)

    def test_two_action_uniform_profile(self):
        # opponent plays 1 or 3 with equal probability on a node worth 2;
        # expected gains step through -2, -1, 0, +1, +2 with no pruning
        iv = InfluenceValues(nodes=[0], values=[2.0])
        spec = GameSpec(values=iv, k1=4, k2=4, d1=(1, 2, 3, 4), d2=(1, 2, 3, 4))
        q = MixedStrategy(
            support=(Allocation((1,)), Allocation((3,))), probs=(0.5, 0.5)
        )
        profile = build_step_profiles(q, spec, player=1)[0]
        assert profile.candidates == (0, 1, 2, 3, 4)
        assert profile.gains == (-2.0, -1.0, 0.0, 1.0, 2.0)

    def test_invariants_on_random_instances(self):
        rng = np.random.default_rng(30)
        for _ in range(60):
            spec, q = random_instance(rng, exact=False)
            for profile in build_step_profiles(q, spec, player=1):
                cands, gains = profile.candidates, profile.gains
                assert cands[0] == 0
                assert list(cands) == sorted(cands)
                assert all(g2 > g1 for g1, g2 in zip(gains, gains[1:]))
                # every unlisted feasible amount matches a listed cheaper one
                full = {0, *spec.d1}
                values = spec.values.values
                for b in full - set(cands):
                    expect = sum(
                        p * (values[0] if b > a.amounts[0] else -values[0] if b < a.amounts[0] else 0.0)
                        for p, a in zip(q.probs, q.support)
                    )
                    lower = max(c for c in cands if c <= b)
                    got = gains[cands.index(lower)]
                    assert got == pytest.approx(expect, abs=1e-12)
                break  # node 0 only; the formula above is per-node

    def test_pruning_keeps_cheapest_of_level(self, worked_game):
        spec, q = worked_game
        profiles = build_step_profiles(q, spec, player=1)
        for profile in profiles:
            assert len(set(profile.gains)) == len(profile.gains)


class TestBestResponse:
    def test_worked_example_optimum(self, worked_game):
        spec, q = worked_game
        action, payoff = best_response(q, spec, player=1)
        assert action.amounts == (3, 0, 0, 0)
        assert abs(payoff - 1.8) <= 1e-9

    def test_all_zero_opponent_unit_packages(self):
        iv = InfluenceValues(nodes=[0, 1, 2, 3], values=[1.0, 6.0, 2.0, 5.0])
        spec = GameSpec(values=iv, k1=2, k2=2, d1=(1,), d2=(1,))
        q = MixedStrategy.point_mass(Allocation((0, 0, 0, 0)))
        action, payoff = best_response(q, spec, player=1)
        assert action.amounts == (0, 1, 0, 1)  # two highest-value nodes
        assert payoff == 11.0

    def test_single_node_tie_beats_losing(self):
        iv = InfluenceValues(nodes=[0], values=[3.25])
        spec = GameSpec(values=iv, k1=1, k2=1, d1=(1,), d2=(1,))
        q = MixedStrategy.point_mass(Allocation((1,)))
        action, payoff = best_response(q, spec, player=1)
        assert action.amounts == (1,)
        assert payoff == 0.0

    def test_returned_payoff_consistent_with_game_model(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            spec, q = random_instance(rng, exact=False)
            action, payoff = best_response(q, spec, player=1)
            assert payoff == payoff_mixed(action, q, spec, player=1)

    def test_feasibility_always(self):
        rng = np.random.default_rng(32)
        for _ in range(60):
            for player in (1, 2):
                spec, q = random_instance(rng, exact=False, responder=player)
                action, _ = best_response(q, spec, player)
                assert spec.is_feasible(action, player)

    def test_matches_brute_force_generic_floats(self):
        rng = np.random.default_rng(33)
        for _ in range(60):
            spec, q = random_instance(rng, exact=False)
            action, payoff = best_response(q, spec, player=1)
            _, brute_val = brute_force_best_response(q, spec, player=1)
            assert payoff == pytest.approx(brute_val, abs=1e-9)

    def test_matches_brute_force_exactly_on_exact_instances(self):
        rng = np.random.default_rng(34)
        for _ in range(60):
            spec, q = random_instance(rng, exact=True)
            action, payoff = best_response(q, spec, player=1)
            brute_action, brute_val = brute_force_best_response(q, spec, player=1)
            assert payoff == brute_val
            assert action == brute_action

    def test_dominates_sampled_alternatives(self):
        rng = np.random.default_rng(35)
        for _ in range(20):
            spec, q = random_instance(rng, exact=False)
            _, payoff = best_response(q, spec, player=1)
            actions = list(enumerate_allocations(spec.n, spec.k1, spec.d1))
            for _ in range(10):
                other = actions[rng.integers(len(actions))]
                assert payoff >= payoff_mixed(other, q, spec, player=1) - 1e-12

    def test_pruning_soundness_against_full_candidate_dp(self):
        # rerunning the DP over the unpruned candidate set {0} u D must not
        # find anything better than the pruned profiles do
        rng = np.random.default_rng(36)
        for _ in range(40):
            spec, q = random_instance(rng, exact=False)
            _, pruned_payoff = best_response(q, spec, player=1)
            best_full = max(
                payoff_mixed(a, q, spec, player=1)
                for a in enumerate_allocations(spec.n, spec.k1, spec.d1)
            )
            assert pruned_payoff == pytest.approx(best_full, abs=1e-9)

    def test_tie_break_prefers_min_spend_then_lex(self):
        # both nodes worth the same; opponent ignores them; k lets us overspend
        iv = InfluenceValues(nodes=[0, 1], values=[2.0, 2.0])
        spec = GameSpec(values=iv, k1=3, k2=3, d1=(1, 2, 3), d2=(1, 2, 3))
        q = MixedStrategy.point_mass(Allocation((0, 0)))
        action, payoff = best_response(q, spec, player=1)
        # winning both needs 1+1; any extra spend is pure waste
        assert action.amounts == (1, 1)
        assert payoff == 4.0
