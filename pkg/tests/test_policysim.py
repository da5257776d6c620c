import random

import pytest

from harness import random_spec
from prefdesign.histories import History, Transition
from prefdesign.lotteries import Lottery
from prefdesign.oracles import (
    MarkovOracle,
    PreferenceOutcome,
    RewardSpec,
    lottery_utility,
    markov_utility,
)
from prefdesign.policysim import (
    estimate_value,
    BudgetExceededError,
    SCRIPTED_ENVS,
    TabularEnv,
    TabularPolicy,
    check_eventual_dominance,
    compare_policies_by_goal,
    compare_policies_by_reward,
    env_from_obj,
    env_to_obj,
    n_step_value,
    policy_from_obj,
    policy_to_obj,
    prediscounted_stream,
    rollout_distribution,
    sample_histories,
)
from prefdesign.rationals import Rational

one = Rational(1)
half = Rational(1, 2)


def det_env():
    return TabularEnv(
        states=("s",),
        actions=("u",),
        obs_map={"s": "o"},
        transitions={"s": {"u": {"s": one}}},
        initial={"s": one},
    )


def cycle_env(n_states=2, actions=("a1", "a2")):
    states = tuple(f"s{i}" for i in range(n_states))
    return TabularEnv(
        states=states,
        actions=actions,
        obs_map={s: s for s in states},
        transitions={
            states[i]: {a: {states[(i + 1) % n_states]: one} for a in actions}
            for i in range(n_states)
        },
        initial={states[0]: one},
    )


def stochastic_env():
    return TabularEnv(
        states=("p", "q"),
        actions=("a1", "a2"),
        obs_map={"p": "op", "q": "oq"},
        transitions={
            "p": {"a1": {"p": half, "q": half}, "a2": {"q": one}},
            "q": {"a1": {"p": Rational(1, 3), "q": Rational(2, 3)}, "a2": {"p": one}},
        },
        initial={"p": Rational(3, 4), "q": Rational(1, 4)},
    )


def constant_policy(action, actions=("a1", "a2"), observations=("op", "oq")):
    return TabularPolicy(rules={o: {action: one} for o in observations})


class TestRollout:
    def test_deterministic_product_is_dirac(self):
        env = det_env()
        policy = TabularPolicy(rules={"o": {"u": one}})
        dist = rollout_distribution(env, policy, 3)
        expected = History.of(*([Transition("o", "u")] * 3))
        assert dist == Lottery.dirac(expected)

    def test_fair_coin_two_steps_uniform(self):
        env = SCRIPTED_ENVS["fair-coin"]()
        policy = TabularPolicy(rules={"heads": {"go": one}, "tails": {"go": one}})
        dist = rollout_distribution(env, policy, 2)
        assert len(dist) == 4
        assert all(w == Rational(1, 4) for _, w in dist.items())

    def test_weights_sum_exactly_one(self):
        env = stochastic_env()
        for n in (1, 3, 5):
            dist = rollout_distribution(env, constant_policy("a1"), n)
            assert dist.total_weight() == one

    def test_mixed_policy_branches(self):
        env = det_env()
        policy = TabularPolicy(rules={"o": {"u": one}})
        env2 = TabularEnv(
            states=("s",), actions=("u", "v"), obs_map={"s": "o"},
            transitions={"s": {"u": {"s": one}, "v": {"s": one}}}, initial={"s": one},
        )
        mixed = TabularPolicy(rules={"o": {"u": half, "v": half}})
        dist = rollout_distribution(env2, mixed, 2)
        assert len(dist) == 4
        assert dist.weight(History.of(Transition("o", "u"), Transition("o", "v"))) == Rational(1, 4)

    def test_budget_exceeded_suggests_sampling(self):
        env = SCRIPTED_ENVS["fair-coin"]()
        policy = TabularPolicy(rules={"heads": {"go": one}, "tails": {"go": one}})
        with pytest.raises(BudgetExceededError, match="Monte Carlo"):
            rollout_distribution(env, policy, 12, budget=100)

    def test_monte_carlo_mode_is_seeded(self):
        env = stochastic_env()
        a = sample_histories(env, constant_policy("a1"), 4, 50, seed=3)
        b = sample_histories(env, constant_policy("a1"), 4, 50, seed=3)
        assert a == b
        assert all(len(h) == 4 for h in a)

    def test_monte_carlo_estimate_brackets_exact_value(self):
        rng = random.Random(4)
        env = stochastic_env()
        spec = random_spec(rng, env.alphabet)
        policy = constant_policy("a1")
        exact = n_step_value(env, policy, spec, 4)
        mean, stderr = estimate_value(env, policy, spec, 4, samples=4000, seed=9)
        assert stderr > 0
        assert abs(mean - exact) <= 5 * stderr + 1e-12

    def test_monte_carlo_estimate_deterministic_chain_has_zero_error(self):
        t = Transition("o", "u")
        spec = RewardSpec(rewards={t: 1.0}, discounts={t: 0.5})
        policy = TabularPolicy(rules={"o": {"u": one}})
        mean, stderr = estimate_value(det_env(), policy, spec, 2, samples=20)
        assert mean == pytest.approx(1.5)
        assert stderr == 0.0

    def test_horizon_must_be_positive(self):
        with pytest.raises(ValueError):
            rollout_distribution(det_env(), TabularPolicy(rules={"o": {"u": one}}), 0)


class TestNStepValue:
    def test_zero_reward_is_zero(self):
        t = Transition("o", "u")
        spec = RewardSpec(rewards={t: 0.0}, discounts={t: 0.7})
        policy = TabularPolicy(rules={"o": {"u": one}})
        for n in (1, 4, 8):
            assert n_step_value(det_env(), policy, spec, n) == 0.0

    def test_geometric_sum_by_hand(self):
        t = Transition("o", "u")
        spec = RewardSpec(rewards={t: 1.0}, discounts={t: 0.5})
        policy = TabularPolicy(rules={"o": {"u": one}})
        assert n_step_value(det_env(), policy, spec, 2) == pytest.approx(1.5)
        assert n_step_value(det_env(), policy, spec, 4) == pytest.approx(2 * (1 - 2**-4))

    def make_bridge_fixtures(self):
        fixtures = []
        t = Transition("o", "u")
        fixtures.append(
            (det_env(), TabularPolicy(rules={"o": {"u": one}}),
             RewardSpec(rewards={t: 1.0}, discounts={t: 0.5}))
        )
        rng = random.Random(17)
        env = stochastic_env()
        alphabet = env.alphabet
        for action in ("a1", "a2"):
            fixtures.append((env, constant_policy(action), random_spec(rng, alphabet)))
        mixed = TabularPolicy(rules={"op": {"a1": half, "a2": half},
                                     "oq": {"a1": Rational(1, 4), "a2": Rational(3, 4)}})
        fixtures.append((env, mixed, random_spec(rng, alphabet)))
        return fixtures

    def test_value_equals_lottery_utility_of_rollout(self):
        """Expected discounted return is the expected history utility, exactly."""
        for env, policy, spec in self.make_bridge_fixtures():
            for n in range(1, 9):
                dist = rollout_distribution(env, policy, n)
                bridge = lottery_utility(dist, lambda h: markov_utility(h, spec))
                assert abs(n_step_value(env, policy, spec, n, method="enumerate") - bridge) <= 1e-9

    def test_enumeration_and_dp_paths_agree(self):
        for env, policy, spec in self.make_bridge_fixtures():
            for n in range(1, 9):
                v_enum = n_step_value(env, policy, spec, n, method="enumerate")
                v_dp = n_step_value(env, policy, spec, n, method="dp")
                assert abs(v_enum - v_dp) <= 1e-9

    def test_dp_requires_tabular(self):
        env = SCRIPTED_ENVS["fair-coin"]()
        policy = TabularPolicy(rules={"heads": {"go": one}, "tails": {"go": one}})
        t1, t2 = Transition("heads", "go"), Transition("tails", "go")
        spec = RewardSpec(rewards={t1: 1.0, t2: 0.0}, discounts={t1: 1.0, t2: 1.0})
        with pytest.raises(ValueError):
            n_step_value(env, policy, spec, 2, method="dp")


def prop1_fixture():
    """Reward-1-per-step beats alternate-1-0: values n and ceil(n/2)."""
    env = cycle_env()
    spec = RewardSpec(
        rewards={
            Transition("s0", "a1"): 1.0,
            Transition("s1", "a1"): 1.0,
            Transition("s0", "a2"): 1.0,
            Transition("s1", "a2"): 0.0,
        },
        discounts={Transition(s, a): 1.0 for s in ("s0", "s1") for a in ("a1", "a2")},
    )
    pi1 = TabularPolicy(rules={"s0": {"a1": one}, "s1": {"a1": one}})
    pi2 = TabularPolicy(rules={"s0": {"a2": one}, "s1": {"a2": one}})
    return env, spec, pi1, pi2


def oscillating_fixture():
    """Equal averages with period-4 sign-flipping partial-sum differences."""
    env = cycle_env(4)
    rewards_1 = [1.0, 0.0, 0.0, 1.0]
    rewards_2 = [0.0, 1.0, 1.0, 0.0]
    spec = RewardSpec(
        rewards={
            **{Transition(f"s{i}", "a1"): rewards_1[i] for i in range(4)},
            **{Transition(f"s{i}", "a2"): rewards_2[i] for i in range(4)},
        },
        discounts={Transition(f"s{i}", a): 1.0 for i in range(4) for a in ("a1", "a2")},
    )
    pi1 = TabularPolicy(rules={f"s{i}": {"a1": one} for i in range(4)})
    pi2 = TabularPolicy(rules={f"s{i}": {"a2": one} for i in range(4)})
    return env, spec, pi1, pi2


class TestPolicyComparison:
    def test_identical_policies_indifferent(self):
        env, spec, pi1, _ = prop1_fixture()
        oracle = MarkovOracle(spec, env.alphabet)
        verdict = compare_policies_by_goal(oracle, env, pi1, pi1, n_max=8)
        assert verdict.relation == "indifferent"
        assert verdict.n_found == 1

    def test_prop1_fixture_first_preferred_at_two(self):
        env, spec, pi1, pi2 = prop1_fixture()
        oracle = MarkovOracle(spec, env.alphabet)
        by_goal = compare_policies_by_goal(oracle, env, pi1, pi2, n_max=16)
        assert by_goal.relation == "first-preferred"
        assert by_goal.n_found == 2
        assert by_goal.weak_n_found == 1
        by_reward = compare_policies_by_reward(spec, env, pi1, pi2, n_max=16)
        assert by_reward.relation == by_goal.relation
        assert by_reward.n_found == by_goal.n_found

    def test_oscillating_fixture_undetermined(self):
        env, spec, pi1, pi2 = oscillating_fixture()
        oracle = MarkovOracle(spec, env.alphabet)
        verdict = compare_policies_by_goal(oracle, env, pi1, pi2, n_max=16)
        assert verdict.relation == "undetermined-at-horizon"
        assert verdict.n_found is None

    def test_goal_and_reward_paths_agree_on_suite(self):
        """With the goal given by the same spec, both dominance sweeps must match."""
        fixtures = [prop1_fixture(), oscillating_fixture()]
        for env, spec, pi1, pi2 in fixtures:
            oracle = MarkovOracle(spec, env.alphabet)
            for a, b in ((pi1, pi2), (pi2, pi1), (pi1, pi1)):
                by_goal = compare_policies_by_goal(oracle, env, a, b, n_max=12)
                by_reward = compare_policies_by_reward(spec, env, a, b, n_max=12)
                assert by_goal.relation == by_reward.relation
                assert by_goal.n_found == by_reward.n_found


class TestEventualDominance:
    def test_average_reward_gap(self):
        verdict = check_eventual_dominance([1.0], [1.0, 0.0], n_max=200)
        assert verdict.relation == "first-preferred"
        assert verdict.n_found == 2
        assert all(
            v is not PreferenceOutcome.STRICTLY_LESS for v in verdict.verdicts
        ), "dominance must never reverse"

    def test_equal_average_bias_gap(self):
        verdict = check_eventual_dominance([1.0], [0.0, 1.0, 1.0], n_max=200)
        assert verdict.relation == "first-preferred"
        assert verdict.n_found == 1
        assert verdict.strict

    def test_identical_streams_indifferent(self):
        verdict = check_eventual_dominance([1.0, 0.5], [1.0, 0.5], n_max=50)
        assert verdict.relation == "indifferent"

    def test_oscillating_streams_undetermined(self):
        verdict = check_eventual_dominance([1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0],
                                           n_max=200)
        assert verdict.relation == "undetermined-at-horizon"


class TestPrediscountedStream:
    def designer_maps(self, gamma):
        symbols = [Transition("w1"), Transition("w2")]
        rewards = {symbols[0]: 1.0, symbols[1]: 1.0}
        discounts = {symbols[0]: gamma, symbols[1]: gamma}
        return symbols, rewards, discounts

    def test_unit_discount_returns_raw_rewards(self):
        symbols, rewards, discounts = self.designer_maps(1.0)
        h = History.of(symbols[0], symbols[1], symbols[0])
        assert prediscounted_stream(h, rewards, discounts) == [1.0, 1.0, 1.0]

    def test_geometric_stream(self):
        symbols, rewards, discounts = self.designer_maps(0.5)
        h = History.of(*([symbols[0]] * 4))
        assert prediscounted_stream(h, rewards, discounts) == [1.0, 0.5, 0.25, 0.125]

    def test_single_step_has_empty_product(self):
        symbols, rewards, discounts = self.designer_maps(0.25)
        assert prediscounted_stream(History.of(symbols[1]), rewards, discounts) == [1.0]

    def test_running_sum_matches_n_step_value(self):
        """Prediscounted partial sums equal the discounted value of the same stream."""
        t = Transition("o", "u")
        spec = RewardSpec(rewards={t: 1.0}, discounts={t: 0.5})
        policy = TabularPolicy(rules={"o": {"u": one}})
        designer_t = Transition("o", "u")
        stream = prediscounted_stream(
            History.of(*([designer_t] * 6)), spec.rewards, spec.discounts
        )
        for n in range(1, 7):
            assert sum(stream[:n]) == pytest.approx(
                n_step_value(det_env(), policy, spec, n), abs=1e-12
            )

    def test_unknown_symbol(self):
        symbols, rewards, discounts = self.designer_maps(1.0)
        with pytest.raises(KeyError):
            prediscounted_stream(History.of(Transition("zz")), rewards, discounts)


class TestSerialization:
    def test_tabular_env_round_trip(self):
        env = stochastic_env()
        rebuilt = env_from_obj(env_to_obj(env))
        assert rebuilt.states == env.states
        assert rebuilt.transitions == env.transitions
        assert rebuilt.initial == env.initial

    def test_scripted_env_by_registry_name(self):
        env = SCRIPTED_ENVS["fair-coin"]()
        rebuilt = env_from_obj(env_to_obj(env))
        assert rebuilt.name == "fair-coin"
        with pytest.raises(ValueError, match="unknown scripted environment"):
            env_from_obj({"kind": "scripted", "name": "not-a-thing"})

    def test_policy_round_trip(self):
        policy = constant_policy("a1")
        rebuilt = policy_from_obj(policy_to_obj(policy))
        assert rebuilt.rules == policy.rules

    def test_bad_distributions_rejected(self):
        with pytest.raises(ValueError, match="sums to"):
            TabularPolicy(rules={"o": {"u": half}})
        with pytest.raises(ValueError, match="sums to"):
            TabularEnv(
                states=("s",), actions=("u",), obs_map={"s": "o"},
                transitions={"s": {"u": {"s": half}}}, initial={"s": one},
            )
