"""Environments, policies, induced history distributions, and n-step values.

Environments are tabular (finite latent states, deterministic observation
labels, exact rational kernels) or scripted (a registered function from
histories to observation distributions).  Rollouts enumerate the induced
distribution over length-n histories exactly; values can also be computed
by latent-state dynamic programming for tabular models, and the two paths
must agree.  Dominance between policies is certified only up to a finite
horizon and the verdict says so.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .histories import Alphabet, History, Transition, EMPTY_HISTORY
from .lotteries import Lottery
from .oracles import (
    PreferenceOracle,
    PreferenceOutcome,
    RewardSpec,
    lottery_utility,
    markov_utility,
)
from .rationals import Rational
from .serialize import rational_from_str, rational_to_str

__all__ = [
    "TabularEnv",
    "ScriptedEnv",
    "TabularPolicy",
    "ScriptedPolicy",
    "EnvModel",
    "Policy",
    "BudgetExceededError",
    "rollout_distribution",
    "sample_histories",
    "estimate_value",
    "n_step_value",
    "DominanceVerdict",
    "compare_policies_by_goal",
    "compare_policies_by_reward",
    "check_eventual_dominance",
    "prediscounted_stream",
    "env_to_obj",
    "env_from_obj",
    "policy_to_obj",
    "policy_from_obj",
    "SCRIPTED_ENVS",
    "SCRIPTED_POLICIES",
    "DEFAULT_BRANCH_BUDGET",
]

DEFAULT_BRANCH_BUDGET = 2_000_000

_ONE = Rational(1)
_ZERO = Rational(0)


class BudgetExceededError(RuntimeError):
    """Exact enumeration outgrew the branch budget; Monte Carlo mode may help."""


def _check_distribution(dist: Mapping, what: str):
    total = _ZERO
    for value in dist.values():
        if not isinstance(value, Rational):
            raise TypeError(f"{what} probabilities must be Rational")
        if value < _ZERO:
            raise ValueError(f"{what} has negative probability")
        total = total + value
    if total != _ONE:
        raise ValueError(f"{what} sums to {total}, not 1")


@dataclass
class TabularEnv:
    """Finite latent-state model with deterministic observation labels."""

    states: Tuple[str, ...]
    actions: Tuple[str, ...]
    obs_map: Dict[str, str]
    transitions: Dict[str, Dict[str, Dict[str, Rational]]]
    initial: Dict[str, Rational]

    def __post_init__(self):
        self.states = tuple(self.states)
        self.actions = tuple(self.actions)
        _check_distribution(self.initial, "initial state distribution")
        for s in self.states:
            if s not in self.obs_map:
                raise ValueError(f"state {s} has no observation label")
            for a in self.actions:
                kernel = self.transitions.get(s, {}).get(a)
                if kernel is None:
                    raise ValueError(f"missing kernel for state {s}, action {a}")
                _check_distribution(kernel, f"kernel({s}, {a})")

    @property
    def observations(self) -> Tuple[str, ...]:
        seen: List[str] = []
        for s in self.states:
            o = self.obs_map[s]
            if o not in seen:
                seen.append(o)
        return tuple(seen)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.observations, self.actions)


@dataclass
class ScriptedEnv:
    """Observation kernel given directly as a function of the history."""

    name: str
    observations: Tuple[str, ...]
    actions: Tuple[str, ...]
    obs_dist: Callable[[History], Dict[str, Rational]]

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.observations, self.actions)


EnvModel = Union[TabularEnv, ScriptedEnv]


@dataclass
class TabularPolicy:
    """Action distribution per observation (Markov in the observation)."""

    rules: Dict[str, Dict[str, Rational]]

    def __post_init__(self):
        for obs, dist in self.rules.items():
            _check_distribution(dist, f"policy({obs})")

    def action_dist(self, history: History, obs: str) -> Dict[str, Rational]:
        try:
            return self.rules[obs]
        except KeyError:
            raise KeyError(f"policy has no rule for observation {obs!r}") from None


@dataclass
class ScriptedPolicy:
    name: str
    fn: Callable[[History, str], Dict[str, Rational]]

    def action_dist(self, history: History, obs: str) -> Dict[str, Rational]:
        return self.fn(history, obs)


Policy = Union[TabularPolicy, ScriptedPolicy]


# ---------------------------------------------------------------------------
# Exact rollout
# ---------------------------------------------------------------------------


def rollout_distribution(
    env: EnvModel,
    policy: Policy,
    n: int,
    budget: int = DEFAULT_BRANCH_BUDGET,
) -> Lottery:
    """The exact induced distribution over length-n histories.

    Forward enumeration of the product of observation and action kernels;
    zero-probability branches are pruned and weights stay exact rationals.
    """
    if n < 1:
        raise ValueError("horizon must be >= 1")
    tabular = isinstance(env, TabularEnv)
    if tabular:
        branches: Dict[Tuple[Tuple[Transition, ...], str], Rational] = {
            ((), s): w for s, w in env.initial.items() if w != _ZERO
        }
    else:
        branches = {((), ""): _ONE}
    for _ in range(n):
        grown: Dict[Tuple[Tuple[Transition, ...], str], Rational] = {}
        for (hist, latent), weight in branches.items():
            history = History(hist)
            if tabular:
                obs_options = [(env.obs_map[latent], latent, _ONE)]
            else:
                dist = env.obs_dist(history)
                _check_distribution(dist, f"scripted observation kernel at {history.label}")
                obs_options = [(o, "", p) for o, p in dist.items() if p != _ZERO]
            for obs, latent_mid, p_obs in obs_options:
                actions = policy.action_dist(history, obs)
                _check_distribution(actions, f"policy at {history.label}, obs {obs}")
                for action, p_act in actions.items():
                    if p_act == _ZERO:
                        continue
                    new_hist = hist + (Transition(obs, action),)
                    if tabular:
                        kernel = env.transitions[latent_mid][action]
                        for nxt, p_next in kernel.items():
                            if p_next == _ZERO:
                                continue
                            key = (new_hist, nxt)
                            add = weight * p_obs * p_act * p_next
                            grown[key] = grown.get(key, _ZERO) + add
                    else:
                        key = (new_hist, "")
                        add = weight * p_obs * p_act
                        grown[key] = grown.get(key, _ZERO) + add
            if len(grown) > budget:
                raise BudgetExceededError(
                    f"enumeration exceeded {budget} weighted branches at horizon {n}; "
                    "consider sample_histories (seeded Monte Carlo) for demo use"
                )
        branches = grown
    weights: Dict[History, Rational] = {}
    for (hist, _latent), weight in branches.items():
        h = History(hist)
        weights[h] = weights.get(h, _ZERO) + weight
    return Lottery(weights)


def sample_histories(
    env: EnvModel,
    policy: Policy,
    n: int,
    samples: int,
    seed: int = 0,
) -> List[History]:
    """Seeded Monte Carlo rollouts; for demos only, never for certification."""
    rng = random.Random(seed)
    tabular = isinstance(env, TabularEnv)

    def draw(dist: Mapping[str, Rational]) -> str:
        u = rng.random()
        acc = 0.0
        last = None
        for key, w in dist.items():
            acc += float(w)
            last = key
            if u <= acc:
                return key
        return last  # float slack lands on the final key

    out: List[History] = []
    for _ in range(samples):
        hist: Tuple[Transition, ...] = ()
        state = draw(env.initial) if tabular else ""
        for _step in range(n):
            history = History(hist)
            obs = env.obs_map[state] if tabular else draw(env.obs_dist(history))
            action = draw(policy.action_dist(history, obs))
            hist = hist + (Transition(obs, action),)
            if tabular:
                state = draw(env.transitions[state][action])
        out.append(History(hist))
    return out


# ---------------------------------------------------------------------------
# n-step value
# ---------------------------------------------------------------------------


def estimate_value(
    env: EnvModel,
    policy: Policy,
    spec: RewardSpec,
    n: int,
    samples: int,
    seed: int = 0,
) -> Tuple[float, float]:
    """Monte Carlo value estimate with its standard error.

    Demo-grade only: certification always goes through the exact paths.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    histories = sample_histories(env, policy, n, samples, seed)
    returns = [markov_utility(h, spec) for h in histories]
    mean = math.fsum(returns) / samples
    if samples == 1:
        return mean, 0.0
    variance = math.fsum((r - mean) ** 2 for r in returns) / (samples - 1)
    return mean, math.sqrt(variance / samples)


def n_step_value(
    env: EnvModel,
    policy: Policy,
    spec: RewardSpec,
    n: int,
    method: str = "auto",
    budget: int = DEFAULT_BRANCH_BUDGET,
) -> float:
    """Expected discounted n-step return.

    ``enumerate`` evaluates the exact history distribution; ``dp`` runs
    backward induction over latent states (tabular models with
    observation-Markov policies only).  ``auto`` prefers dp when legal.
    """
    can_dp = isinstance(env, TabularEnv) and isinstance(policy, TabularPolicy)
    if method == "auto":
        method = "dp" if can_dp else "enumerate"
    if method == "dp":
        if not can_dp:
            raise ValueError("dp path needs a tabular env and a tabular policy")
        return _value_dp(env, policy, spec, n)
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    dist = rollout_distribution(env, policy, n, budget)
    return lottery_utility(dist, lambda h: markov_utility(h, spec))


def _value_dp(env: TabularEnv, policy: TabularPolicy, spec: RewardSpec, n: int) -> float:
    values = {s: 0.0 for s in env.states}
    for _ in range(n):
        nxt = {}
        for s in env.states:
            obs = env.obs_map[s]
            total = 0.0
            for a, p_act in policy.action_dist(EMPTY_HISTORY, obs).items():
                if p_act == _ZERO:
                    continue
                t = Transition(obs, a)
                cont = math.fsum(
                    float(p) * values[s2] for s2, p in env.transitions[s][a].items()
                )
                total += float(p_act) * (spec.reward(t) + spec.discount(t) * cont)
            nxt[s] = total
        values = nxt
    return math.fsum(float(w) * values[s] for s, w in env.initial.items())


# ---------------------------------------------------------------------------
# Dominance
# ---------------------------------------------------------------------------


@dataclass
class DominanceVerdict:
    """Horizon-bounded dominance: certified on [n_found, horizon] only."""

    relation: str  # first-preferred | second-preferred | indifferent | undetermined-at-horizon
    n_found: Optional[int]
    weak_n_found: Optional[int]
    strict: bool
    horizon: int
    verdicts: List[PreferenceOutcome] = field(default_factory=list)
    note: str = "dominance is certified up to the stated horizon, not beyond"

    def to_obj(self) -> dict:
        return {
            "relation": self.relation,
            "n_found": self.n_found,
            "weak_n_found": self.weak_n_found,
            "strict": self.strict,
            "horizon": self.horizon,
            "verdicts": [v.value for v in self.verdicts],
            "note": self.note,
        }


def _classify_dominance(verdicts: Sequence[PreferenceOutcome], horizon: int) -> DominanceVerdict:
    # A verdict is claimed only when the stabilized suffix covers at least a
    # quarter of the horizon; a few trailing ties in an oscillating sweep are
    # not evidence of dominance.
    min_tail = max(1, horizon // 4)

    def smallest_n(allowed: Tuple[PreferenceOutcome, ...]) -> Optional[int]:
        n_found = None
        for n in range(len(verdicts), 0, -1):
            if verdicts[n - 1] in allowed:
                n_found = n
            else:
                break
        if n_found is None or len(verdicts) - n_found + 1 < min_tail:
            return None
        return n_found

    all_inf = smallest_n((PreferenceOutcome.INDIFFERENT,))
    if all_inf is not None:
        return DominanceVerdict("indifferent", all_inf, all_inf, False, horizon, list(verdicts))
    strict_first = smallest_n((PreferenceOutcome.STRICTLY_GREATER,))
    weak_first = smallest_n(
        (PreferenceOutcome.STRICTLY_GREATER, PreferenceOutcome.INDIFFERENT)
    )
    if strict_first is not None:
        return DominanceVerdict(
            "first-preferred", strict_first, weak_first, True, horizon, list(verdicts)
        )
    strict_second = smallest_n((PreferenceOutcome.STRICTLY_LESS,))
    weak_second = smallest_n(
        (PreferenceOutcome.STRICTLY_LESS, PreferenceOutcome.INDIFFERENT)
    )
    if strict_second is not None:
        return DominanceVerdict(
            "second-preferred", strict_second, weak_second, True, horizon, list(verdicts)
        )
    if weak_first is not None:
        return DominanceVerdict(
            "first-preferred", weak_first, weak_first, False, horizon, list(verdicts)
        )
    if weak_second is not None:
        return DominanceVerdict(
            "second-preferred", weak_second, weak_second, False, horizon, list(verdicts)
        )
    return DominanceVerdict("undetermined-at-horizon", None, None, False, horizon, list(verdicts))


def compare_policies_by_goal(
    oracle: PreferenceOracle,
    env: EnvModel,
    policy_1: Policy,
    policy_2: Policy,
    n_max: int = 64,
    budget: int = DEFAULT_BRANCH_BUDGET,
) -> DominanceVerdict:
    """Sweep the goal oracle over the induced distributions for n = 1..n_max."""
    verdicts = []
    for n in range(1, n_max + 1):
        d1 = rollout_distribution(env, policy_1, n, budget)
        d2 = rollout_distribution(env, policy_2, n, budget)
        verdicts.append(oracle.compare(d1, d2))
    return _classify_dominance(verdicts, n_max)


def compare_policies_by_reward(
    spec: RewardSpec,
    env: EnvModel,
    policy_1: Policy,
    policy_2: Policy,
    n_max: int = 64,
    tol: float = 1e-9,
    budget: int = DEFAULT_BRANCH_BUDGET,
) -> DominanceVerdict:
    """Same sweep on n-step values under the reward specification."""
    verdicts = []
    for n in range(1, n_max + 1):
        v1 = n_step_value(env, policy_1, spec, n, budget=budget)
        v2 = n_step_value(env, policy_2, spec, n, budget=budget)
        diff = v1 - v2
        if abs(diff) <= tol:
            verdicts.append(PreferenceOutcome.INDIFFERENT)
        elif diff > 0:
            verdicts.append(PreferenceOutcome.STRICTLY_GREATER)
        else:
            verdicts.append(PreferenceOutcome.STRICTLY_LESS)
    return _classify_dominance(verdicts, n_max)


def check_eventual_dominance(
    rewards_a: Sequence[float],
    rewards_b: Sequence[float],
    n_max: int = 200,
    tol: float = 1e-12,
) -> DominanceVerdict:
    """Eventual strict dominance between two deterministic reward chains.

    Patterns shorter than the horizon repeat cyclically.  ``n_found`` is
    the smallest N with V_n strictly larger for every n in [N, n_max].
    """
    if not rewards_a or not rewards_b:
        raise ValueError("reward chains must be nonempty")

    def partial_sums(pattern: Sequence[float]) -> List[float]:
        sums = []
        total = 0.0
        for i in range(n_max):
            total += pattern[i % len(pattern)]
            sums.append(total)
        return sums

    va, vb = partial_sums(rewards_a), partial_sums(rewards_b)
    verdicts = []
    for x, y in zip(va, vb):
        if abs(x - y) <= tol:
            verdicts.append(PreferenceOutcome.INDIFFERENT)
        elif x > y:
            verdicts.append(PreferenceOutcome.STRICTLY_GREATER)
        else:
            verdicts.append(PreferenceOutcome.STRICTLY_LESS)
    return _classify_dominance(verdicts, n_max)


# ---------------------------------------------------------------------------
# Objective goals: prediscounted reward streams
# ---------------------------------------------------------------------------


def prediscounted_stream(
    designer_history: History,
    rewards: Mapping[Transition, float],
    discounts: Mapping[Transition, float],
) -> List[float]:
    """Already-discounted rewards: r_i scaled by the product of prior discounts."""
    stream: List[float] = []
    factor = 1.0
    for t in designer_history:
        if t not in rewards or t not in discounts:
            raise KeyError(f"unknown designer symbol {t}")
        stream.append(factor * rewards[t])
        factor *= discounts[t]
    return stream


# ---------------------------------------------------------------------------
# Scripted registry and JSON codecs
# ---------------------------------------------------------------------------


def _fair_coin_env() -> ScriptedEnv:
    half = Rational(1, 2)
    return ScriptedEnv(
        name="fair-coin",
        observations=("heads", "tails"),
        actions=("go",),
        obs_dist=lambda history: {"heads": half, "tails": half},
    )


def _constant_obs_env() -> ScriptedEnv:
    return ScriptedEnv(
        name="constant-obs",
        observations=("tick",),
        actions=("go", "stop"),
        obs_dist=lambda history: {"tick": _ONE},
    )


SCRIPTED_ENVS: Dict[str, Callable[[], ScriptedEnv]] = {
    "fair-coin": _fair_coin_env,
    "constant-obs": _constant_obs_env,
}


def _uniform_policy_fn(history: History, obs: str) -> Dict[str, Rational]:
    return {"go": _ONE}


SCRIPTED_POLICIES: Dict[str, Callable[[], ScriptedPolicy]] = {
    "always-go": lambda: ScriptedPolicy("always-go", _uniform_policy_fn),
}


def env_to_obj(env: EnvModel) -> dict:
    if isinstance(env, ScriptedEnv):
        return {"kind": "scripted", "name": env.name}
    return {
        "kind": "tabular",
        "states": list(env.states),
        "actions": list(env.actions),
        "obs_map": dict(env.obs_map),
        "transitions": {
            s: {a: {s2: rational_to_str(p) for s2, p in kernel.items()}
                for a, kernel in by_action.items()}
            for s, by_action in env.transitions.items()
        },
        "initial": {s: rational_to_str(p) for s, p in env.initial.items()},
    }


def env_from_obj(obj: dict) -> EnvModel:
    if obj.get("kind") == "scripted":
        name = obj["name"]
        if name not in SCRIPTED_ENVS:
            raise ValueError(f"unknown scripted environment {name!r}; "
                             f"known: {sorted(SCRIPTED_ENVS)}")
        return SCRIPTED_ENVS[name]()
    if obj.get("kind") != "tabular":
        raise ValueError(f"unknown environment kind {obj.get('kind')!r}")
    return TabularEnv(
        states=tuple(obj["states"]),
        actions=tuple(obj["actions"]),
        obs_map=dict(obj["obs_map"]),
        transitions={
            s: {a: {s2: rational_from_str(p) for s2, p in kernel.items()}
                for a, kernel in by_action.items()}
            for s, by_action in obj["transitions"].items()
        },
        initial={s: rational_from_str(p) for s, p in obj["initial"].items()},
    )


def policy_to_obj(policy: Policy) -> dict:
    if isinstance(policy, ScriptedPolicy):
        return {"kind": "scripted", "name": policy.name}
    return {
        "kind": "tabular",
        "rules": {
            obs: {a: rational_to_str(p) for a, p in dist.items()}
            for obs, dist in policy.rules.items()
        },
    }


def policy_from_obj(obj: dict) -> Policy:
    if obj.get("kind") == "scripted":
        name = obj["name"]
        if name not in SCRIPTED_POLICIES:
            raise ValueError(f"unknown scripted policy {name!r}; "
                             f"known: {sorted(SCRIPTED_POLICIES)}")
        return SCRIPTED_POLICIES[name]()
    if obj.get("kind") != "tabular":
        raise ValueError(f"unknown policy kind {obj.get('kind')!r}")
    return TabularPolicy(
        rules={
            obs: {a: rational_from_str(p) for a, p in dist.items()}
            for obs, dist in obj["rules"].items()
        }
    )
