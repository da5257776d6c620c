"""Preference oracles: the comparison contract and its concrete kinds.

An oracle answers strictly-less / indifferent / strictly-greater for a
pair of lotteries.  Synthetic oracles are pure and deterministic; the
``unanswered`` verdict is reserved for asynchronous human sessions.
Utility-backed kinds (markov, utility-table, risk) compare a scalar with
a tie band ``eps_u``; the constrained kind compares feasibility first and
base utility second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple

from .histories import Alphabet, History, Transition
from .lotteries import Lottery
from .serialize import (
    alphabet_from_obj,
    alphabet_to_obj,
    history_from_obj,
    history_to_obj,
    lottery_from_obj,
    lottery_key,
    lottery_to_obj,
    transition_from_obj,
    transition_to_obj,
)

__all__ = [
    "PreferenceOutcome",
    "UnansweredQueryError",
    "PreferenceOracle",
    "RewardSpec",
    "markov_utility",
    "lottery_utility",
    "UtilityOracle",
    "MarkovOracle",
    "UtilityTableOracle",
    "CmdpOracle",
    "RiskOracle",
    "TableOracle",
    "UtilityOracleConfig",
    "build_oracle",
    "compare_by_utility",
    "oracle_from_obj",
    "oracle_to_obj",
    "reward_spec_to_obj",
    "reward_spec_from_obj",
    "DEFAULT_EPS_U",
]

DEFAULT_EPS_U = 1e-9


class PreferenceOutcome(Enum):
    STRICTLY_LESS = "strictly-less"
    INDIFFERENT = "indifferent"
    STRICTLY_GREATER = "strictly-greater"
    UNANSWERED = "unanswered"

    def flip(self) -> "PreferenceOutcome":
        if self is PreferenceOutcome.STRICTLY_LESS:
            return PreferenceOutcome.STRICTLY_GREATER
        if self is PreferenceOutcome.STRICTLY_GREATER:
            return PreferenceOutcome.STRICTLY_LESS
        return self

    @property
    def weakly_greater(self) -> bool:
        return self in (PreferenceOutcome.STRICTLY_GREATER, PreferenceOutcome.INDIFFERENT)

    @property
    def weakly_less(self) -> bool:
        return self in (PreferenceOutcome.STRICTLY_LESS, PreferenceOutcome.INDIFFERENT)


class UnansweredQueryError(Exception):
    """The relation has no answer for this pair (closed-world miss)."""

    def __init__(self, left: Lottery, right: Lottery, reason: str = "query outside the relation"):
        super().__init__(f"{reason}: {left.label}  vs  {right.label}")
        self.left = left
        self.right = right
        self.reason = reason


class PreferenceOracle:
    """Base contract: ``compare`` plus a declared alphabet and query counter."""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self._query_count = 0

    @property
    def query_count(self) -> int:
        return self._query_count

    def compare(self, a: Lottery, b: Lottery) -> PreferenceOutcome:
        self._query_count += 1
        return self._compare(a, b)

    def _compare(self, a: Lottery, b: Lottery) -> PreferenceOutcome:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Reward specifications and Markov utility
# ---------------------------------------------------------------------------


@dataclass
class RewardSpec:
    """Per-transition reward and discount maps plus design diagnostics.

    ``discounts`` live in [0, 1] unless ``relaxed`` is set (nonnegative
    then).  ``identifiable[t] = False`` means the relation pinned no
    discount for ``t`` and the conventional value 1 is stored.
    """

    rewards: Dict[Transition, float]
    discounts: Dict[Transition, float]
    identifiable: Dict[Transition, bool] = field(default_factory=dict)
    scale: Optional[float] = None
    relaxed: bool = False

    def __post_init__(self):
        if set(self.rewards) != set(self.discounts):
            raise ValueError("rewards and discounts must cover the same transitions")
        if not self.identifiable:
            self.identifiable = {t: True for t in self.rewards}
        for t, g in self.discounts.items():
            if g < 0:
                raise ValueError(f"discount for {t} is negative: {g}")
            if not self.relaxed and g > 1:
                raise ValueError(f"discount for {t} exceeds 1 without relaxed mode: {g}")
            if not self.identifiable.get(t, True) and g != 1.0:
                raise ValueError(f"unidentifiable {t} must carry the conventional discount 1")
        if self.scale is not None and self.scale <= 0:
            raise ValueError("scale must be positive when known")

    @property
    def transitions(self) -> Tuple[Transition, ...]:
        return tuple(self.rewards)

    def reward(self, t: Transition) -> float:
        try:
            return self.rewards[t]
        except KeyError:
            raise KeyError(f"unknown transition {t}") from None

    def discount(self, t: Transition) -> float:
        try:
            return self.discounts[t]
        except KeyError:
            raise KeyError(f"unknown transition {t}") from None


def markov_utility(h: History, spec: RewardSpec) -> float:
    """u(eps) = 0 and u(t.h) = r(t) + gamma(t) * u(h), folded right to left."""
    value = 0.0
    for t in reversed(h.transitions):
        value = spec.reward(t) + spec.discount(t) * value
    return value


def lottery_utility(a: Lottery, u: Callable[[History], float]) -> float:
    """Probability-weighted history utility; weights go float only here."""
    return math.fsum(float(w) * u(h) for h, w in a.items())


# ---------------------------------------------------------------------------
# Utility-backed oracles
# ---------------------------------------------------------------------------


class UtilityOracle(PreferenceOracle):
    """Compares a scalar lottery utility with tie band ``eps_u``."""

    def __init__(self, alphabet: Alphabet, eps_u: float = DEFAULT_EPS_U):
        super().__init__(alphabet)
        if eps_u < 0:
            raise ValueError("eps_u must be nonnegative")
        self.eps_u = eps_u

    def utility(self, a: Lottery) -> float:
        raise NotImplementedError

    def _compare(self, a: Lottery, b: Lottery) -> PreferenceOutcome:
        diff = self.utility(a) - self.utility(b)
        if abs(diff) <= self.eps_u:
            return PreferenceOutcome.INDIFFERENT
        if diff > 0:
            return PreferenceOutcome.STRICTLY_GREATER
        return PreferenceOutcome.STRICTLY_LESS


class MarkovOracle(UtilityOracle):
    """Expected utility under a Markov reward/discount specification."""

    def __init__(self, spec: RewardSpec, alphabet: Optional[Alphabet] = None,
                 eps_u: float = DEFAULT_EPS_U):
        if alphabet is None:
            alphabet = _alphabet_of_transitions(spec.transitions)
        super().__init__(alphabet, eps_u)
        self.spec = spec

    def history_utility(self, h: History) -> float:
        return markov_utility(h, self.spec)

    def utility(self, a: Lottery) -> float:
        return lottery_utility(a, self.history_utility)


class UtilityTableOracle(UtilityOracle):
    """General (non-Markov) utilities from a finite history table."""

    def __init__(self, table: Mapping[History, float], alphabet: Alphabet,
                 eps_u: float = DEFAULT_EPS_U):
        super().__init__(alphabet, eps_u)
        self.table = dict(table)

    def history_utility(self, h: History) -> float:
        try:
            return self.table[h]
        except KeyError:
            raise UnansweredQueryError(
                Lottery.dirac(h), Lottery.dirac(h), f"history {h.label} outside the utility table"
            ) from None

    def utility(self, a: Lottery) -> float:
        return lottery_utility(a, self.history_utility)


class CmdpOracle(PreferenceOracle):
    """Constrained comparison: expected base reward r1 subject to E[r2] >= threshold.

    Feasible lotteries beat infeasible ones; within a feasibility class
    the expected base reward decides.  Two infeasible lotteries also
    compare by base reward, a completion the source relation never pins
    down; reports flag it.
    """

    TIE_BREAK_NOTE = "both-infeasible pairs compare by base reward (artifact completion)"

    def __init__(self, r1: Mapping[History, float], r2: Mapping[History, float],
                 alphabet: Alphabet, threshold: float = 0.0, eps_u: float = DEFAULT_EPS_U):
        super().__init__(alphabet)
        if set(r1) != set(r2):
            raise ValueError("r1 and r2 must cover the same histories")
        self.r1 = dict(r1)
        self.r2 = dict(r2)
        self.threshold = threshold
        self.eps_u = eps_u

    def _expected(self, table: Mapping[History, float], a: Lottery) -> float:
        total = 0.0
        for h, w in a.items():
            if h not in table:
                raise UnansweredQueryError(
                    a, a, f"history {h.label} outside the constrained reward tables"
                )
            total += float(w) * table[h]
        return total

    def expected_base(self, a: Lottery) -> float:
        return self._expected(self.r1, a)

    def expected_constraint(self, a: Lottery) -> float:
        return self._expected(self.r2, a)

    def feasible(self, a: Lottery) -> bool:
        return self.expected_constraint(a) >= self.threshold

    def _compare(self, a: Lottery, b: Lottery) -> PreferenceOutcome:
        fa, fb = self.feasible(a), self.feasible(b)
        if fa and not fb:
            return PreferenceOutcome.STRICTLY_GREATER
        if fb and not fa:
            return PreferenceOutcome.STRICTLY_LESS
        diff = self.expected_base(a) - self.expected_base(b)
        if abs(diff) <= self.eps_u:
            return PreferenceOutcome.INDIFFERENT
        return (
            PreferenceOutcome.STRICTLY_GREATER if diff > 0 else PreferenceOutcome.STRICTLY_LESS
        )


class RiskOracle(UtilityOracle):
    """Variance-penalized return: J(D) = E[G] - lam * Var[G].

    G is the undiscounted total of per-transition rewards over a history;
    lam = 0 reduces to plain expected return.
    """

    def __init__(self, rewards: Mapping[Transition, float], lam: float,
                 alphabet: Optional[Alphabet] = None, eps_u: float = DEFAULT_EPS_U):
        if lam < 0:
            raise ValueError("risk penalty lam must be nonnegative")
        if alphabet is None:
            alphabet = _alphabet_of_transitions(tuple(rewards))
        super().__init__(alphabet, eps_u)
        self.rewards = dict(rewards)
        self.lam = lam

    def total_return(self, h: History) -> float:
        total = 0.0
        for t in h:
            if t not in self.rewards:
                raise KeyError(f"unknown transition {t}")
            total += self.rewards[t]
        return total

    def utility(self, a: Lottery) -> float:
        returns = [(float(w), self.total_return(h)) for h, w in a.items()]
        mean = math.fsum(w * g for w, g in returns)
        var = math.fsum(w * (g - mean) ** 2 for w, g in returns)
        return mean - self.lam * var


class TableOracle(PreferenceOracle):
    """A finite closed-world relation; queries off the table raise.

    Entries are closed under symmetry on construction and reflexive pairs
    answer indifferent automatically.
    """

    def __init__(self, entries: Iterable[Tuple[Lottery, Lottery, PreferenceOutcome]],
                 alphabet: Alphabet):
        super().__init__(alphabet)
        self.entries: List[Tuple[Lottery, Lottery, PreferenceOutcome]] = []
        self._verdicts: Dict[Tuple[str, str], PreferenceOutcome] = {}
        for left, right, outcome in entries:
            if outcome is PreferenceOutcome.UNANSWERED:
                raise ValueError("table entries must carry definite verdicts")
            self._insert(left, right, outcome)
            self._insert(right, left, outcome.flip())
            self.entries.append((left, right, outcome))

    def _insert(self, left: Lottery, right: Lottery, outcome: PreferenceOutcome):
        key = (lottery_key(left), lottery_key(right))
        existing = self._verdicts.get(key)
        if existing is not None and existing is not outcome:
            raise ValueError(f"conflicting table entries for {left.label} vs {right.label}")
        self._verdicts[key] = outcome

    def _compare(self, a: Lottery, b: Lottery) -> PreferenceOutcome:
        ka, kb = lottery_key(a), lottery_key(b)
        if ka == kb:
            return PreferenceOutcome.INDIFFERENT
        try:
            return self._verdicts[(ka, kb)]
        except KeyError:
            raise UnansweredQueryError(a, b, "pair outside the preference table") from None


def _alphabet_of_transitions(transitions: Tuple[Transition, ...]) -> Alphabet:
    observations: List[str] = []
    actions: List[str] = []
    designer = any(t.action is None for t in transitions)
    if designer and any(t.action is not None for t in transitions):
        raise ValueError("cannot mix designer and agent transitions in one alphabet")
    for t in transitions:
        if t.observation not in observations:
            observations.append(t.observation)
        if t.action is not None and t.action not in actions:
            actions.append(t.action)
    return Alphabet(observations, actions or None)


# ---------------------------------------------------------------------------
# Configuration surface
# ---------------------------------------------------------------------------


@dataclass
class UtilityOracleConfig:
    """Declarative oracle description: one kind plus its payload.

    kinds: ``markov`` (RewardSpec), ``utility-table`` (History -> real),
    ``cmdp`` (r1/r2 history tables and feasibility threshold), ``risk``
    (per-transition rewards and penalty lam), ``table`` (finite verdicts).
    """

    kind: str
    alphabet: Alphabet
    eps_u: float = DEFAULT_EPS_U
    spec: Optional[RewardSpec] = None
    utilities: Optional[Dict[History, float]] = None
    r1: Optional[Dict[History, float]] = None
    r2: Optional[Dict[History, float]] = None
    threshold: float = 0.0
    lam: float = 0.0
    rewards: Optional[Dict[Transition, float]] = None
    entries: Optional[List[Tuple[Lottery, Lottery, PreferenceOutcome]]] = None

    def __post_init__(self):
        if self.eps_u <= 0 and self.kind != "table":
            raise ValueError("eps_u must be positive")
        if self.kind not in ("markov", "utility-table", "cmdp", "risk", "table"):
            raise ValueError(f"unknown oracle kind {self.kind!r}")


def build_oracle(config: UtilityOracleConfig) -> PreferenceOracle:
    if config.kind == "markov":
        if config.spec is None:
            raise ValueError("markov oracle needs a reward spec")
        return MarkovOracle(config.spec, config.alphabet, config.eps_u)
    if config.kind == "utility-table":
        if config.utilities is None:
            raise ValueError("utility-table oracle needs a history table")
        return UtilityTableOracle(config.utilities, config.alphabet, config.eps_u)
    if config.kind == "cmdp":
        if config.r1 is None or config.r2 is None:
            raise ValueError("cmdp oracle needs r1 and r2 tables")
        return CmdpOracle(config.r1, config.r2, config.alphabet, config.threshold, config.eps_u)
    if config.kind == "risk":
        if config.rewards is None:
            raise ValueError("risk oracle needs per-transition rewards")
        return RiskOracle(config.rewards, config.lam, config.alphabet, config.eps_u)
    if config.entries is None:
        raise ValueError("table oracle needs entries")
    return TableOracle(config.entries, config.alphabet)


def compare_by_utility(a: Lottery, b: Lottery, config: UtilityOracleConfig) -> PreferenceOutcome:
    """One-shot comparison under a declarative oracle configuration."""
    return build_oracle(config).compare(a, b)


# ---------------------------------------------------------------------------
# JSON codecs
# ---------------------------------------------------------------------------


def reward_spec_to_obj(spec: RewardSpec) -> dict:
    return {
        "rewards": [[transition_to_obj(t), r] for t, r in sorted(
            spec.rewards.items(), key=lambda kv: kv[0].sort_key())],
        "discounts": [[transition_to_obj(t), g] for t, g in sorted(
            spec.discounts.items(), key=lambda kv: kv[0].sort_key())],
        "identifiable": [[transition_to_obj(t), flag] for t, flag in sorted(
            spec.identifiable.items(), key=lambda kv: kv[0].sort_key())],
        "scale": spec.scale,
        "relaxed": spec.relaxed,
    }


def reward_spec_from_obj(obj: dict) -> RewardSpec:
    rewards = {transition_from_obj(t): float(r) for t, r in obj["rewards"]}
    discounts = {transition_from_obj(t): float(g) for t, g in obj["discounts"]}
    identifiable = {transition_from_obj(t): bool(f) for t, f in obj.get("identifiable", [])}
    return RewardSpec(
        rewards=rewards,
        discounts=discounts,
        identifiable=identifiable,
        scale=obj.get("scale"),
        relaxed=bool(obj.get("relaxed", False)),
    )


def oracle_to_obj(config: UtilityOracleConfig) -> dict:
    obj: dict = {
        "kind": config.kind,
        "alphabet": alphabet_to_obj(config.alphabet),
        "eps_u": config.eps_u,
    }
    if config.kind == "markov":
        obj["spec"] = reward_spec_to_obj(config.spec)
    elif config.kind == "utility-table":
        obj["utilities"] = [[history_to_obj(h), u] for h, u in sorted(
            config.utilities.items(), key=lambda kv: kv[0].sort_key())]
    elif config.kind == "cmdp":
        obj["r1"] = [[history_to_obj(h), v] for h, v in sorted(
            config.r1.items(), key=lambda kv: kv[0].sort_key())]
        obj["r2"] = [[history_to_obj(h), v] for h, v in sorted(
            config.r2.items(), key=lambda kv: kv[0].sort_key())]
        obj["threshold"] = config.threshold
    elif config.kind == "risk":
        obj["rewards"] = [[transition_to_obj(t), r] for t, r in sorted(
            config.rewards.items(), key=lambda kv: kv[0].sort_key())]
        obj["lambda"] = config.lam
    else:
        obj["entries"] = [
            [lottery_to_obj(a), lottery_to_obj(b), outcome.value]
            for a, b, outcome in config.entries
        ]
    return obj


def oracle_from_obj(obj: dict) -> UtilityOracleConfig:
    kind = obj["kind"]
    alphabet = alphabet_from_obj(obj["alphabet"])
    eps_u = float(obj.get("eps_u", DEFAULT_EPS_U))
    if kind == "markov":
        return UtilityOracleConfig(
            kind=kind, alphabet=alphabet, eps_u=eps_u,
            spec=reward_spec_from_obj(obj["spec"]),
        )
    if kind == "utility-table":
        return UtilityOracleConfig(
            kind=kind, alphabet=alphabet, eps_u=eps_u,
            utilities={history_from_obj(h): float(u) for h, u in obj["utilities"]},
        )
    if kind == "cmdp":
        return UtilityOracleConfig(
            kind=kind, alphabet=alphabet, eps_u=eps_u,
            r1={history_from_obj(h): float(v) for h, v in obj["r1"]},
            r2={history_from_obj(h): float(v) for h, v in obj["r2"]},
            threshold=float(obj.get("threshold", 0.0)),
        )
    if kind == "risk":
        return UtilityOracleConfig(
            kind=kind, alphabet=alphabet, eps_u=eps_u,
            rewards={transition_from_obj(t): float(r) for t, r in obj["rewards"]},
            lam=float(obj["lambda"]),
        )
    if kind == "table":
        entries = [
            (lottery_from_obj(a), lottery_from_obj(b), PreferenceOutcome(v))
            for a, b, v in obj["entries"]
        ]
        return UtilityOracleConfig(kind=kind, alphabet=alphabet, eps_u=eps_u, entries=entries)
    raise ValueError(f"unknown oracle kind {kind!r}")
