"""Constructive reward and discount synthesis from a preference relation.

The pipeline sorts a probe set of short histories by preference, scales
each probe against the best/worst pair by monotone bisection on the
best-outcome weight, reads rewards off the scaled utilities, and extracts
per-transition discounts from the doubled probes (with auxiliary probes
covering transitions whose own utility is zero).  A final spot check
validates the recovered discounts through the prepend-mixture indifference
queries and aborts when the relation cannot support any discount, which
is how risk-style relations surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .histories import Alphabet, History, Transition, EMPTY_HISTORY
from .lotteries import Lottery, mix, prepend
from .oracles import (
    PreferenceOracle,
    PreferenceOutcome,
    RewardSpec,
    UnansweredQueryError,
)
from .rationals import Rational
from .serialize import history_to_obj, lottery_to_obj, transition_to_obj

__all__ = [
    "DesignError",
    "DesignAbortError",
    "ProbeSet",
    "ScaleFactors",
    "DesignDiagnostics",
    "pref_sort",
    "indifference_point",
    "pref_scale",
    "design_reward",
    "GAMMA_CLAMP_TOLERANCE",
]

GAMMA_CLAMP_TOLERANCE = 1e-4


class DesignError(Exception):
    """The design pipeline cannot proceed (incomplete relation, bad input)."""


class DesignAbortError(DesignError):
    """The relation contradicts the construction; carries the witness."""

    def __init__(self, message: str, witness: Optional[dict] = None):
        super().__init__(message)
        self.witness = witness or {}


@dataclass
class ProbeSet:
    """Length <= 1 histories, their doubles, and auxiliaries for degenerate ones."""

    base: List[History]
    doubles: List[History]
    auxiliary: List[History] = field(default_factory=list)

    @property
    def all_probes(self) -> List[History]:
        seen = []
        for h in self.base + self.doubles + self.auxiliary:
            if h not in seen:
                seen.append(h)
        return seen

    @classmethod
    def for_alphabet(cls, alphabet: Alphabet) -> "ProbeSet":
        base = [EMPTY_HISTORY] + [History.of(t) for t in alphabet.transitions]
        doubles = [History.of(t, t) for t in alphabet.transitions]
        return cls(base=base, doubles=doubles)


@dataclass
class ScaleFactors:
    """Per-probe best-outcome weights at the indifference point.

    ``p[i]`` is the weight on the best probe making probe i indifferent to
    the best/worst mixture; the worst probe anchors at 0 and the best at 1
    without search.  A degenerate relation (everything indifferent) sets
    all weights to 0 and flags itself.
    """

    probes: List[History]
    p: List[Rational]
    eps_index: int
    degenerate: bool = False
    iterations: Dict[History, int] = field(default_factory=dict)
    non_monotone: List[dict] = field(default_factory=list)


@dataclass
class DesignDiagnostics:
    comparisons: int = 0
    identifiable: Dict[Transition, bool] = field(default_factory=dict)
    scale: Optional[float] = None
    scale_residual: Optional[float] = None
    bisection_iterations: Dict[str, int] = field(default_factory=dict)
    degenerate_transitions: List[str] = field(default_factory=list)
    auxiliary_probes: List[str] = field(default_factory=list)
    gamma_clamped: List[str] = field(default_factory=list)
    monotonicity_warnings: List[dict] = field(default_factory=list)
    axiom_checks_passed: int = 0
    notes: List[str] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "comparisons": self.comparisons,
            "identifiable": [[transition_to_obj(t), flag] for t, flag in sorted(
                self.identifiable.items(), key=lambda kv: kv[0].sort_key())],
            "scale": self.scale,
            "scale_residual": self.scale_residual,
            "bisection_iterations": self.bisection_iterations,
            "degenerate_transitions": self.degenerate_transitions,
            "auxiliary_probes": self.auxiliary_probes,
            "gamma_clamped": self.gamma_clamped,
            "monotonicity_warnings": self.monotonicity_warnings,
            "axiom_checks_passed": self.axiom_checks_passed,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# Preference sorting
# ---------------------------------------------------------------------------


def _compare_or_abort(oracle: PreferenceOracle, a: Lottery, b: Lottery) -> PreferenceOutcome:
    try:
        verdict = oracle.compare(a, b)
    except UnansweredQueryError as exc:
        raise DesignError(
            f"relation is incomplete on a required pair: {exc}"
        ) from exc
    if verdict is PreferenceOutcome.UNANSWERED:
        raise DesignError(
            f"relation left a required pair unanswered: {a.label} vs {b.label}"
        )
    return verdict


def pref_sort(oracle: PreferenceOracle, items: Sequence[Lottery]) -> List[Lottery]:
    """Stable merge sort ascending by preference; O(n log n) comparisons."""
    items = list(items)
    if len(items) <= 1:
        return items

    def merge_sort(block: List[Lottery]) -> List[Lottery]:
        if len(block) <= 1:
            return block
        mid = len(block) // 2
        left = merge_sort(block[:mid])
        right = merge_sort(block[mid:])
        merged: List[Lottery] = []
        i = j = 0
        while i < len(left) and j < len(right):
            verdict = _compare_or_abort(oracle, left[i], right[j])
            if verdict is PreferenceOutcome.STRICTLY_GREATER:
                merged.append(right[j])
                j += 1
            else:  # left <= right keeps the sort stable
                merged.append(left[i])
                i += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged

    return merge_sort(items)


# ---------------------------------------------------------------------------
# Indifference-point bisection
# ---------------------------------------------------------------------------


def indifference_point(
    oracle: PreferenceOracle,
    x: Lottery,
    best: Lottery,
    worst: Lottery,
    eps: float,
) -> Tuple[Rational, int]:
    """Weight p on ``best`` with x ~ mix(p, best, worst), to bracket width eps.

    Monotone bisection on [0, 1]: x above the mixture raises p, below
    lowers it.  Stops early when the oracle answers indifferent; otherwise
    runs ceil(log2(1/eps)) + 1 halvings.  Returns (p, iterations).
    """
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    v_best = _compare_or_abort(oracle, x, best)
    if v_best is PreferenceOutcome.STRICTLY_GREATER:
        raise DesignError(f"precondition failed: probe {x.label} beats the best outcome")
    v_worst = _compare_or_abort(oracle, x, worst)
    if v_worst is PreferenceOutcome.STRICTLY_LESS:
        raise DesignError(f"precondition failed: probe {x.label} loses to the worst outcome")
    if v_best is PreferenceOutcome.INDIFFERENT:
        return Rational(1), 0
    if v_worst is PreferenceOutcome.INDIFFERENT:
        return Rational(0), 0
    lo, hi = Rational(0), Rational(1)
    max_iter = math.ceil(math.log2(1 / eps)) + 1
    for k in range(max_iter):
        p = (lo + hi) / Rational(2)
        verdict = _compare_or_abort(oracle, x, mix(p, best, worst))
        if verdict is PreferenceOutcome.INDIFFERENT:
            return p, k + 1
        if verdict is PreferenceOutcome.STRICTLY_GREATER:
            lo = p
        else:
            hi = p
    return (lo + hi) / Rational(2), max_iter


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


def pref_scale(
    oracle: PreferenceOracle,
    sorted_probes: Sequence[Lottery],
    eps: float,
) -> ScaleFactors:
    """Indifference weights for each probe against the (best, worst) pair."""
    probes = [_dirac_history(lot) for lot in sorted_probes]
    lots = list(sorted_probes)
    if len(lots) < 2:
        raise DesignError("scaling needs at least two probes")
    eps_index = _eps_index(probes)
    worst, best = lots[0], lots[-1]
    if _compare_or_abort(oracle, worst, best) is PreferenceOutcome.INDIFFERENT:
        return ScaleFactors(
            probes=probes,
            p=[Rational(0)] * len(lots),
            eps_index=eps_index,
            degenerate=True,
        )
    p_values: List[Rational] = []
    iterations: Dict[History, int] = {}
    for idx, lot in enumerate(lots):
        if idx == 0:
            p_values.append(Rational(0))
            continue
        if idx == len(lots) - 1:
            p_values.append(Rational(1))
            continue
        p, iters = indifference_point(oracle, lot, best, worst, eps)
        p_values.append(p)
        iterations[probes[idx]] = iters
    non_monotone: List[dict] = []
    slack = Rational.from_float(2 * eps, 10**9)
    for i in range(1, len(p_values)):
        if p_values[i] + slack < p_values[i - 1]:
            non_monotone.append(
                {
                    "probe": history_to_obj(probes[i]),
                    "previous": history_to_obj(probes[i - 1]),
                    "p": str(p_values[i]),
                    "previous_p": str(p_values[i - 1]),
                }
            )
    return ScaleFactors(
        probes=probes,
        p=p_values,
        eps_index=eps_index,
        iterations=iterations,
        non_monotone=non_monotone,
    )


def _dirac_history(lot: Lottery) -> History:
    support = lot.support
    if len(support) != 1:
        raise DesignError("probes must be Dirac lotteries over single histories")
    return support[0]


def _eps_index(probes: Sequence[History]) -> int:
    for i, h in enumerate(probes):
        if len(h) == 0:
            return i
    raise DesignError("probe set must contain the empty history")


# ---------------------------------------------------------------------------
# Full design
# ---------------------------------------------------------------------------


def design_reward(
    oracle: PreferenceOracle,
    alphabet: Optional[Alphabet] = None,
    eps: float = 1e-6,
    reference: Optional[RewardSpec] = None,
    gamma_validation_slack: float = 1e-4,
) -> Tuple[RewardSpec, DesignDiagnostics]:
    """Synthesize (r, gamma) realizing the oracle's preferences on probes.

    Utilities come out normalized by the best-worst spread, so rewards are
    recovered up to one positive scale factor; discounts are recovered
    exactly where identifiable.  ``reference`` (when given) is only used
    to report the recovered-vs-reference scale.
    """
    if alphabet is None:
        alphabet = oracle.alphabet
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    start_queries = oracle.query_count
    diagnostics = DesignDiagnostics()
    probe_set = ProbeSet.for_alphabet(alphabet)
    probes = probe_set.all_probes
    lots = [Lottery.dirac(h) for h in probes]

    ordered = pref_sort(oracle, lots)
    scale = pref_scale(oracle, ordered, eps)
    diagnostics.bisection_iterations = {
        h.label: k for h, k in scale.iterations.items()
    }
    diagnostics.monotonicity_warnings = scale.non_monotone

    utilities: Dict[History, float] = {}
    p_eps = scale.p[scale.eps_index]
    for h, p in zip(scale.probes, scale.p):
        utilities[h] = float(p - p_eps)

    eps_deg = 10 * eps
    transitions = list(alphabet.transitions)

    if scale.degenerate:
        spec = RewardSpec(
            rewards={t: 0.0 for t in transitions},
            discounts={t: 1.0 for t in transitions},
            identifiable={t: False for t in transitions},
        )
        diagnostics.notes.append(
            "constant relation: rewards zero, discounts conventional, nothing identifiable"
        )
        diagnostics.identifiable = dict(spec.identifiable)
        diagnostics.comparisons = oracle.query_count - start_queries
        return spec, diagnostics

    rewards = {t: utilities[History.of(t)] for t in transitions}

    # transitions whose own utility vanishes need a nonzero continuation probe
    degenerate = [t for t in transitions if abs(utilities[History.of(t)]) <= eps_deg]
    star: Optional[Transition] = None
    if degenerate:
        candidates = [t for t in transitions if abs(utilities[History.of(t)]) > eps_deg]
        if candidates:
            star = max(candidates, key=lambda t: abs(utilities[History.of(t)]))
    if degenerate and star is None:
        # every single-transition probe is flat yet the relation is not constant
        spec = RewardSpec(
            rewards={t: 0.0 for t in transitions},
            discounts={t: 1.0 for t in transitions},
            identifiable={t: False for t in transitions},
        )
        diagnostics.notes.append(
            "no transition has nonzero recovered utility; discounts unidentifiable"
        )
        diagnostics.identifiable = dict(spec.identifiable)
        diagnostics.comparisons = oracle.query_count - start_queries
        return spec, diagnostics

    best_lot, worst_lot = Lottery.dirac(scale.probes[-1]), Lottery.dirac(scale.probes[0])
    aux_utilities: Dict[Transition, float] = {}
    for t in degenerate:
        aux = History.of(t, star)
        probe_set.auxiliary.append(aux)
        diagnostics.auxiliary_probes.append(aux.label)
        if aux in utilities:
            aux_utilities[t] = utilities[aux]
            continue
        p_aux, iters = indifference_point(oracle, Lottery.dirac(aux), best_lot, worst_lot, eps)
        diagnostics.bisection_iterations[aux.label] = iters
        aux_utilities[t] = float(p_aux - p_eps)

    discounts: Dict[Transition, float] = {}
    identifiable: Dict[Transition, bool] = {}
    u_star = utilities[History.of(star)] if star is not None else None
    for t in transitions:
        u_t = utilities[History.of(t)]
        if t in aux_utilities:
            diagnostics.degenerate_transitions.append(t.label)
            gamma = (aux_utilities[t] - rewards[t]) / u_star
        else:
            gamma = utilities[History.of(t, t)] / u_t - 1
        gamma = _clamp_gamma(gamma, t, diagnostics)
        discounts[t] = gamma
        identifiable[t] = True

    spec = RewardSpec(rewards=rewards, discounts=discounts, identifiable=identifiable)
    diagnostics.identifiable = identifiable

    _validate_discounts(oracle, spec, scale, diagnostics, gamma_validation_slack)

    if reference is not None:
        diagnostics.scale, diagnostics.scale_residual = _fit_scale(spec, reference)
        if diagnostics.scale > 0:
            spec.scale = diagnostics.scale
        else:
            diagnostics.notes.append(
                "reference fit produced a non-positive scale; not recorded on the spec"
            )

    diagnostics.comparisons = oracle.query_count - start_queries
    return spec, diagnostics


def _clamp_gamma(gamma: float, t: Transition, diagnostics: DesignDiagnostics) -> float:
    if gamma < -GAMMA_CLAMP_TOLERANCE or gamma > 1 + GAMMA_CLAMP_TOLERANCE:
        raise DesignAbortError(
            f"recovered discount {gamma:.6g} for {t.label} lies outside [0, 1] beyond "
            f"tolerance {GAMMA_CLAMP_TOLERANCE}; the relation does not scale preferences "
            "by any admissible per-transition discount",
            witness={"transition": transition_to_obj(t), "gamma": gamma},
        )
    if gamma < 0 or gamma > 1:
        diagnostics.gamma_clamped.append(t.label)
        gamma = min(max(gamma, 0.0), 1.0)
    return gamma


def _validate_discounts(
    oracle: PreferenceOracle,
    spec: RewardSpec,
    scale: ScaleFactors,
    diagnostics: DesignDiagnostics,
    slack: float,
) -> None:
    """Spot-check each recovered discount via prepend-mixture indifference queries.

    The recovered gamma carries bisection error, so instead of one query
    at gamma we probe the mixture pair at gamma +- slack.  If the relation
    scales preferences by some discount in that bracket, the two verdicts
    must straddle indifference; the same strict verdict at both ends means
    no admissible discount exists and the design aborts with the witness.
    Two instance shapes are probed per transition, one of them with a
    properly mixed lottery, since additive-return relations can fake the
    Dirac-only instance.
    """
    if slack <= 0:
        raise ValueError("gamma validation slack must be positive")
    best = Lottery.dirac(scale.probes[-1])
    worst = Lottery.dirac(scale.probes[0])
    half = mix(Rational(1, 2), best, worst)
    instance_pairs = [(best, worst), (half, best)]
    for t in spec.transitions:
        g = spec.discounts[t]
        for a, b in instance_pairs:
            verdicts = []
            calls = []
            straddled = False
            for g_query in (max(0.0, g - slack), g + slack):
                gr = Rational.from_float(g_query)
                w = Rational(gr.denominator, gr.numerator + gr.denominator)
                left = mix(w, prepend(t, a), b)
                right = mix(w, prepend(t, b), a)
                verdict = _compare_or_abort(oracle, left, right)
                calls.append(
                    {
                        "gamma": str(gr),
                        "left": lottery_to_obj(left),
                        "right": lottery_to_obj(right),
                        "verdict": verdict.value,
                    }
                )
                if verdict is PreferenceOutcome.INDIFFERENT:
                    straddled = True
                    break
                verdicts.append(verdict)
            if not straddled and verdicts[0] is not verdicts[1]:
                straddled = True
            if not straddled:
                raise DesignAbortError(
                    f"discount validation failed for {t.label}: the prepend-mixture pair "
                    f"stays {verdicts[0].value} across gamma {g:.6g} +- {slack:.3g}; "
                    "preferences do not scale by any per-transition discount there",
                    witness={
                        "transition": transition_to_obj(t),
                        "gamma": g,
                        "slack": slack,
                        "calls": calls,
                    },
                )
            diagnostics.axiom_checks_passed += 1


def _fit_scale(spec: RewardSpec, reference: RewardSpec) -> Tuple[float, float]:
    """Least-squares positive scale c with recovered ~= c * reference rewards."""
    num = 0.0
    den = 0.0
    for t in spec.transitions:
        ref = reference.reward(t)
        num += spec.reward(t) * ref
        den += ref * ref
    if den == 0.0:
        return 1.0, 0.0
    c = num / den
    residual = max(abs(spec.reward(t) - c * reference.reward(t)) for t in spec.transitions)
    return c, residual
