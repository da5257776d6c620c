"""Falsifiers for the rationality axioms, with replayable witnesses.

Each checker searches a finite lottery family and returns an
:class:`AxiomReport`.  ``passed-on-family`` is exactly that: the axiom
survived the searched instances, which is never a proof since the axioms
quantify over all lotteries.  A ``violated`` report carries the concrete
compare calls whose verdicts exhibit the contradiction; replaying them
against the oracle reproduces it verbatim.

Enumeration is in deterministic index order and first-found witnesses are
reported, so repeated runs agree byte for byte.  Instance counts above a
checker's budget are thinned by seeded sampling and the report says so.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .families import LotteryFamily, default_p_grid
from .histories import History, Transition, EMPTY_HISTORY
from .lotteries import Lottery, mix, prepend, prepend_history, redirect
from .oracles import (
    PreferenceOracle,
    PreferenceOutcome,
    UnansweredQueryError,
    UtilityOracle,
)
from .rationals import Rational
from .serialize import history_to_obj, lottery_to_obj, transition_to_obj

__all__ = [
    "AxiomReport",
    "CompareCall",
    "AxiomPreconditionError",
    "check_completeness",
    "check_transitivity",
    "check_independence",
    "check_continuity",
    "check_temporal_gamma_indifference",
    "check_memoryless",
    "check_additivity",
    "check_sequential_consistency",
    "find_break_even",
    "find_preference_cycle",
    "replay_witness",
    "NOT_A_PROOF_NOTE",
]

NOT_A_PROOF_NOTE = (
    "passed-on-family reports falsification failure on the searched instances only; "
    "they are not proofs of the axiom"
)

DEFAULT_INSTANCE_BUDGET = 20000


class AxiomPreconditionError(ValueError):
    """A checker precondition (e.g. the continuity ordering) does not hold."""


@dataclass(frozen=True)
class CompareCall:
    left: Lottery
    right: Lottery
    verdict: PreferenceOutcome

    def to_obj(self) -> dict:
        return {
            "left": lottery_to_obj(self.left),
            "right": lottery_to_obj(self.right),
            "verdict": self.verdict.value,
        }


@dataclass
class AxiomReport:
    axiom: str
    status: str  # "passed-on-family" | "violated"
    witness: Optional[dict] = None
    calls: List[CompareCall] = field(default_factory=list)
    queries_used: int = 0
    details: dict = field(default_factory=dict)
    note: str = NOT_A_PROOF_NOTE

    @property
    def violated(self) -> bool:
        return self.status == "violated"

    def to_obj(self) -> dict:
        return {
            "axiom": self.axiom,
            "status": self.status,
            "witness": self.witness,
            "calls": [c.to_obj() for c in self.calls],
            "queries_used": self.queries_used,
            "details": self.details,
            "note": self.note,
        }


def replay_witness(oracle: PreferenceOracle, report: AxiomReport) -> bool:
    """Re-issue the witness compare calls; True iff every verdict matches."""
    for call in report.calls:
        try:
            verdict = oracle.compare(call.left, call.right)
        except UnansweredQueryError:
            verdict = PreferenceOutcome.UNANSWERED
        if verdict is not call.verdict:
            return False
    return True


def _try_compare(oracle: PreferenceOracle, a: Lottery, b: Lottery) -> Optional[PreferenceOutcome]:
    try:
        verdict = oracle.compare(a, b)
    except UnansweredQueryError:
        return None
    if verdict is PreferenceOutcome.UNANSWERED:
        return None
    return verdict


def _sample_indices(count: int, budget: int, seed: int) -> Optional[set]:
    """None means take everything; otherwise a deterministic index sample."""
    if count <= budget:
        return None
    rng = random.Random(seed)
    return set(rng.sample(range(count), budget))


# ---------------------------------------------------------------------------
# Axiom 1: completeness
# ---------------------------------------------------------------------------


def check_completeness(oracle: PreferenceOracle, family: LotteryFamily) -> AxiomReport:
    """Violated iff some pair of family lotteries has no verdict."""
    start = oracle.query_count
    lots = family.lotteries
    checked = 0
    for i in range(len(lots)):
        for j in range(i, len(lots)):
            checked += 1
            verdict = _try_compare(oracle, lots[i], lots[j])
            if verdict is None:
                return AxiomReport(
                    axiom="completeness",
                    status="violated",
                    witness={
                        "pair": [lottery_to_obj(lots[i]), lottery_to_obj(lots[j])],
                        "reason": "no verdict for this pair",
                    },
                    calls=[CompareCall(lots[i], lots[j], PreferenceOutcome.UNANSWERED)],
                    queries_used=oracle.query_count - start,
                    details={"family": family.describe(), "pairs_checked": checked},
                    note="",
                )
    return AxiomReport(
        axiom="completeness",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={"family": family.describe(), "pairs_checked": checked},
    )


# ---------------------------------------------------------------------------
# Axiom 2: transitivity
# ---------------------------------------------------------------------------


def check_transitivity(
    oracle: PreferenceOracle,
    family: LotteryFamily,
    max_instances: int = DEFAULT_INSTANCE_BUDGET,
    seed: int = 0,
) -> AxiomReport:
    """A >= B >= C with A < C on some ordered triple is the violation."""
    start = oracle.query_count
    lots = family.lotteries
    n = len(lots)
    verdicts: Dict[Tuple[int, int], Optional[PreferenceOutcome]] = {}

    def verdict(i: int, j: int) -> Optional[PreferenceOutcome]:
        if (i, j) not in verdicts:
            v = _try_compare(oracle, lots[i], lots[j])
            verdicts[(i, j)] = v
            verdicts[(j, i)] = v.flip() if v is not None else None
        return verdicts[(i, j)]

    total = n * n * n
    sample = _sample_indices(total, max_instances, seed)
    checked = 0
    for idx in range(total):
        if sample is not None and idx not in sample:
            continue
        i, rest = divmod(idx, n * n)
        j, k = divmod(rest, n)
        if len({i, j, k}) < 3:
            continue
        v_ab, v_bc = verdict(i, j), verdict(j, k)
        if v_ab is None or v_bc is None:
            continue
        if not (v_ab.weakly_greater and v_bc.weakly_greater):
            continue
        v_ac = verdict(i, k)
        checked += 1
        if v_ac is PreferenceOutcome.STRICTLY_LESS:
            return AxiomReport(
                axiom="transitivity",
                status="violated",
                witness={
                    "triple": [lottery_to_obj(lots[x]) for x in (i, j, k)],
                    "reason": "A >= B >= C but A < C",
                },
                calls=[
                    CompareCall(lots[i], lots[j], v_ab),
                    CompareCall(lots[j], lots[k], v_bc),
                    CompareCall(lots[i], lots[k], v_ac),
                ],
                queries_used=oracle.query_count - start,
                details={"family": family.describe(), "triples_checked": checked},
                note="",
            )
    return AxiomReport(
        axiom="transitivity",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={
            "family": family.describe(),
            "triples_checked": checked,
            "sampled": sample is not None,
        },
    )


# ---------------------------------------------------------------------------
# Axiom 3: independence
# ---------------------------------------------------------------------------


def check_independence(
    oracle: PreferenceOracle,
    family: LotteryFamily,
    p_grid: Optional[Sequence[Rational]] = None,
    max_instances: int = DEFAULT_INSTANCE_BUDGET,
    seed: int = 0,
) -> AxiomReport:
    """verdict(A, B) must survive mixing both sides with any C at any p in (0,1)."""
    start = oracle.query_count
    grid = tuple(p_grid) if p_grid is not None else default_p_grid()
    for p in grid:
        if not (Rational(0) < p < Rational(1)):
            raise ValueError(f"independence grid weight {p} outside (0,1)")
    lots = family.lotteries
    n = len(lots)
    pair_verdicts: Dict[Tuple[int, int], Optional[PreferenceOutcome]] = {}

    def base_verdict(i: int, j: int) -> Optional[PreferenceOutcome]:
        if (i, j) not in pair_verdicts:
            pair_verdicts[(i, j)] = _try_compare(oracle, lots[i], lots[j])
        return pair_verdicts[(i, j)]

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = len(pairs) * n * len(grid)
    sample = _sample_indices(total, max_instances, seed)
    checked = 0
    for idx in range(total):
        if sample is not None and idx not in sample:
            continue
        pair_idx, rest = divmod(idx, n * len(grid))
        k, p_idx = divmod(rest, len(grid))
        i, j = pairs[pair_idx]
        p = grid[p_idx]
        v = base_verdict(i, j)
        if v is None:
            continue
        mixed_a = mix(p, lots[i], lots[k])
        mixed_b = mix(p, lots[j], lots[k])
        v_mixed = _try_compare(oracle, mixed_a, mixed_b)
        if v_mixed is None:
            continue
        checked += 1
        if v_mixed is not v:
            return AxiomReport(
                axiom="independence",
                status="violated",
                witness={
                    "A": lottery_to_obj(lots[i]),
                    "B": lottery_to_obj(lots[j]),
                    "C": lottery_to_obj(lots[k]),
                    "p": str(p),
                    "base_verdict": v.value,
                    "mixed_verdict": v_mixed.value,
                },
                calls=[
                    CompareCall(lots[i], lots[j], v),
                    CompareCall(mixed_a, mixed_b, v_mixed),
                ],
                queries_used=oracle.query_count - start,
                details={"family": family.describe(), "instances_checked": checked},
                note="",
            )
    return AxiomReport(
        axiom="independence",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={
            "family": family.describe(),
            "instances_checked": checked,
            "sampled": sample is not None,
        },
    )


# ---------------------------------------------------------------------------
# Axiom 4: continuity
# ---------------------------------------------------------------------------


@dataclass
class BreakEvenResult:
    found: bool
    p: Optional[Rational]
    bracket: Optional[Tuple[Rational, Rational]]
    constant_strict: Optional[str]
    non_monotone: bool
    iterations: int
    calls: List[CompareCall]


def find_break_even(
    oracle: PreferenceOracle,
    target: Lottery,
    high: Lottery,
    low: Lottery,
    eps_p: float = 1e-4,
    max_iter: int = 60,
) -> BreakEvenResult:
    """Search p with mix(p, high, low) indifferent to target.

    A coarse grid scan first classifies the verdict pattern (and flags
    non-monotone responses); when the endpoints bracket a sign change,
    dyadic bisection takes over.  Bisection keeps halving past ``eps_p``
    (up to ``max_iter``) so the tie band of utility-backed oracles is
    actually reachable; ``eps_p`` is the resolution a no-break-even
    verdict certifies.
    """
    calls: List[CompareCall] = []

    def probe(p: Rational) -> PreferenceOutcome:
        mixture = mix(p, high, low)
        v = oracle.compare(mixture, target)
        calls.append(CompareCall(mixture, target, v))
        return v

    grid = [Rational(0)] + list(default_p_grid()) + [Rational(1)]
    scan = [(p, probe(p)) for p in grid]
    for p, v in scan:
        if v is PreferenceOutcome.INDIFFERENT:
            return BreakEvenResult(True, p, None, None, False, 0, calls)
    signs = [v for _, v in scan]
    non_monotone = False
    seen_greater = False
    for v in signs:  # monotone pattern: LESS ... GREATER with one change
        if v is PreferenceOutcome.STRICTLY_GREATER:
            seen_greater = True
        elif seen_greater:
            non_monotone = True
            break
    if all(v is signs[0] for v in signs):
        return BreakEvenResult(False, None, None, signs[0].value, non_monotone, 0, calls)
    # bisect on pure dyadics from [0, 1]: denominators stay 2**k, overflow-safe
    lo, hi = Rational(0), Rational(1)
    lo_v = signs[0]
    min_iters = max(1, math.ceil(math.log2(1 / eps_p)) + 1)
    iters = max(max_iter, min_iters)
    for k in range(iters):
        mid = (lo + hi) / Rational(2)
        v = probe(mid)
        if v is PreferenceOutcome.INDIFFERENT:
            return BreakEvenResult(True, mid, (lo, hi), None, non_monotone, k + 1, calls)
        if v is lo_v:
            lo = mid
        else:
            hi = mid
    return BreakEvenResult(False, None, (lo, hi), None, non_monotone, iters, calls)


def check_continuity(
    oracle: PreferenceOracle,
    triple: Tuple[Lottery, Lottery, Lottery],
    eps_p: float = 1e-4,
    max_iter: int = 60,
) -> AxiomReport:
    """Existence of p with mix(p, A, C) indifferent to B, given A >= B >= C."""
    a, b, c = triple
    start = oracle.query_count
    v_ab = _try_compare(oracle, a, b)
    v_bc = _try_compare(oracle, b, c)
    if v_ab is None or v_bc is None or not (v_ab.weakly_greater and v_bc.weakly_greater):
        raise AxiomPreconditionError(
            f"continuity needs A >= B >= C, got A?B={v_ab} and B?C={v_bc}"
        )
    pre_calls = [CompareCall(a, b, v_ab), CompareCall(b, c, v_bc)]
    if v_ab is PreferenceOutcome.INDIFFERENT:
        return AxiomReport(
            axiom="continuity",
            status="passed-on-family",
            calls=pre_calls,
            queries_used=oracle.query_count - start,
            details={"break_even": "1", "reason": "A ~ B, p = 1"},
        )
    if v_bc is PreferenceOutcome.INDIFFERENT:
        return AxiomReport(
            axiom="continuity",
            status="passed-on-family",
            calls=pre_calls,
            queries_used=oracle.query_count - start,
            details={"break_even": "0", "reason": "B ~ C, p = 0"},
        )
    result = find_break_even(oracle, b, a, c, eps_p, max_iter)
    details = {
        "eps_p": eps_p,
        "iterations": result.iterations,
        "non_monotone_responses": result.non_monotone,
    }
    if result.found:
        details["break_even"] = str(result.p)
        return AxiomReport(
            axiom="continuity",
            status="passed-on-family",
            calls=pre_calls + result.calls[-1:],
            queries_used=oracle.query_count - start,
            details=details,
        )
    if result.constant_strict is not None:
        details["pattern"] = f"constant {result.constant_strict} across the grid, cannot bracket"
    else:
        details["bracket"] = [str(result.bracket[0]), str(result.bracket[1])]
        details["bracket_width"] = float(result.bracket[1] - result.bracket[0])
    return AxiomReport(
        axiom="continuity",
        status="violated",
        witness={
            "A": lottery_to_obj(a),
            "B": lottery_to_obj(b),
            "C": lottery_to_obj(c),
            "reason": f"no break-even up to resolution {eps_p}",
            "resolution_limited": True,
        },
        calls=pre_calls + result.calls,
        queries_used=oracle.query_count - start,
        details=details,
        note="no-break-even verdicts are resolution-limited, not analytic proofs",
    )


# ---------------------------------------------------------------------------
# Axiom 5: temporal gamma-indifference
# ---------------------------------------------------------------------------


def _gamma_weight(gamma: Rational) -> Rational:
    """Weight 1/(gamma+1) placed on the prepended side of the axiom mixture."""
    return Rational(gamma.denominator, gamma.numerator + gamma.denominator)


def _snap_gamma(value: Union[Rational, float, int], max_denominator: int = 10**6) -> Tuple[Rational, float]:
    """Round to the exact-grid rational, returning the rounding offset."""
    if isinstance(value, Rational):
        return value, 0.0
    if isinstance(value, int):
        return Rational(value), 0.0
    snapped = Rational.from_float(float(value), max_denominator)
    return snapped, float(snapped) - float(value)


def check_temporal_gamma_indifference(
    oracle: PreferenceOracle,
    family: LotteryFamily,
    gamma: Optional[Mapping[Transition, Union[Rational, float, int]]] = None,
    solve: bool = False,
    max_gamma: Optional[float] = 1.0,
    transitions: Optional[Sequence[Transition]] = None,
    max_instances: int = DEFAULT_INSTANCE_BUDGET,
    seed: int = 0,
) -> AxiomReport:
    """Check (or solve for) the per-transition discount making prepends scale preference.

    Candidate mode validates the supplied gamma map directly through the
    mixture indifference queries.  Solve mode derives gamma per transition
    -- from utility ratios when the oracle exposes utilities, else through
    the sign-consistency certificate -- and reports Unsatisfiable with the
    two conflicting instances when no nonnegative choice works.
    ``max_gamma`` restricts the admitted range ([0, 1] by default; None
    means all nonnegative reals).
    """
    if gamma is None and not solve:
        raise ValueError("supply a gamma candidate or set solve=True")
    ts = tuple(transitions) if transitions is not None else oracle.alphabet.transitions
    start = oracle.query_count
    if gamma is not None:
        return _check_gamma_candidate(oracle, family, gamma, ts, start, max_instances, seed)
    if isinstance(oracle, UtilityOracle):
        return _solve_gamma_utility(oracle, family, ts, start, max_gamma, max_instances, seed)
    return _solve_gamma_signs(oracle, family, ts, start)


def _axiom5_instance(
    oracle: PreferenceOracle, t: Transition, a: Lottery, b: Lottery, w: Rational
) -> Tuple[Optional[PreferenceOutcome], Lottery, Lottery]:
    left = mix(w, prepend(t, a), b)
    right = mix(w, prepend(t, b), a)
    return _try_compare(oracle, left, right), left, right


def _check_gamma_candidate(
    oracle: PreferenceOracle,
    family: LotteryFamily,
    gamma: Mapping[Transition, Union[Rational, float, int]],
    ts: Sequence[Transition],
    start: int,
    max_instances: int,
    seed: int,
) -> AxiomReport:
    snapped: Dict[Transition, Rational] = {}
    roundings: Dict[str, float] = {}
    for t in ts:
        if t not in gamma:
            raise ValueError(f"gamma candidate missing transition {t}")
        g, offset = _snap_gamma(gamma[t])
        if g < Rational(0):
            raise ValueError(f"gamma candidate for {t} is negative")
        snapped[t] = g
        if offset:
            roundings[t.label] = offset
    lots = family.lotteries
    n = len(lots)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = len(ts) * len(pairs)
    sample = _sample_indices(total, max_instances, seed)
    checked = 0
    for idx in range(total):
        if sample is not None and idx not in sample:
            continue
        t_idx, pair_idx = divmod(idx, len(pairs))
        t = ts[t_idx]
        i, j = pairs[pair_idx]
        w = _gamma_weight(snapped[t])
        verdict, left, right = _axiom5_instance(oracle, t, lots[i], lots[j], w)
        if verdict is None:
            continue
        checked += 1
        if verdict is not PreferenceOutcome.INDIFFERENT:
            return AxiomReport(
                axiom="temporal-gamma-indifference",
                status="violated",
                witness={
                    "transition": transition_to_obj(t),
                    "gamma": str(snapped[t]),
                    "A": lottery_to_obj(lots[i]),
                    "B": lottery_to_obj(lots[j]),
                    "reason": "mixture pair not indifferent under the candidate gamma",
                },
                calls=[CompareCall(left, right, verdict)],
                queries_used=oracle.query_count - start,
                details={"family": family.describe(), "instances_checked": checked,
                         "gamma_roundings": roundings},
                note="",
            )
    return AxiomReport(
        axiom="temporal-gamma-indifference",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={
            "family": family.describe(),
            "instances_checked": checked,
            "gamma": {t.label: str(g) for t, g in snapped.items()},
            "gamma_roundings": roundings,
            "sampled": sample is not None,
        },
    )


def _solve_gamma_utility(
    oracle: UtilityOracle,
    family: LotteryFamily,
    ts: Sequence[Transition],
    start: int,
    max_gamma: Optional[float],
    max_instances: int,
    seed: int,
) -> AxiomReport:
    lots = family.lotteries
    utilities = [oracle.utility(a) for a in lots]
    threshold = max(10 * oracle.eps_u, 1e-12)
    best_pair: Optional[Tuple[int, int]] = None
    best_gap = threshold
    for i in range(len(lots)):
        for j in range(i + 1, len(lots)):
            gap = abs(utilities[i] - utilities[j])
            if gap > best_gap:
                best_gap = gap
                best_pair = (i, j)
    if best_pair is None:
        return AxiomReport(
            axiom="temporal-gamma-indifference",
            status="passed-on-family",
            queries_used=oracle.query_count - start,
            details={
                "family": family.describe(),
                "degenerate": True,
                "reason": "constant utility on the family; any gamma satisfies the axiom",
            },
        )
    i, j = best_pair
    if utilities[i] < utilities[j]:
        i, j = j, i
    a, b = lots[i], lots[j]  # u(a) > u(b)
    denom = utilities[i] - utilities[j]
    solved: Dict[Transition, float] = {}
    skipped: List[str] = []
    for t in ts:
        pa, pb = prepend(t, a), prepend(t, b)
        try:
            num = oracle.utility(pa) - oracle.utility(pb)
        except UnansweredQueryError:
            skipped.append(t.label)
            continue
        g = num / denom
        if g < -1e-9:
            calls = [
                CompareCall(a, b, oracle.compare(a, b)),
                CompareCall(pa, pb, oracle.compare(pa, pb)),
            ]
            return AxiomReport(
                axiom="temporal-gamma-indifference",
                status="violated",
                witness={
                    "transition": transition_to_obj(t),
                    "derived_gamma": g,
                    "reason": "no nonnegative gamma: prepending reverses the preference",
                    "unsatisfiable": True,
                    "A": lottery_to_obj(a),
                    "B": lottery_to_obj(b),
                },
                calls=calls,
                queries_used=oracle.query_count - start,
                details={"family": family.describe()},
                note="",
            )
        g = max(g, 0.0)
        if max_gamma is not None and g > max_gamma + 1e-9:
            # replayable one-sided certificate: the axiom instance at the
            # boundary candidate stays strict on the prepended side
            boundary = Rational.from_float(max_gamma)
            verdict, left, right = _axiom5_instance(oracle, t, a, b, _gamma_weight(boundary))
            calls = [CompareCall(left, right, verdict)] if verdict is not None else []
            return AxiomReport(
                axiom="temporal-gamma-indifference",
                status="violated",
                witness={
                    "transition": transition_to_obj(t),
                    "derived_gamma": g,
                    "max_gamma": max_gamma,
                    "reason": f"derived gamma {g} exceeds the admitted range [0, {max_gamma}]",
                    "range_limited": True,
                },
                calls=calls,
                queries_used=oracle.query_count - start,
                details={"family": family.describe(),
                         "hint": "re-run with max_gamma=None for the nonnegative-reals range"},
                note="",
            )
        solved[t] = g
    candidate = {t: Rational.from_float(g) for t, g in solved.items()}
    report = _check_gamma_candidate(
        oracle, family, candidate, tuple(solved), start, max_instances, seed
    )
    report.details["solved_gamma"] = {t.label: g for t, g in solved.items()}
    report.details["derivation_pair"] = [lottery_to_obj(a), lottery_to_obj(b)]
    if skipped:
        report.details["skipped_transitions_unanswered"] = skipped
    if report.violated:
        report.witness["reason"] = (
            "solved gamma fails validation elsewhere on the family: "
            "no single per-transition discount satisfies the axiom"
        )
        report.witness["unsatisfiable"] = True
    return report


def _solve_gamma_signs(
    oracle: PreferenceOracle,
    family: LotteryFamily,
    ts: Sequence[Transition],
    start: int,
) -> AxiomReport:
    """Black-box solve: per-transition sign constraints, conflict means Unsatisfiable.

    A strict verdict on (t.A, t.B) forces gamma(t) > 0 and commits the
    base pair (A, B) to the same strict sign; an indifferent verdict with
    a strict base forces gamma(t) = 0, contradicting any strict
    commitment for t.  Two contexts demanding opposite base signs for the
    same pair rule out every nonnegative assignment at once.
    """
    lots = family.lotteries
    n = len(lots)
    demanded: Dict[Tuple[int, int], Tuple[PreferenceOutcome, Transition, CompareCall]] = {}
    forced_positive: Dict[Transition, CompareCall] = {}
    forced_zero: Dict[Transition, CompareCall] = {}
    gamma_class: Dict[Transition, str] = {t: "unconstrained" for t in ts}

    def conflict(reason: str, calls: List[CompareCall], payload: dict) -> AxiomReport:
        payload["reason"] = reason
        payload["unsatisfiable"] = True
        return AxiomReport(
            axiom="temporal-gamma-indifference",
            status="violated",
            witness=payload,
            calls=calls,
            queries_used=oracle.query_count - start,
            details={"family": family.describe(), "mode": "sign-certificate"},
            note="",
        )

    for t in ts:
        for i in range(n):
            for j in range(i + 1, n):
                a, b = lots[i], lots[j]
                pa, pb = prepend(t, a), prepend(t, b)
                vp = _try_compare(oracle, pa, pb)
                if vp is None:
                    continue
                prepend_call = CompareCall(pa, pb, vp)
                vb = _try_compare(oracle, a, b)
                base_call = CompareCall(a, b, vb) if vb is not None else None
                if vp is PreferenceOutcome.INDIFFERENT:
                    if vb is not None and vb is not PreferenceOutcome.INDIFFERENT:
                        if t in forced_positive:
                            return conflict(
                                f"gamma({t.label}) must be 0 here but positive elsewhere",
                                [forced_positive[t], prepend_call, base_call],
                                {"transition": transition_to_obj(t)},
                            )
                        forced_zero[t] = prepend_call
                        gamma_class[t] = "zero"
                    continue
                # strict prepended verdict: gamma(t) > 0 and base sign must match
                if t in forced_zero:
                    return conflict(
                        f"gamma({t.label}) must be positive here but 0 elsewhere",
                        [forced_zero[t], prepend_call],
                        {"transition": transition_to_obj(t)},
                    )
                forced_positive[t] = prepend_call
                gamma_class[t] = "positive"
                if vb is not None and vb is not vp:
                    return conflict(
                        "strict prepended preference with mismatched base verdict "
                        f"leaves no gamma({t.label}) >= 0",
                        [prepend_call, base_call],
                        {"transition": transition_to_obj(t),
                         "A": lottery_to_obj(a), "B": lottery_to_obj(b)},
                    )
                prior = demanded.get((i, j))
                if prior is not None and prior[0] is not vp:
                    prior_verdict, prior_t, prior_call = prior
                    return conflict(
                        f"contexts {prior_t.label} and {t.label} demand opposite base "
                        "signs for the same pair",
                        [prior_call, prepend_call],
                        {
                            "transitions": [transition_to_obj(prior_t), transition_to_obj(t)],
                            "A": lottery_to_obj(a),
                            "B": lottery_to_obj(b),
                        },
                    )
                demanded[(i, j)] = (vp, t, prepend_call)
    return AxiomReport(
        axiom="temporal-gamma-indifference",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={
            "family": family.describe(),
            "mode": "sign-certificate",
            "gamma_classes": {t.label: c for t, c in gamma_class.items()},
        },
    )


# ---------------------------------------------------------------------------
# Memoryless
# ---------------------------------------------------------------------------


def check_memoryless(
    oracle: PreferenceOracle,
    family: LotteryFamily,
    transitions: Optional[Sequence[Transition]] = None,
    max_instances: int = DEFAULT_INSTANCE_BUDGET,
    seed: int = 0,
) -> AxiomReport:
    """verdict(A, B) must equal verdict(t.A, t.B) for every shared prefix t."""
    ts = tuple(transitions) if transitions is not None else oracle.alphabet.transitions
    start = oracle.query_count
    lots = family.lotteries
    n = len(lots)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = len(ts) * len(pairs)
    sample = _sample_indices(total, max_instances, seed)
    checked = 0
    skipped = 0
    for idx in range(total):
        if sample is not None and idx not in sample:
            continue
        t_idx, pair_idx = divmod(idx, len(pairs))
        t = ts[t_idx]
        i, j = pairs[pair_idx]
        a, b = lots[i], lots[j]
        vb = _try_compare(oracle, a, b)
        pa, pb = prepend(t, a), prepend(t, b)
        vp = _try_compare(oracle, pa, pb)
        if vb is None or vp is None:
            skipped += 1
            continue
        checked += 1
        if vb is not vp:
            return AxiomReport(
                axiom="memoryless",
                status="violated",
                witness={
                    "transition": transition_to_obj(t),
                    "A": lottery_to_obj(a),
                    "B": lottery_to_obj(b),
                    "base_verdict": vb.value,
                    "prepended_verdict": vp.value,
                },
                calls=[CompareCall(a, b, vb), CompareCall(pa, pb, vp)],
                queries_used=oracle.query_count - start,
                details={"family": family.describe(), "instances_checked": checked},
                note="",
            )
    return AxiomReport(
        axiom="memoryless",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={
            "family": family.describe(),
            "instances_checked": checked,
            "instances_skipped_unanswered": skipped,
            "sampled": sample is not None,
        },
    )


# ---------------------------------------------------------------------------
# Additivity
# ---------------------------------------------------------------------------


def check_additivity(
    oracle: PreferenceOracle,
    family: LotteryFamily,
    prefixes: Optional[Sequence[History]] = None,
    p_grid: Optional[Sequence[Rational]] = None,
    max_instances: int = DEFAULT_INSTANCE_BUDGET,
    seed: int = 0,
) -> AxiomReport:
    """Swapping a shared prefixed history must not change mixed preferences.

    For prefixes h1, h2 and lotteries A, B, C, D:
    p(h1.A)+(1-p)C >= p(h1.B)+(1-p)D must hold iff the same with h2.
    """
    start = oracle.query_count
    if prefixes is None:
        prefixes = [EMPTY_HISTORY] + [History.of(t) for t in oracle.alphabet.transitions]
    grid = list(p_grid) if p_grid is not None else list(default_p_grid()) + [Rational(1)]
    lots = family.lotteries
    n = len(lots)
    hs = list(prefixes)
    h_pairs = [(x, y) for x in range(len(hs)) for y in range(len(hs)) if x < y]
    total = len(h_pairs) * n * n * n * n * len(grid)
    sample = _sample_indices(total, max_instances, seed)
    checked = 0
    for idx in range(total):
        if sample is not None and idx not in sample:
            continue
        rest, p_idx = divmod(idx, len(grid))
        rest, d = divmod(rest, n)
        rest, c = divmod(rest, n)
        rest, bb = divmod(rest, n)
        hp, a = divmod(rest, n)
        h1, h2 = hs[h_pairs[hp][0]], hs[h_pairs[hp][1]]
        p = grid[p_idx]
        lhs1 = mix(p, prepend_history(h1, lots[a]), lots[c])
        rhs1 = mix(p, prepend_history(h1, lots[bb]), lots[d])
        v1 = _try_compare(oracle, lhs1, rhs1)
        if v1 is None:
            continue
        lhs2 = mix(p, prepend_history(h2, lots[a]), lots[c])
        rhs2 = mix(p, prepend_history(h2, lots[bb]), lots[d])
        v2 = _try_compare(oracle, lhs2, rhs2)
        if v2 is None:
            continue
        checked += 1
        if (v1 is PreferenceOutcome.STRICTLY_GREATER) != (v2 is PreferenceOutcome.STRICTLY_GREATER) or (
            v1 is PreferenceOutcome.STRICTLY_LESS
        ) != (v2 is PreferenceOutcome.STRICTLY_LESS):
            return AxiomReport(
                axiom="additivity",
                status="violated",
                witness={
                    "h1": history_to_obj(h1),
                    "h2": history_to_obj(h2),
                    "A": lottery_to_obj(lots[a]),
                    "B": lottery_to_obj(lots[bb]),
                    "C": lottery_to_obj(lots[c]),
                    "D": lottery_to_obj(lots[d]),
                    "p": str(p),
                    "verdict_h1": v1.value,
                    "verdict_h2": v2.value,
                },
                calls=[CompareCall(lhs1, rhs1, v1), CompareCall(lhs2, rhs2, v2)],
                queries_used=oracle.query_count - start,
                details={"family": family.describe(), "instances_checked": checked},
                note="",
            )
    return AxiomReport(
        axiom="additivity",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={
            "family": family.describe(),
            "instances_checked": checked,
            "sampled": sample is not None,
        },
    )


# ---------------------------------------------------------------------------
# Sequential consistency
# ---------------------------------------------------------------------------


def check_sequential_consistency(
    oracle: PreferenceOracle,
    contexts: LotteryFamily,
    continuations: LotteryFamily,
    prefixes: Sequence[History],
    max_instances: int = DEFAULT_INSTANCE_BUDGET,
    seed: int = 0,
) -> AxiomReport:
    """Strict preference between prefixed continuations must survive redirection.

    h.A > h.B iff C[h -> A] > C[h -> B], for contexts C putting positive
    mass on the prefix; zero-mass contexts are vacuous (redirect is the
    identity) and are skipped.
    """
    start = oracle.query_count
    conts = continuations.lotteries
    ctxs = contexts.lotteries
    n = len(conts)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = len(prefixes) * len(ctxs) * len(pairs)
    sample = _sample_indices(total, max_instances, seed)
    checked = 0
    skipped_vacuous = 0
    for idx in range(total):
        if sample is not None and idx not in sample:
            continue
        rest, pair_idx = divmod(idx, len(pairs))
        h_idx, c_idx = divmod(rest, len(ctxs))
        h = prefixes[h_idx]
        ctx = ctxs[c_idx]
        i, j = pairs[pair_idx]
        a, b = conts[i], conts[j]
        if all(not hist.has_prefix(h) for hist in ctx.support):
            skipped_vacuous += 1
            continue
        ha, hb = prepend_history(h, a), prepend_history(h, b)
        v_direct = _try_compare(oracle, ha, hb)
        if v_direct is None:
            continue
        ra, rb = redirect(ctx, h, a), redirect(ctx, h, b)
        v_ctx = _try_compare(oracle, ra, rb)
        if v_ctx is None:
            continue
        checked += 1
        if (v_direct is PreferenceOutcome.STRICTLY_GREATER) != (
            v_ctx is PreferenceOutcome.STRICTLY_GREATER
        ) or (v_direct is PreferenceOutcome.STRICTLY_LESS) != (
            v_ctx is PreferenceOutcome.STRICTLY_LESS
        ):
            return AxiomReport(
                axiom="sequential-consistency",
                status="violated",
                witness={
                    "prefix": history_to_obj(h),
                    "context": lottery_to_obj(ctx),
                    "A": lottery_to_obj(a),
                    "B": lottery_to_obj(b),
                    "direct_verdict": v_direct.value,
                    "redirected_verdict": v_ctx.value,
                },
                calls=[CompareCall(ha, hb, v_direct), CompareCall(ra, rb, v_ctx)],
                queries_used=oracle.query_count - start,
                details={"instances_checked": checked},
                note="",
            )
    return AxiomReport(
        axiom="sequential-consistency",
        status="passed-on-family",
        queries_used=oracle.query_count - start,
        details={
            "instances_checked": checked,
            "vacuous_skipped": skipped_vacuous,
            "sampled": sample is not None,
        },
    )


# ---------------------------------------------------------------------------
# Preference-cycle detection (shared with the elicitation session)
# ---------------------------------------------------------------------------


def find_preference_cycle(
    records: Sequence[Tuple[str, str, PreferenceOutcome, object]],
) -> Optional[List[object]]:
    """Find a transitivity contradiction in answered comparisons.

    ``records`` are (left_key, right_key, verdict, payload) with canonical
    string keys.  Indifference merges nodes; strict edges between merged
    classes form a digraph whose directed cycles (or strict edges inside
    one class) are contradictions.  Returns the payloads of the involved
    comparisons, or None.
    """
    parent: Dict[str, str] = {}
    sim_adj: Dict[str, List[Tuple[str, object]]] = {}
    strict: List[Tuple[str, str, object]] = []

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: str, y: str):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for left, right, verdict, payload in records:
        find(left)
        find(right)
        if verdict is PreferenceOutcome.INDIFFERENT:
            sim_adj.setdefault(left, []).append((right, payload))
            sim_adj.setdefault(right, []).append((left, payload))
            union(left, right)
        elif verdict is PreferenceOutcome.STRICTLY_GREATER:
            strict.append((left, right, payload))
        elif verdict is PreferenceOutcome.STRICTLY_LESS:
            strict.append((right, left, payload))

    def sim_path(a: str, b: str) -> List[object]:
        if a == b:
            return []
        prev: Dict[str, Tuple[str, object]] = {a: (a, None)}
        queue = [a]
        while queue:
            node = queue.pop(0)
            for nxt, payload in sim_adj.get(node, []):
                if nxt not in prev:
                    prev[nxt] = (node, payload)
                    if nxt == b:
                        path = []
                        cur = b
                        while cur != a:
                            p, payload = prev[cur]
                            path.append(payload)
                            cur = p
                        return path
                    queue.append(nxt)
        return []

    # strict edge inside one indifference class is already a contradiction
    for a, b, payload in strict:
        if find(a) == find(b):
            return [payload] + sim_path(a, b)

    # directed cycle over indifference classes
    class_edges: Dict[str, List[Tuple[str, Tuple[str, str, object]]]] = {}
    for a, b, payload in strict:
        class_edges.setdefault(find(a), []).append((find(b), (a, b, payload)))
    WHITE, GRAY, BLACK = 0, 1, 2
    color: Dict[str, int] = {}
    stack_edges: List[Tuple[str, str, object]] = []

    def dfs(node: str) -> Optional[List[Tuple[str, str, object]]]:
        color[node] = GRAY
        for nxt, edge in class_edges.get(node, []):
            if color.get(nxt, WHITE) == GRAY:
                # unwind the stack back to nxt
                cycle = [edge]
                for e in reversed(stack_edges):
                    cycle.append(e)
                    if find(e[0]) == nxt:
                        break
                return list(reversed(cycle))
            if color.get(nxt, WHITE) == WHITE:
                stack_edges.append(edge)
                found = dfs(nxt)
                stack_edges.pop()
                if found:
                    return found
        color[node] = BLACK
        return None

    for node in list(class_edges):
        if color.get(node, WHITE) == WHITE:
            cycle = dfs(node)
            if cycle:
                payloads: List[object] = []
                for idx, (a, b, payload) in enumerate(cycle):
                    payloads.append(payload)
                    nxt_a = cycle[(idx + 1) % len(cycle)][0]
                    payloads.extend(sim_path(b, nxt_a))
                return payloads
    return None
