"""Self-verifying counterexample gallery.

Each case bundles an environment or oracle with the checker verdicts it
claims; running a case executes every claim and fails loudly on any
mismatch.  The concrete reward numbers are constructed to satisfy the
qualitative properties each scenario calls for (feasibility patterns,
reversals, unreachable states); none of them are canonical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

from .axioms import (
    check_continuity,
    check_independence,
    check_memoryless,
    check_temporal_gamma_indifference,
    check_transitivity,
    find_break_even,
)
from .design import DesignAbortError, design_reward
from .families import LotteryFamily, generate_family
from .histories import Alphabet, History, Transition
from .lotteries import Lottery, mix
from .oracles import (
    CmdpOracle,
    MarkovOracle,
    PreferenceOutcome,
    RewardSpec,
    RiskOracle,
    TableOracle,
)
from .policysim import TabularEnv, TabularPolicy, compare_policies_by_goal, rollout_distribution
from .rationals import Rational

__all__ = [
    "GalleryCase",
    "CaseResult",
    "steady_state_case",
    "entailment_case",
    "cmdp_independence_case",
    "cmdp_continuity_case",
    "risk_case",
    "GALLERY_CASES",
    "run_case",
    "run_all",
]


@dataclass
class Claim:
    name: str
    expected: str
    run: Callable[[], Tuple[str, dict]]  # returns (actual, details)


@dataclass
class GalleryCase:
    name: str
    description: str
    provenance: str
    claims: List[Claim]
    artifacts: dict = field(default_factory=dict)

    def run(self) -> "CaseResult":
        lines: List[str] = []
        failures: List[str] = []
        for claim in self.claims:
            actual, details = claim.run()
            ok = actual == claim.expected
            status = "ok" if ok else "MISMATCH"
            lines.append(
                f"[{status}] {self.name} :: {claim.name}: expected {claim.expected}, got {actual}"
            )
            if details:
                lines.append(f"         {details}")
            if not ok:
                failures.append(claim.name)
        return CaseResult(self.name, not failures, lines, failures)


@dataclass
class CaseResult:
    name: str
    ok: bool
    lines: List[str]
    failures: List[str]


def _verdict_claim(name: str, expected: PreferenceOutcome,
                   run: Callable[[], PreferenceOutcome]) -> Claim:
    def wrapped():
        return run().value, {}

    return Claim(name, expected.value, wrapped)


# ---------------------------------------------------------------------------
# Steady state: strict preference between outcome-identical policies
# ---------------------------------------------------------------------------


def steady_state_case() -> GalleryCase:
    """Two policies differing only at an unreachable state induce identical outcomes."""
    one = Rational(1)
    env = TabularEnv(
        states=("s0", "s1"),
        actions=("a1", "a2"),
        obs_map={"s0": "s0", "s1": "s1"},
        transitions={
            "s0": {"a1": {"s0": one}, "a2": {"s0": one}},
            "s1": {"a1": {"s1": one}, "a2": {"s1": one}},
        },
        initial={"s0": one},
    )
    pi_21 = TabularPolicy(rules={"s0": {"a2": one}, "s1": {"a1": one}})
    pi_22 = TabularPolicy(rules={"s0": {"a2": one}, "s1": {"a2": one}})
    goal_spec = RewardSpec(
        rewards={Transition(o, a): 1.0 if (o, a) == ("s1", "a1") else 0.0
                 for o in ("s0", "s1") for a in ("a1", "a2")},
        discounts={Transition(o, a): 1.0 for o in ("s0", "s1") for a in ("a1", "a2")},
    )
    oracle = MarkovOracle(goal_spec, env.alphabet)

    def distributions_identical():
        for n in range(1, 9):
            if rollout_distribution(env, pi_21, n) != rollout_distribution(env, pi_22, n):
                return "distributions-differ", {"n": n}
        return "identical-for-n<=8", {}

    def goal_comparison():
        verdict = compare_policies_by_goal(oracle, env, pi_21, pi_22, n_max=8)
        return verdict.relation, {"n_found": verdict.n_found}

    def premise_report():
        # The designer stipulates a strict preference between these policies,
        # yet every induced distribution is identical: no outcome-consistent
        # policy preference can express it.
        identical = all(
            rollout_distribution(env, pi_21, n) == rollout_distribution(env, pi_22, n)
            for n in range(1, 9)
        )
        if identical:
            return (
                "policy-preferences-follow-outcomes violated",
                {"declared": "pi_21 strictly preferred to pi_22",
                 "induced": "identical history distributions"},
            )
        return "premise holds", {}

    return GalleryCase(
        name="steady-state",
        description=(
            "A two-state environment whose second state is unreachable; the declared "
            "goal strictly prefers one of two policies that differ only there."
        ),
        provenance=(
            "Environment constructed so the compared policies never leave s0; the "
            "declared preference is the case's stipulation, not derived from rewards."
        ),
        claims=[
            Claim("induced distributions", "identical-for-n<=8", distributions_identical),
            Claim("goal comparison on identical outcomes", "indifferent", goal_comparison),
            Claim(
                "violated premise",
                "policy-preferences-follow-outcomes violated",
                premise_report,
            ),
        ],
        artifacts={"env": env, "pi_21": pi_21, "pi_22": pi_22, "oracle": oracle},
    )


# ---------------------------------------------------------------------------
# Entailment: context-dependent continuation preferences
# ---------------------------------------------------------------------------


def entailment_case() -> GalleryCase:
    """Opposite continuation preferences after different first transitions."""
    alphabet = Alphabet(("s1", "s2"), ("a1", "a2"))
    t1 = Transition("s1", "a1")
    t2 = Transition("s1", "a2")
    cont_a = History.of(Transition("s2", "a2"))
    cont_b = History.of(Transition("s2", "a1"))
    dirac_a, dirac_b = Lottery.dirac(cont_a), Lottery.dirac(cont_b)
    entries = [
        (Lottery.dirac(cont_a.prepend(t1)), Lottery.dirac(cont_b.prepend(t1)),
         PreferenceOutcome.STRICTLY_GREATER),
        (Lottery.dirac(cont_a.prepend(t2)), Lottery.dirac(cont_b.prepend(t2)),
         PreferenceOutcome.STRICTLY_LESS),
        # The relation says nothing about the bare continuations; indifference is
        # the neutral completion that lets prefix checks run at all.
        (dirac_a, dirac_b, PreferenceOutcome.INDIFFERENT),
    ]
    oracle = TableOracle(entries, alphabet)
    family = LotteryFamily(
        base_histories=(cont_a, cont_b),
        q=1,
        lotteries=(dirac_a, dirac_b),
        exhaustive=True,
        full_size=2,
    )

    def memoryless_verdict():
        report = check_memoryless(oracle, family, transitions=[t1, t2])
        details = {}
        if report.violated:
            details = {
                "transition": report.witness["transition"],
                "base": report.witness["base_verdict"],
                "prepended": report.witness["prepended_verdict"],
            }
        return report.status, details

    def gamma_solve_verdict():
        report = check_temporal_gamma_indifference(
            oracle, family, solve=True, max_gamma=None, transitions=[t1, t2]
        )
        unsat = bool(report.witness and report.witness.get("unsatisfiable"))
        return ("unsatisfiable" if report.violated and unsat else report.status), {
            "reason": report.witness.get("reason") if report.witness else None
        }

    def zero_gamma_verdict():
        report = check_temporal_gamma_indifference(
            oracle, family, gamma={t1: 0, t2: 0}, transitions=[t1, t2]
        )
        return report.status, {}

    def opposite_demands():
        # the two contexts push the bare pair in opposite directions, so no
        # per-transition scaling can satisfy both
        va = oracle.compare(Lottery.dirac(cont_a.prepend(t1)), Lottery.dirac(cont_b.prepend(t1)))
        vb = oracle.compare(Lottery.dirac(cont_a.prepend(t2)), Lottery.dirac(cont_b.prepend(t2)))
        if va is PreferenceOutcome.STRICTLY_GREATER and vb is PreferenceOutcome.STRICTLY_LESS:
            return "contexts-demand-opposite-signs", {}
        return "no-conflict", {}

    return GalleryCase(
        name="entailment",
        description=(
            "A finite relation preferring opposite continuations after two different "
            "first transitions; no nonnegative per-transition discount can hold."
        ),
        provenance=(
            "Table encodes the two strict context preferences; the bare-continuation "
            "pair is completed as indifferent (the relation itself never ranks it)."
        ),
        claims=[
            Claim("prefix-invariance check", "violated", memoryless_verdict),
            Claim("discount solve over nonnegative reals", "unsatisfiable", gamma_solve_verdict),
            Claim("zero-discount candidate", "violated", zero_gamma_verdict),
            Claim("context demands", "contexts-demand-opposite-signs", opposite_demands),
        ],
        artifacts={"oracle": oracle, "family": family, "t1": t1, "t2": t2},
    )


# ---------------------------------------------------------------------------
# Constrained comparisons: independence failure
# ---------------------------------------------------------------------------

CMDP_ALPHABET = Alphabet(("s",), ("L", "R"))


def _two_step(first: str, second: str) -> History:
    return History.of(Transition("s", first), Transition("s", second))


LL, LR, RL, RR = (_two_step(a, b) for a in "LR" for b in "LR")
# reading order above: LL, LR, RL, RR

CMDP_INDEPENDENCE_R1 = {LL: 3.0, LR: 1.0, RL: 2.0, RR: 0.0}
CMDP_INDEPENDENCE_R2 = {LL: -1.0, LR: -2.0, RL: -1.0, RR: 2.0}


def cmdp_independence_case() -> GalleryCase:
    """Feasibility-first comparison reverses a preference under mixing."""
    oracle = CmdpOracle(CMDP_INDEPENDENCE_R1, CMDP_INDEPENDENCE_R2, CMDP_ALPHABET)
    half = Rational(1, 2)
    lot_a = mix(half, Lottery.dirac(RL), Lottery.dirac(RR))
    lot_b = Lottery.dirac(LL)
    lot_c = Lottery.dirac(RR)
    family = LotteryFamily(
        base_histories=(LL, LR, RL, RR),
        q=2,
        lotteries=(lot_a, lot_b, lot_c),
        exhaustive=False,
        full_size=10,
    )

    def feasibility_values():
        ea = oracle.expected_constraint(lot_a)
        eb = oracle.expected_constraint(lot_b)
        if ea == 0.5 and eb == -1.0:
            return "A-feasible-B-infeasible", {"E_r2_A": ea, "E_r2_B": eb}
        return "unexpected", {"E_r2_A": ea, "E_r2_B": eb}

    def mixed_reversal():
        mixed_a = mix(half, lot_a, lot_c)
        mixed_b = mix(half, lot_b, lot_c)
        verdict = oracle.compare(mixed_a, mixed_b)
        return verdict.value, {
            "base_r1_mixed_A": oracle.expected_base(mixed_a),
            "base_r1_mixed_B": oracle.expected_base(mixed_b),
        }

    def checker_verdict():
        report = check_independence(oracle, family, p_grid=[half])
        return report.status, {"witness_p": report.witness.get("p") if report.witness else None,
                               "note": CmdpOracle.TIE_BREAK_NOTE}

    return GalleryCase(
        name="cmdp-independence",
        description=(
            "Four two-step histories with base and constraint payoffs; a feasible "
            "mixture beats an infeasible sure thing until both are mixed with a slack "
            "history, when the base payoff flips the verdict."
        ),
        provenance=(
            "Payoff table constructed to give the stated feasibility pattern and "
            "reversal; the source scenario prints no numeric table."
        ),
        claims=[
            _verdict_claim(
                "base preference A vs B",
                PreferenceOutcome.STRICTLY_GREATER,
                lambda: oracle.compare(lot_a, lot_b),
            ),
            Claim("feasibility pattern", "A-feasible-B-infeasible", feasibility_values),
            Claim("mixed preference reverses", "strictly-less", mixed_reversal),
            Claim("independence checker", "violated", checker_verdict),
        ],
        artifacts={"oracle": oracle, "A": lot_a, "B": lot_b, "C": lot_c, "family": family},
    )


# ---------------------------------------------------------------------------
# Constrained comparisons: continuity failure
# ---------------------------------------------------------------------------

CMDP_CONTINUITY_R1 = {LL: 0.0, LR: 1.0, RL: 4.0, RR: 0.0}
CMDP_CONTINUITY_R2 = {LL: -2.0, LR: 1.0, RL: 3.0, RR: -1.0}


def cmdp_continuity_case() -> GalleryCase:
    """No mixing weight makes the middle option break even; infeasibility is absorbing."""
    oracle = CmdpOracle(CMDP_CONTINUITY_R1, CMDP_CONTINUITY_R2, CMDP_ALPHABET)
    half = Rational(1, 2)
    lot_a = mix(half, Lottery.dirac(RL), Lottery.dirac(RR))
    lot_b = mix(half, Lottery.dirac(LR), Lottery.dirac(RR))
    lot_c = Lottery.dirac(RR)

    def ordering():
        v1 = oracle.compare(lot_a, lot_b)
        v2 = oracle.compare(lot_b, lot_c)
        if (v1 is PreferenceOutcome.STRICTLY_GREATER
                and v2 is PreferenceOutcome.STRICTLY_GREATER):
            return "A>B>C", {}
        return f"{v1.value}/{v2.value}", {}

    def continuity_verdict():
        report = check_continuity(oracle, (lot_a, lot_b, lot_c), eps_p=1e-4)
        details = {}
        if report.violated:
            details = {"resolution_limited": report.witness.get("resolution_limited"),
                       "bracket": report.details.get("bracket")}
        return report.status, details

    def infeasibility_certificate():
        # Expected constraint payoff of p*B + (1-p)*C is linear in p with
        # endpoints E[r2](C) = -1 and E[r2](B) = 0, hence negative on every
        # p in [0, 1): each such mixture is infeasible while A is feasible.
        r2_b = Rational(0)
        r2_c = Rational(-1)
        samples = {}
        for num, den in ((1, 4), (1, 2), (3, 4)):
            p = Rational(num, den)
            value = p * r2_b + (Rational(1) - p) * r2_c
            samples[str(p)] = str(value)
        boundary_feasible = oracle.feasible(lot_b)
        ok = (
            samples == {"1/4": "-3/4", "1/2": "-1/2", "3/4": "-1/4"}
            and r2_b <= Rational(0)
            and r2_c < Rational(0)
            and boundary_feasible
        )
        return ("every-interior-mixture-infeasible" if ok else "unexpected"), {
            "E_r2_mixture": "p*0 + (1-p)*(-1) = -(1-p)",
            "samples": samples,
            "p=1 boundary": "mixture equals B, feasible",
        }

    def paper_role_scan():
        # the alternative role assignment: indifference between A and p*B+(1-p)*C
        result = find_break_even(oracle, lot_a, lot_b, lot_c, eps_p=1e-4)
        if not result.found and result.constant_strict == "strictly-less":
            return "constant-strict-no-break-even", {}
        return "unexpected", {"found": result.found, "pattern": result.constant_strict}

    return GalleryCase(
        name="cmdp-continuity",
        description=(
            "A feasible top option, a boundary-feasible middle, and an infeasible "
            "floor; mixtures of middle and floor never become indifferent to the top."
        ),
        provenance=(
            "Second payoff table, constructed separately: one table cannot make the "
            "slack history both positively and negatively constrained."
        ),
        claims=[
            Claim("preference ordering", "A>B>C", ordering),
            Claim("continuity checker on (A,B,C)", "violated", continuity_verdict),
            Claim(
                "analytic infeasibility certificate",
                "every-interior-mixture-infeasible",
                infeasibility_certificate,
            ),
            Claim(
                "no break-even against A (alternative roles)",
                "constant-strict-no-break-even",
                paper_role_scan,
            ),
        ],
        artifacts={"oracle": oracle, "A": lot_a, "B": lot_b, "C": lot_c},
    )


# ---------------------------------------------------------------------------
# Risk: variance penalties break independence and the design pipeline
# ---------------------------------------------------------------------------


def _risk_bundle(lam: float):
    alphabet = Alphabet(("r0", "r1"), ("p0", "p1"))
    rewards = {Transition(o, a): (1.0 if o == "r1" else 0.0)
               for o in ("r0", "r1") for a in ("p0", "p1")}
    oracle = RiskOracle(rewards, lam, alphabet)
    half = Rational(1, 2)
    # second-step transition after choosing p_k lands on observation r_k
    opposite = mix(
        half,
        Lottery.dirac(History.of(Transition("r0", "p1"), Transition("r1", "p0"))),
        Lottery.dirac(History.of(Transition("r1", "p0"), Transition("r0", "p0"))),
    )
    always_high = mix(
        half,
        Lottery.dirac(History.of(Transition("r0", "p1"), Transition("r1", "p0"))),
        Lottery.dirac(History.of(Transition("r1", "p1"), Transition("r1", "p0"))),
    )
    return alphabet, rewards, oracle, opposite, always_high


def risk_case(lam: float = 3.0) -> GalleryCase:
    """Mean minus lam * variance of total return; nonlinear in mixtures unless lam = 0."""
    if lam < 0:
        raise ValueError("risk penalty lam must be nonnegative")
    alphabet, rewards, oracle, opposite, always_high = _risk_bundle(lam)
    two_step = [History.of(Transition(o1, a1), Transition(o2, "p0"))
                for o1 in ("r0", "r1") for a1 in ("p0", "p1") for o2 in ("r0", "r1")]
    family = generate_family(two_step[:4], q=2, max_size=10)

    claims: List[Claim] = []

    def j_values():
        j_opp = oracle.utility(opposite)
        j_always = oracle.utility(always_high)
        expected_always = 1.5 - 0.25 * lam
        if abs(j_opp - 1.0) < 1e-12 and abs(j_always - expected_always) < 1e-12:
            return "J-values-match", {"J_opposite": j_opp, "J_always_high": j_always}
        return "unexpected", {"J_opposite": j_opp, "J_always_high": j_always}

    claims.append(Claim("penalized values", "J-values-match", j_values))

    if lam > 2:
        claims.append(
            _verdict_claim(
                "opposite-return lottery preferred",
                PreferenceOutcome.STRICTLY_GREATER,
                lambda: oracle.compare(opposite, always_high),
            )
        )
        claims.append(
            Claim(
                "independence checker",
                "violated",
                lambda: (check_independence(oracle, family).status, {}),
            )
        )

        def design_abort():
            try:
                design_reward(oracle, alphabet, eps=1e-6)
            except DesignAbortError as exc:
                return "design-aborted", {"reason": str(exc)[:120]}
            return "design-completed", {}

        claims.append(Claim("design pipeline", "design-aborted", design_abort))
    elif lam == 0:
        claims.append(
            _verdict_claim(
                "higher-mean lottery preferred",
                PreferenceOutcome.STRICTLY_LESS,
                lambda: oracle.compare(opposite, always_high),
            )
        )
        claims.append(
            Claim(
                "independence checker",
                "passed-on-family",
                lambda: (check_independence(oracle, family).status, {}),
            )
        )
        claims.append(
            Claim(
                "transitivity checker",
                "passed-on-family",
                lambda: (check_transitivity(oracle, family).status, {}),
            )
        )
        claims.append(
            Claim(
                "prefix-invariance checker",
                "passed-on-family",
                lambda: (check_memoryless(oracle, family).status, {}),
            )
        )

        def design_completes():
            try:
                spec, diag = design_reward(oracle, alphabet, eps=1e-6)
            except DesignAbortError as exc:
                return "design-aborted", {"reason": str(exc)[:120]}
            gammas = sorted(set(round(g, 6) for g in spec.discounts.values()))
            return "design-completed", {"recovered_discounts": gammas}

        claims.append(Claim("design pipeline", "design-completed", design_completes))

    return GalleryCase(
        name="risk",
        description=(
            "Two-step returns where uncontrolled randomness fixes the first payoff; a "
            "variance penalty larger than 2 prefers hedging to the higher mean and "
            "breaks mixture linearity."
        ),
        provenance=(
            "Rewards fixed to 0/1 per step; the preference flip point lam = 2 follows "
            "from 1.5 - 0.25*lam = 1."
        ),
        claims=claims,
        artifacts={
            "oracle": oracle,
            "opposite": opposite,
            "always_high": always_high,
            "alphabet": alphabet,
            "lam": lam,
        },
    )


GALLERY_CASES: Dict[str, Callable[[], GalleryCase]] = {
    "steady-state": steady_state_case,
    "entailment": entailment_case,
    "cmdp-independence": cmdp_independence_case,
    "cmdp-continuity": cmdp_continuity_case,
    "risk": lambda: risk_case(3.0),
    "risk-neutral": lambda: risk_case(0.0),
}


def run_case(name: str) -> CaseResult:
    try:
        factory = GALLERY_CASES[name]
    except KeyError:
        raise ValueError(f"unknown gallery case {name!r}; known: {sorted(GALLERY_CASES)}")
    return factory().run()


def run_all() -> List[CaseResult]:
    return [run_case(name) for name in GALLERY_CASES]
