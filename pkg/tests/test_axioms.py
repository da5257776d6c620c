import pytest

from prefdesign.axioms import (
    AxiomPreconditionError,
    check_additivity,
    check_completeness,
    check_continuity,
    check_independence,
    check_memoryless,
    check_sequential_consistency,
    check_temporal_gamma_indifference,
    check_transitivity,
    find_break_even,
    find_preference_cycle,
    replay_witness,
)
from prefdesign.families import LotteryFamily, generate_family
from prefdesign.gallery import (
    CMDP_ALPHABET,
    CMDP_INDEPENDENCE_R1,
    CMDP_INDEPENDENCE_R2,
    LL,
    LR,
    RL,
    RR,
    entailment_case,
)
from prefdesign.histories import Alphabet, EMPTY_HISTORY, History, Transition
from prefdesign.lotteries import Lottery, mix
from prefdesign.oracles import (
    CmdpOracle,
    MarkovOracle,
    PreferenceOutcome,
    RewardSpec,
    RiskOracle,
    TableOracle,
    UtilityTableOracle,
    markov_utility,
)
from prefdesign.rationals import Rational

AB = Alphabet(("x",), ("a", "b"))
TA, TB = AB.transitions
half = Rational(1, 2)

G1 = RewardSpec(rewards={TA: 1.0, TB: 0.0}, discounts={TA: 0.5, TB: 1.0})
FLAT = RewardSpec(rewards={TA: 2.0, TB: -1.0}, discounts={TA: 1.0, TB: 1.0})

GREATER = PreferenceOutcome.STRICTLY_GREATER
LESS = PreferenceOutcome.STRICTLY_LESS
INDIFF = PreferenceOutcome.INDIFFERENT


def small_family(q=2, max_len=2, max_size=10, seed=0):
    return generate_family(AB.histories_up_to(max_len), q=q, max_size=max_size, seed=seed)


class TestCompleteness:
    def test_markov_passes(self):
        report = check_completeness(MarkovOracle(G1), small_family())
        assert report.status == "passed-on-family"
        assert report.queries_used > 0

    def test_single_lottery_family_passes(self):
        family = LotteryFamily((EMPTY_HISTORY,), 1, (Lottery.dirac(EMPTY_HISTORY),), True, 1)
        assert check_completeness(MarkovOracle(G1), family).status == "passed-on-family"

    def test_table_with_missing_pair_violated(self):
        a, b = Lottery.dirac(History.of(TA)), Lottery.dirac(History.of(TB))
        c = Lottery.dirac(History.of(TA, TA))
        oracle = TableOracle([(a, b, GREATER)], AB)
        family = LotteryFamily((History.of(TA),), 1, (a, b, c), True, 3)
        report = check_completeness(oracle, family)
        assert report.violated
        assert report.witness["reason"] == "no verdict for this pair"

    def test_query_count_bounded_by_pairs(self):
        family = small_family()
        oracle = MarkovOracle(G1)
        report = check_completeness(oracle, family)
        n = family.size
        assert report.queries_used <= n * (n + 1) // 2


class TestTransitivity:
    def test_markov_passes(self):
        assert check_transitivity(MarkovOracle(G1), small_family()).status == "passed-on-family"

    def test_hand_built_cycle_violated(self):
        a, b, c = (Lottery.dirac(h) for h in (History.of(TA), History.of(TB),
                                              History.of(TA, TA)))
        oracle = TableOracle(
            [(a, b, GREATER), (b, c, GREATER), (c, a, GREATER)], AB
        )
        family = LotteryFamily((History.of(TA),), 1, (a, b, c), True, 3)
        report = check_transitivity(oracle, family)
        assert report.violated
        assert len(report.witness["triple"]) == 3
        assert replay_witness(oracle, report)

    def test_recorded_session_answers_replay_as_violation(self, tmp_path):
        """A session log holding a cycle reproduces it through the checker."""
        from harness import G1_ALPHABET
        from prefdesign.session import SessionStore

        store = SessionStore(tmp_path)
        session = store.create(G1_ALPHABET, 1e-6)
        for _ in range(4):
            session = store.submit_answer(session.id, INDIFF)
        session = store.submit_answer(session.id, GREATER)
        assert session.status == "inconsistent"
        # replay the logged comparisons (including the rejected one) as a table
        from prefdesign.design import design_reward
        from prefdesign.session import _ReplayOracle

        answers = [r.verdict for r in session.records]
        replay = _ReplayOracle(G1_ALPHABET, answers, None)
        try:
            design_reward(replay, G1_ALPHABET, 1e-6)
        except Exception:
            pass
        entries = [
            (left, right, verdict)
            for (left, right), verdict in zip(replay.queries, answers)
        ]
        oracle = TableOracle(entries, G1_ALPHABET)
        involved = []
        for left, right, _ in entries:
            for lot in (left, right):
                if lot not in involved:
                    involved.append(lot)
        family = LotteryFamily((EMPTY_HISTORY,), 1, tuple(involved), False, len(involved))
        report = check_transitivity(oracle, family)
        assert report.violated
        assert replay_witness(oracle, report)


class TestIndependence:
    def test_markov_passes(self):
        report = check_independence(MarkovOracle(G1), small_family(), max_instances=4000)
        assert report.status == "passed-on-family"

    def test_cmdp_violated_with_replay(self):
        oracle = CmdpOracle(CMDP_INDEPENDENCE_R1, CMDP_INDEPENDENCE_R2, CMDP_ALPHABET)
        lots = (
            mix(half, Lottery.dirac(RL), Lottery.dirac(RR)),
            Lottery.dirac(LL),
            Lottery.dirac(RR),
        )
        family = LotteryFamily((LL, LR, RL, RR), 2, lots, False, 10)
        report = check_independence(oracle, family, p_grid=[half])
        assert report.violated
        assert replay_witness(oracle, report)

    def test_risk_violated(self):
        rewards = {TA: 1.0, TB: 0.0}
        oracle = RiskOracle(rewards, 3.0, AB)
        report = check_independence(oracle, small_family(q=2, max_len=2, max_size=8))
        assert report.violated
        assert replay_witness(oracle, report)

    def test_bad_grid_rejected(self):
        with pytest.raises(ValueError):
            check_independence(MarkovOracle(G1), small_family(), p_grid=[Rational(1)])


class TestContinuity:
    def test_markov_break_even_matches_closed_form(self):
        """Linear utility forces p* = (u(B)-u(C)) / (u(A)-u(C)) = 2/3 here."""
        oracle = MarkovOracle(G1)
        a = Lottery.dirac(History.of(TA, TA))  # u = 1.5
        b = Lottery.dirac(History.of(TA))      # u = 1.0
        c = Lottery.dirac(EMPTY_HISTORY)       # u = 0.0
        report = check_continuity(oracle, (a, b, c), eps_p=1e-4)
        assert report.status == "passed-on-family"
        num, den = report.details["break_even"].split("/")
        assert abs(int(num) / int(den) - 2 / 3) < 1e-4

    def test_degenerate_indifference_accepts_p1(self):
        oracle = MarkovOracle(RewardSpec(rewards={TA: 0.0, TB: 0.0},
                                         discounts={TA: 1.0, TB: 1.0}))
        lot = Lottery.dirac(History.of(TA))
        report = check_continuity(oracle, (lot, lot, lot))
        assert report.status == "passed-on-family"
        assert report.details["break_even"] == "1"

    def test_precondition_failure_raises(self):
        oracle = MarkovOracle(G1)
        a = Lottery.dirac(EMPTY_HISTORY)
        b = Lottery.dirac(History.of(TA))
        with pytest.raises(AxiomPreconditionError):
            check_continuity(oracle, (a, b, a))

    def test_cmdp_jump_has_no_break_even(self):
        from prefdesign.gallery import CMDP_CONTINUITY_R1, CMDP_CONTINUITY_R2

        oracle = CmdpOracle(CMDP_CONTINUITY_R1, CMDP_CONTINUITY_R2, CMDP_ALPHABET)
        a = mix(half, Lottery.dirac(RL), Lottery.dirac(RR))
        b = mix(half, Lottery.dirac(LR), Lottery.dirac(RR))
        c = Lottery.dirac(RR)
        report = check_continuity(oracle, (a, b, c), eps_p=1e-4)
        assert report.violated
        assert report.witness["resolution_limited"]
        assert report.details["bracket_width"] <= 1e-4

    def test_constant_strict_scan_cannot_bracket(self):
        from prefdesign.gallery import CMDP_CONTINUITY_R1, CMDP_CONTINUITY_R2

        oracle = CmdpOracle(CMDP_CONTINUITY_R1, CMDP_CONTINUITY_R2, CMDP_ALPHABET)
        a = mix(half, Lottery.dirac(RL), Lottery.dirac(RR))
        b = mix(half, Lottery.dirac(LR), Lottery.dirac(RR))
        c = Lottery.dirac(RR)
        result = find_break_even(oracle, a, b, c)  # target A vs mixtures of B and C
        assert not result.found
        assert result.constant_strict == "strictly-less"


class TestTemporalGammaIndifference:
    def test_true_gamma_candidate_passes(self):
        oracle = MarkovOracle(G1)
        family = small_family(q=2, max_len=2, max_size=8)
        report = check_temporal_gamma_indifference(
            oracle, family, gamma={TA: Rational(1, 2), TB: Rational(1)}
        )
        assert report.status == "passed-on-family"
        assert report.details["instances_checked"] > 0

    def test_unit_gamma_swap_instance(self):
        """One-half mixtures are indifferent to swapping which side is prefixed."""
        oracle = MarkovOracle(FLAT)
        h1, h2 = History.of(TA), History.of(TB)
        left = mix(half, Lottery.dirac(h1.prepend(TA)), Lottery.dirac(h2))
        right = mix(half, Lottery.dirac(h2.prepend(TA)), Lottery.dirac(h1))
        assert oracle.compare(left, right) is INDIFF

    def test_wrong_gamma_candidate_violated(self):
        oracle = MarkovOracle(G1)
        family = small_family(q=2, max_len=1, max_size=6)
        report = check_temporal_gamma_indifference(
            oracle, family, gamma={TA: Rational(9, 10), TB: Rational(1)}
        )
        assert report.violated
        assert replay_witness(oracle, report)

    def test_negative_candidate_rejected(self):
        with pytest.raises(ValueError):
            check_temporal_gamma_indifference(
                MarkovOracle(G1), small_family(), gamma={TA: -1, TB: Rational(1)}
            )

    def test_solve_recovers_spec_gamma(self):
        oracle = MarkovOracle(G1)
        family = small_family(q=2, max_len=2, max_size=8)
        report = check_temporal_gamma_indifference(oracle, family, solve=True)
        assert report.status == "passed-on-family"
        solved = report.details["solved_gamma"]
        assert abs(solved[TA.label] - 0.5) < 1e-6
        assert abs(solved[TB.label] - 1.0) < 1e-6

    def test_relaxed_oracle_range_behaviour(self):
        spec = RewardSpec(rewards={TA: 1.0, TB: 0.0}, discounts={TA: 1.3, TB: 1.0},
                          relaxed=True)
        oracle = MarkovOracle(spec)
        family = small_family(q=2, max_len=2, max_size=8)
        restricted = check_temporal_gamma_indifference(oracle, family, solve=True,
                                                       max_gamma=1.0)
        assert restricted.violated
        assert restricted.witness["range_limited"]
        assert restricted.calls and replay_witness(oracle, restricted)
        unrestricted = check_temporal_gamma_indifference(oracle, family, solve=True,
                                                         max_gamma=None)
        assert unrestricted.status == "passed-on-family"
        assert abs(unrestricted.details["solved_gamma"][TA.label] - 1.3) < 1e-6

    def test_entailment_table_unsatisfiable(self):
        case = entailment_case()
        oracle = case.artifacts["oracle"]
        family = case.artifacts["family"]
        t1, t2 = case.artifacts["t1"], case.artifacts["t2"]
        report = check_temporal_gamma_indifference(
            oracle, family, solve=True, max_gamma=None, transitions=[t1, t2]
        )
        assert report.violated
        assert report.witness["unsatisfiable"]
        assert replay_witness(oracle, report)


class TestMemoryless:
    def test_relaxed_markov_passes(self):
        spec = RewardSpec(rewards={TA: 1.0, TB: 0.0}, discounts={TA: 1.3, TB: 1.0},
                          relaxed=True)
        report = check_memoryless(MarkovOracle(spec), small_family(q=2, max_len=2, max_size=8))
        assert report.status == "passed-on-family"

    def test_entailment_table_violated_with_expected_witness(self):
        case = entailment_case()
        report = check_memoryless(
            case.artifacts["oracle"], case.artifacts["family"],
            transitions=[case.artifacts["t1"], case.artifacts["t2"]],
        )
        assert report.violated
        assert report.witness["transition"] == ["s1", "a1"]
        assert report.witness["base_verdict"] == "indifferent"
        assert report.witness["prepended_verdict"] == "strictly-greater"

    def test_zero_discount_erases_differences(self):
        """gamma(t) = 0 collapses prepended continuations while bases stay strict."""
        spec = RewardSpec(rewards={TA: 1.0, TB: 0.0}, discounts={TA: 0.0, TB: 1.0})
        oracle = MarkovOracle(spec)
        report = check_memoryless(oracle, small_family(q=2, max_len=1, max_size=6))
        assert report.violated
        assert report.witness["prepended_verdict"] == "indifferent"
        assert replay_witness(oracle, report)


class TestAdditivity:
    def test_unit_discount_passes(self):
        report = check_additivity(
            MarkovOracle(FLAT), small_family(q=2, max_len=1, max_size=6),
            max_instances=4000,
        )
        assert report.status == "passed-on-family"

    def test_half_discount_violated(self):
        report = check_additivity(
            MarkovOracle(G1), small_family(q=4, max_len=1, max_size=15),
            max_instances=8000,
        )
        assert report.violated
        assert replay_witness(MarkovOracle(G1), report)

    def test_identical_prefixes_trivially_consistent(self):
        oracle = MarkovOracle(G1)
        a = Lottery.dirac(History.of(TA))
        c = Lottery.dirac(History.of(TB))
        h = History.of(TA)
        from prefdesign.lotteries import prepend_history

        lhs = mix(half, prepend_history(h, a), c)
        assert oracle.compare(lhs, lhs) is INDIFF


class TestSequentialConsistency:
    def continuation_family(self):
        singles = (History.of(Transition("s", "L")), History.of(Transition("s", "R")))
        lots = (
            Lottery.dirac(singles[0]),
            Lottery.dirac(singles[1]),
            mix(half, Lottery.dirac(singles[0]), Lottery.dirac(singles[1])),
        )
        return LotteryFamily(singles, 2, lots, False, 3)

    def context_family(self):
        lots = (
            mix(half, Lottery.dirac(LL), Lottery.dirac(RR)),
            Lottery.dirac(RR),
            mix(half, Lottery.dirac(RL), Lottery.dirac(RR)),
        )
        return LotteryFamily((LL, LR, RL, RR), 2, lots, False, 10)

    def prefixes(self):
        return [History.of(Transition("s", "L")), History.of(Transition("s", "R"))]

    def test_markov_passes(self):
        family = small_family(q=2, max_len=1, max_size=6)
        contexts = small_family(q=2, max_len=2, max_size=8, seed=3)
        prefixes = [History.of(TA), History.of(TB)]
        report = check_sequential_consistency(
            MarkovOracle(G1), contexts, family, prefixes, max_instances=4000
        )
        assert report.status == "passed-on-family"

    def test_cmdp_violated(self):
        oracle = CmdpOracle(CMDP_INDEPENDENCE_R1, CMDP_INDEPENDENCE_R2, CMDP_ALPHABET)
        report = check_sequential_consistency(
            oracle, self.context_family(), self.continuation_family(), self.prefixes()
        )
        assert report.violated
        assert replay_witness(oracle, report)

    def test_zero_mass_contexts_skipped(self):
        oracle = CmdpOracle(CMDP_INDEPENDENCE_R1, CMDP_INDEPENDENCE_R2, CMDP_ALPHABET)
        contexts = LotteryFamily((LL,), 1, (Lottery.dirac(LL),), True, 1)
        report = check_sequential_consistency(
            oracle, contexts, self.continuation_family(),
            [History.of(Transition("s", "R"))],
        )
        assert report.details["vacuous_skipped"] > 0


class TestMemorylessSolveEquivalence:
    """Prefix-invariance holds exactly when a nonnegative discount solve succeeds.

    The equivalence presupposes the four ordering axioms and strictly
    positive discounts, so the suite below stays inside that envelope
    (variance-penalized relations break the ordering axioms and zero
    discounts break strictness; both are covered elsewhere).
    """

    def suite(self):
        case = entailment_case()
        affine_table = {
            h: 3.0 + 2.0 * markov_utility(h, G1) for h in AB.histories_up_to(2)
        }
        return [
            (MarkovOracle(G1), small_family(q=2, max_len=2, max_size=8), None),
            (MarkovOracle(FLAT), small_family(q=2, max_len=2, max_size=8), None),
            (
                MarkovOracle(
                    RewardSpec(rewards={TA: 1.0, TB: 0.0},
                               discounts={TA: 1.3, TB: 1.0}, relaxed=True)
                ),
                small_family(q=2, max_len=2, max_size=8),
                None,
            ),
            (UtilityTableOracle(affine_table, AB),
             small_family(q=2, max_len=1, max_size=6), None),
            (case.artifacts["oracle"], case.artifacts["family"],
             [case.artifacts["t1"], case.artifacts["t2"]]),
        ]

    def test_biconditional(self):
        for oracle, family, transitions in self.suite():
            memoryless = check_memoryless(oracle, family, transitions=transitions)
            solve = check_temporal_gamma_indifference(
                oracle, family, solve=True, max_gamma=None, transitions=transitions
            )
            assert memoryless.violated == solve.violated, (
                f"{type(oracle).__name__}: memoryless={memoryless.status} "
                f"solve={solve.status}"
            )


class TestQueryAccounting:
    """Reported query counts stay within the declared enumeration sizes."""

    def test_independence_queries_bounded(self):
        family = small_family(q=2, max_len=1, max_size=6)
        oracle = MarkovOracle(G1)
        report = check_independence(oracle, family, max_instances=4000)
        n = family.size
        pairs = n * (n - 1) // 2
        grid = len(__import__("prefdesign.families", fromlist=["default_p_grid"]).default_p_grid())
        assert report.queries_used <= pairs + pairs * n * grid
        assert report.queries_used == oracle.query_count

    def test_memoryless_queries_bounded(self):
        family = small_family(q=2, max_len=1, max_size=6)
        oracle = MarkovOracle(G1)
        report = check_memoryless(oracle, family)
        n = family.size
        pairs = n * (n - 1) // 2
        assert report.queries_used <= 2 * pairs * len(oracle.alphabet.transitions)

    def test_no_hidden_queries_in_reports(self):
        family = small_family(q=2, max_len=1, max_size=6)
        for checker in (check_completeness, check_transitivity):
            oracle = MarkovOracle(G1)
            report = checker(oracle, family)
            assert report.queries_used == oracle.query_count


class TestCycleFinder:
    def payloadize(self, triples):
        return [(a, b, v, f"{a}?{b}") for a, b, v in triples]

    def test_direct_cycle(self):
        records = self.payloadize([
            ("A", "B", GREATER), ("B", "C", GREATER), ("C", "A", GREATER),
        ])
        cycle = find_preference_cycle(records)
        assert cycle is not None
        assert len(cycle) == 3

    def test_cycle_through_indifference(self):
        records = self.payloadize([
            ("A", "B", GREATER), ("B", "C", INDIFF), ("C", "A", GREATER),
        ])
        assert find_preference_cycle(records) is not None

    def test_strict_edge_inside_class(self):
        records = self.payloadize([("A", "B", INDIFF), ("A", "B", GREATER)])
        assert find_preference_cycle(records) is not None

    def test_consistent_answers_have_no_cycle(self):
        records = self.payloadize([
            ("A", "B", GREATER), ("B", "C", GREATER), ("A", "C", GREATER),
            ("C", "D", INDIFF),
        ])
        assert find_preference_cycle(records) is None
