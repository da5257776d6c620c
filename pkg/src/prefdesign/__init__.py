"""prefdesign: Markov reward synthesis from preference relations.

The toolkit turns a preference relation over lotteries of observation-
action histories into a per-transition reward and discount, falsifies the
rationality axioms the construction relies on, evaluates policies in
general stochastic environments, and ships a counterexample gallery plus
an interactive elicitation service for human designers.
"""

from .histories import Alphabet, History, Transition, EMPTY_HISTORY, AlphabetMismatchError
from .lotteries import Lottery, mix, prepend, prepend_history, redirect
from .rationals import Rational, RationalOverflowError
from .oracles import (
    CmdpOracle,
    MarkovOracle,
    PreferenceOracle,
    PreferenceOutcome,
    RewardSpec,
    RiskOracle,
    TableOracle,
    UnansweredQueryError,
    UtilityOracle,
    UtilityOracleConfig,
    UtilityTableOracle,
    build_oracle,
    compare_by_utility,
    lottery_utility,
    markov_utility,
)
from .families import LotteryFamily, default_family, default_p_grid, generate_family
from .axioms import (
    AxiomReport,
    check_additivity,
    check_completeness,
    check_continuity,
    check_independence,
    check_memoryless,
    check_sequential_consistency,
    check_temporal_gamma_indifference,
    check_transitivity,
    replay_witness,
)
from .design import (
    DesignAbortError,
    DesignDiagnostics,
    DesignError,
    ProbeSet,
    ScaleFactors,
    design_reward,
    indifference_point,
    pref_scale,
    pref_sort,
)
from .policysim import (
    BudgetExceededError,
    DominanceVerdict,
    ScriptedEnv,
    ScriptedPolicy,
    TabularEnv,
    TabularPolicy,
    check_eventual_dominance,
    compare_policies_by_goal,
    compare_policies_by_reward,
    estimate_value,
    n_step_value,
    prediscounted_stream,
    rollout_distribution,
    sample_histories,
)
from .gallery import GALLERY_CASES, run_all, run_case
from .session import Session, SessionStore

__version__ = "0.1.0"
