"""Command-line surface: design, check, simulate, gallery, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .axioms import (
    check_additivity,
    check_completeness,
    check_continuity,
    check_independence,
    check_memoryless,
    check_sequential_consistency,
    check_temporal_gamma_indifference,
    check_transitivity,
)
from .axioms import AxiomPreconditionError
from .design import DesignAbortError, DesignError, design_reward, pref_sort
from .oracles import UnansweredQueryError
from .families import default_family
from .gallery import GALLERY_CASES, run_all, run_case
from .histories import History
from .oracles import build_oracle, oracle_from_obj, reward_spec_from_obj, reward_spec_to_obj
from .policysim import (
    compare_policies_by_reward,
    env_from_obj,
    estimate_value,
    n_step_value,
    policy_from_obj,
)
from .serialize import canonical_json

AXIOM_IDS = (
    "completeness",
    "transitivity",
    "independence",
    "continuity",
    "temporal-gamma-indifference",
    "memoryless",
    "additivity",
    "sequential-consistency",
)


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _load_reward_spec(path: str):
    # accept both a bare reward spec and the design command's output document
    obj = _load_json(path)
    if "reward_spec" in obj:
        obj = obj["reward_spec"]
    return reward_spec_from_obj(obj)


def _cmd_design(args) -> int:
    config = oracle_from_obj(_load_json(args.oracle))
    oracle = build_oracle(config)
    reference = None
    if args.reference:
        reference = _load_reward_spec(args.reference)
    try:
        spec, diagnostics = design_reward(oracle, config.alphabet, args.epsilon, reference)
    except DesignAbortError as exc:
        print(f"design aborted: {exc}", file=sys.stderr)
        print(canonical_json({"aborted": True, "witness": exc.witness}), file=sys.stderr)
        return 2
    out = {
        "reward_spec": reward_spec_to_obj(spec),
        "diagnostics": diagnostics.to_obj(),
    }
    text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out} ({diagnostics.comparisons} comparisons)")
    else:
        print(text)
    return 0


def _family_from_arg(arg: Optional[str], oracle_config) -> "LotteryFamily":
    params = {}
    if arg:
        if Path(arg).exists():
            params = _load_json(arg)
        else:
            params = json.loads(arg)
    return default_family(
        oracle_config.alphabet,
        max_len=int(params.get("max_len", 2)),
        q=int(params.get("q", 4)),
        max_size=params.get("max_size", 64),
        seed=int(params.get("seed", 0)),
    )


def _cmd_check(args) -> int:
    config = oracle_from_obj(_load_json(args.oracle))
    oracle = build_oracle(config)
    family = _family_from_arg(args.family, config)
    wanted = AXIOM_IDS if args.axiom == "all" else (args.axiom,)
    reports = []
    skipped = []
    for axiom in wanted:
        try:
            report = _run_one_check(axiom, oracle, config, family, args)
        except KeyError:
            print(f"unknown axiom {axiom!r}; known: {', '.join(AXIOM_IDS)}", file=sys.stderr)
            return 2
        except (AxiomPreconditionError, DesignError, UnansweredQueryError) as exc:
            print(f"{axiom}: not-checkable ({exc})")
            skipped.append(axiom)
            continue
        reports.append(report)
        print(f"{report.axiom}: {report.status} ({report.queries_used} queries)")
        if report.violated:
            print(json.dumps(report.witness, indent=2, sort_keys=True))
    if args.out:
        Path(args.out).write_text(
            json.dumps([r.to_obj() for r in reports], indent=2, sort_keys=True) + "\n"
        )
    return 1 if any(r.violated for r in reports) else 0


def _run_one_check(axiom, oracle, config, family, args):
    if axiom == "completeness":
        return check_completeness(oracle, family)
    if axiom == "transitivity":
        return check_transitivity(oracle, family, max_instances=args.max_instances)
    if axiom == "independence":
        return check_independence(oracle, family, max_instances=args.max_instances)
    if axiom == "continuity":
        sample = list(family.lotteries[:16])
        ordered = pref_sort(oracle, sample)
        triple = (ordered[-1], ordered[len(ordered) // 2], ordered[0])
        return check_continuity(oracle, triple, eps_p=args.eps_p)
    if axiom == "temporal-gamma-indifference":
        return check_temporal_gamma_indifference(
            oracle, family, solve=True,
            max_gamma=None if args.relaxed else 1.0,
            max_instances=args.max_instances,
        )
    if axiom == "memoryless":
        return check_memoryless(oracle, family, max_instances=args.max_instances)
    if axiom == "additivity":
        return check_additivity(oracle, family, max_instances=args.max_instances)
    if axiom == "sequential-consistency":
        prefixes = [History.of(t) for t in config.alphabet.transitions]
        return check_sequential_consistency(
            oracle, family, family, prefixes, max_instances=args.max_instances
        )
    raise KeyError(axiom)


def _cmd_simulate(args) -> int:
    env = env_from_obj(_load_json(args.env))
    policy = policy_from_obj(_load_json(args.policy))
    spec = _load_reward_spec(args.spec)
    if args.policy2:
        policy2 = policy_from_obj(_load_json(args.policy2))
        verdict = compare_policies_by_reward(spec, env, policy, policy2, n_max=args.nmax)
        print(json.dumps(verdict.to_obj(), indent=2, sort_keys=True))
        return 0
    if args.samples:
        # demo-grade Monte Carlo estimates; certification uses the exact paths
        print(f"{'n':>4}  {'estimate':>14}  {'stderr':>12}")
        for n in range(1, args.nmax + 1):
            mean, err = estimate_value(env, policy, spec, n, args.samples, args.seed)
            print(f"{n:>4}  {mean:>14.9f}  {err:>12.3e}")
        return 0
    print(f"{'n':>4}  {'V_n':>14}")
    for n in range(1, args.nmax + 1):
        print(f"{n:>4}  {n_step_value(env, policy, spec, n):>14.9f}")
    return 0


def _cmd_gallery(args) -> int:
    try:
        results = run_all() if args.case == "all" else [run_case(args.case)]
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    ok = True
    for result in results:
        for line in result.lines:
            print(line)
        ok = ok and result.ok
    print("gallery:", "all claims reproduced" if ok else "CLAIM MISMATCHES FOUND")
    return 0 if ok else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .session import SessionStore

    app = create_app(SessionStore(args.data_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefdesign",
        description=(
            "Synthesize Markov rewards and transition-dependent discounts from "
            "preference relations, and falsify the axioms that make it possible."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="run the reward/discount synthesis pipeline")
    p_design.add_argument("--oracle", required=True, help="oracle config JSON file")
    p_design.add_argument("--epsilon", type=float, default=1e-6)
    p_design.add_argument("--out", help="write the reward spec JSON here")
    p_design.add_argument("--reference", help="reference spec JSON for scale reporting")
    p_design.set_defaults(fn=_cmd_design)

    p_check = sub.add_parser("check", help="run axiom falsifiers against an oracle")
    p_check.add_argument("--axiom", default="all", help=f"one of {', '.join(AXIOM_IDS)} or all")
    p_check.add_argument("--oracle", required=True)
    p_check.add_argument("--family", help="family spec JSON (inline or file): max_len, q, max_size, seed")
    p_check.add_argument("--eps-p", type=float, default=1e-4)
    p_check.add_argument("--max-instances", type=int, default=20000)
    p_check.add_argument("--relaxed", action="store_true",
                         help="solve discounts over all nonnegative reals instead of [0,1]")
    p_check.add_argument("--out", help="write full reports JSON here")
    p_check.set_defaults(fn=_cmd_check)

    p_sim = sub.add_parser("simulate", help="evaluate policies under a reward spec")
    p_sim.add_argument("--env", required=True)
    p_sim.add_argument("--policy", required=True)
    p_sim.add_argument("--policy2", help="second policy for a dominance verdict")
    p_sim.add_argument("--spec", required=True)
    p_sim.add_argument("--nmax", type=int, default=8)
    p_sim.add_argument("--samples", type=int,
                       help="Monte Carlo sample count (demo estimates with stderr)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(fn=_cmd_simulate)

    p_gallery = sub.add_parser("gallery", help="run the self-verifying counterexample gallery")
    p_gallery.add_argument("case", nargs="?", default="all",
                           help=f"one of {', '.join(sorted(GALLERY_CASES))} or all")
    p_gallery.set_defaults(fn=_cmd_gallery)

    p_serve = sub.add_parser("serve", help="serve the elicitation session API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8423)
    p_serve.add_argument("--data-dir", default="./sessions")
    p_serve.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
