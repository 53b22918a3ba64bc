"""Command-line entry point.

Exit codes: 0 success / conforms / winning, 1 negative result, 2 usage or
model error.  Every verb accepts ``--format json``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .conformance import EXISTENTIAL, LITERAL, alt_incl, bounded_alt_incl_sa, ioco_check
from .errors import ModelError
from .game_arena import Regime, arena_json, build_arena, render_arena, state_key
from .harness import POLICIES, SutAdapter, run_test, simulate_fair, sub_seed
from .sa_core import format_trace, load_sa_file
from .strategy_kernel import ReachabilityGoal, parse_strategy, render_strategy
from .synthesis import solve_reach, solve_reach_fair, solve_reach_if
from .testgen import (DEFAULT_CAP, gen_suite, load_testcase_file, render_testcase,
                      strategy_to_test, test_to_strategy, testcase_violation)

OK, NEGATIVE, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, text_lines, payload):
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for line in text_lines:
            print(line)


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _trace_json(rho):
    return list(rho)


def _goals(values):
    """--goal is repeatable and also takes comma-separated lists."""
    return sorted({q.strip() for v in values for q in v.split(",") if q.strip()})


# verbs ---------------------------------------------------------------------------

def cmd_validate(args):
    if args.file.endswith(".tc") or args.spec:
        t = load_testcase_file(args.file)
        if not args.spec:
            raise UsageError("validating a test case needs --spec")
        spec = load_sa_file(args.spec)
        problem = testcase_violation(t, spec, args.regime)
        payload = {"file": args.file, "kind": "testcase", "name": t.name,
                   "regime": Regime.parse(args.regime).value, "valid": problem is None}
        if problem is None:
            _emit(args, [f"valid test case {t.name} for {spec.name} under {Regime.parse(args.regime)}"],
                  payload)
            return OK
        payload.update(rule=problem.rule, message=str(problem),
                       witness=_trace_json(problem.witness) if problem.witness is not None else None)
        lines = [f"invalid test case {t.name}: {problem}"]
        if problem.witness is not None:
            lines.append(f"witness: {format_trace(problem.witness)}")
        _emit(args, lines, payload)
        return NEGATIVE
    sa = load_sa_file(args.file)
    mixed = sorted(sa.mixed_states())
    payload = {"file": args.file, "kind": "automaton", "name": sa.name, "valid": True,
               "states": len(sa.states), "inputs": sorted(sa.inputs),
               "outputs": sorted(sa.outputs), "mixed_states": mixed,
               "input_enabled": sa.is_input_enabled()}
    _emit(args, [f"valid automaton {sa.name}: {len(sa.states)} states, "
                 f"mixed states {{{', '.join(mixed)}}}"], payload)
    return OK


def cmd_arena(args):
    g = build_arena(load_sa_file(args.file), args.regime, args.reset)
    _emit(args, render_arena(g), arena_json(g))
    return OK


def cmd_synth(args):
    sa = load_sa_file(args.file)
    regime = Regime.parse(args.regime)
    goals = _goals(args.goal)
    goal = ReachabilityGoal(goals)
    g = build_arena(sa, regime, args.reset)
    payload = {"automaton": sa.name, "regime": regime.value, "goal": goals}
    if regime is Regime.IF:
        res = solve_reach_if(g, goal)
        fair = solve_reach_fair(g, goal)
        if fair != res.winning:
            raise ModelError("input-fair solvers disagree; please report this instance")
        payload["requires_reset"] = res.requires_reset
    else:
        res = solve_reach(g, goal)
    payload["winning"] = res.winning
    ranked = sorted(res.rank.items(), key=lambda kv: (kv[1], state_key(kv[0])))
    payload["rank"] = {str(s): r for s, r in ranked}
    lines = ["WINNING" if res.winning else "NOT-WINNING"]
    lines += [f"rank {s} {r}" for s, r in ranked]
    if res.winning:
        text = render_strategy(res.strategy.decisions)
        payload["strategy"] = {(" ".join(k) if k else "-"): v
                               for k, v in res.strategy.decisions.items()}
        lines.append("strategy:")
        lines += text.splitlines()
        if regime is Regime.IF:
            lines.append(f"requires-reset {'yes' if res.requires_reset else 'no'}")
        if args.strategy_out:
            with open(args.strategy_out, "w", encoding="utf-8") as fh:
                fh.write(text)
    _emit(args, lines, payload)
    return OK if res.winning else NEGATIVE


def cmd_gen_tests(args):
    spec = load_sa_file(args.file)
    suite = gen_suite(spec, args.regime, args.depth, args.cap)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for t in suite:
            with open(os.path.join(args.out, f"{t.name}.tc"), "w", encoding="utf-8") as fh:
                fh.write(render_testcase(t))
    payload = {"automaton": spec.name, "regime": Regime.parse(args.regime).value,
               "depth": args.depth, "count": len(suite),
               "tests": [{"name": t.name,
                          "pass_traces": sorted(map(list, t.pass_traces())),
                          "fail_traces": sorted(map(list, t.fail_traces()))} for t in suite]}
    _emit(args, [f"{len(suite)} tests"] + [t.name for t in suite], payload)
    return OK


def cmd_strat2test(args):
    spec = load_sa_file(args.spec)
    sigma = parse_strategy(_read_text(args.strategy))
    g = build_arena(spec, args.regime)
    sigma.check(g)
    t = strategy_to_test(sigma, spec, args.regime, name=args.name)
    text = render_testcase(t)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    _emit(args, text.splitlines(),
          {"name": t.name, "testcase": text,
           "pass_traces": sorted(map(list, t.pass_traces())),
           "fail_traces": sorted(map(list, t.fail_traces()))})
    return OK


def cmd_test2strat(args):
    spec = load_sa_file(args.spec)
    t = load_testcase_file(args.test)
    problem = testcase_violation(t, spec, args.regime)
    if problem is not None:
        raise problem
    sigma = test_to_strategy(t, spec, args.regime)
    text = render_strategy(sigma.decisions)
    _emit(args, text.splitlines(),
          {"name": t.name, "strategy": {(" ".join(k) if k else "-"): v
                                        for k, v in sigma.decisions.items()}})
    return OK


def cmd_run(args):
    sut = SutAdapter(load_sa_file(args.sut), args.policy)
    tests = sorted((load_testcase_file(p) for p in args.tests), key=lambda t: t.name)
    lines, runs, failed = [], [], False
    for t in tests:
        for rep in range(args.reps):
            seed = sub_seed(args.seed, t.name, rep) if args.reps > 1 else args.seed
            log = run_test(t, sut, args.regime, seed)
            failed |= log.verdict == "Fail"
            lines.append(log.line())
            runs.append(log.to_json())
    _emit(args, lines, {"regime": Regime.parse(args.regime).value, "seed": args.seed,
                        "runs": runs})
    return NEGATIVE if failed else OK


def cmd_ioco(args):
    impl, spec = load_sa_file(args.impl), load_sa_file(args.spec)
    rep = ioco_check(impl, spec)
    payload = {"impl": impl.name, "spec": spec.name, "holds": rep.holds,
               "counterexample": None}
    if rep.holds:
        lines = [f"{impl.name} ioco {spec.name}: conforms"]
    else:
        rho, x = rep.counterexample
        payload["counterexample"] = {"trace": list(rho), "output": x}
        lines = [f"{impl.name} ioco {spec.name}: violation",
                 f"counterexample: {format_trace(rho)} {x}"]
    _emit(args, lines, payload)
    return OK if rep.holds else NEGATIVE


def cmd_alt_incl(args):
    impl, spec = load_sa_file(args.impl), load_sa_file(args.spec)
    if args.bounded:
        holds = bounded_alt_incl_sa(impl, spec, args.depth, args.cheat_reading)
        method = f"bounded depth {args.depth} ({args.cheat_reading})"
    else:
        holds = alt_incl(impl, spec)
        method = "via ioco"
    _emit(args, [f"{'included' if holds else 'not-included'} [{method}]"],
          {"impl": impl.name, "spec": spec.name, "included": holds,
           "bounded": args.bounded, "depth": args.depth if args.bounded else None,
           "cheat_reading": args.cheat_reading if args.bounded else None})
    return OK if holds else NEGATIVE


def cmd_simulate_fair(args):
    sa = load_sa_file(args.file)
    goals = _goals(args.goal)
    goal = ReachabilityGoal(goals)
    g = build_arena(sa, Regime.ND, resettable=not args.no_reset)
    res = solve_reach_if(g, goal)
    if not res.winning:
        _emit(args, ["NOT-WINNING"], {"winning": False, "runs": []})
        return NEGATIVE
    results = []
    for i in range(args.runs):
        seed = args.seed + i
        results.append((seed, simulate_fair(g, res.retry, goal, seed, args.max_steps,
                                            fair=not args.unfair)))
    reached = sum(ok for _, ok in results)
    lines = [f"seed {s} {'reached' if ok else 'not-reached'}" for s, ok in results]
    lines.append(f"reached {reached}/{len(results)}")
    _emit(args, lines, {"winning": True, "goal": goals,
                        "max_steps": args.max_steps, "fair": not args.unfair,
                        "runs": [{"seed": s, "reached": ok} for s, ok in results],
                        "reached": reached})
    return OK if reached == len(results) else NEGATIVE


# parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    regime = argparse.ArgumentParser(add_help=False)
    regime.add_argument("--regime", choices=[r.value for r in Regime], default="ie",
                        type=str.lower)

    p = argparse.ArgumentParser(prog="iocogames",
                                description="Test games for suspension automata.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("validate", parents=[common, regime],
                       help="check an automaton, or a test case against --spec")
    s.add_argument("file")
    s.add_argument("--spec")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("arena", parents=[common, regime], help="print the game arena")
    s.add_argument("file")
    s.add_argument("--reset", action="store_true")
    s.set_defaults(func=cmd_arena)

    s = sub.add_parser("synth", parents=[common, regime], help="synthesise a reachability strategy")
    s.add_argument("file")
    s.add_argument("--goal", action="append", required=True, help="goal state (repeatable)")
    s.add_argument("--reset", action="store_true")
    s.add_argument("--strategy-out", help="write the strategy in exchange format")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("gen-tests", parents=[common, regime], help="enumerate a test suite")
    s.add_argument("file")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--out", help="directory for the .tc files")
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.set_defaults(func=cmd_gen_tests)

    s = sub.add_parser("strat2test", parents=[common, regime], help="strategy file to test case")
    s.add_argument("strategy")
    s.add_argument("--spec", required=True)
    s.add_argument("--name", default="test")
    s.add_argument("--out")
    s.set_defaults(func=cmd_strat2test)

    s = sub.add_parser("test2strat", parents=[common, regime], help="test case to strategy file")
    s.add_argument("test")
    s.add_argument("--spec", required=True)
    s.set_defaults(func=cmd_test2strat)

    s = sub.add_parser("run", parents=[common, regime], help="execute tests against an SUT model")
    s.add_argument("tests", nargs="+")
    s.add_argument("--sut", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--policy", choices=POLICIES[::2], default="random")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("ioco", parents=[common], help="decide IMPL ioco SPEC")
    s.add_argument("impl")
    s.add_argument("spec")
    s.set_defaults(func=cmd_ioco)

    s = sub.add_parser("alt-incl", parents=[common], help="alternating trace inclusion")
    s.add_argument("impl")
    s.add_argument("spec")
    s.add_argument("--bounded", action="store_true", help="use the brute-force evaluator")
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--cheat-reading", choices=(EXISTENTIAL, LITERAL), default=EXISTENTIAL)
    s.set_defaults(func=cmd_alt_incl)

    s = sub.add_parser("simulate-fair", parents=[common],
                       help="run the input-fair retry strategy under a fair scheduler")
    s.add_argument("file")
    s.add_argument("--goal", action="append", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--runs", type=int, default=1)
    s.add_argument("--max-steps", type=int, default=200)
    s.add_argument("--no-reset", action="store_true")
    s.add_argument("--unfair", action="store_true", help="hostile scheduler (negative checks)")
    s.set_defaults(func=cmd_simulate_fair)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else OK
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    except (ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
