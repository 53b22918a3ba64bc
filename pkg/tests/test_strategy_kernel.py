import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sa_from_seed
from iocogames.errors import DisabledAction, ModelError, ParseError
from iocogames.game_arena import BOTTOM, STOP, THETA, ArenaState, build_arena
from iocogames.sa_core import DELTA
from iocogames.strategy_kernel import (AdversarialResolver, FiniteTraceStrategy, Lasso,
                                       PlayPrefix, RandomResolver, ReachabilityGoal,
                                       ScriptedResolver, Step, input_first, is_input_fair,
                                       is_winning_play, outcomes_bounded, output_first,
                                       parse_strategy, render_strategy, step, trace_of)

S = ArenaState


def prefix(start, *steps):
    return PlayPrefix(start, tuple(Step(*s) for s in steps))


def test_trace_mp3_conflict_won_by_input(mp3):
    g = build_arena(mp3, "nd")
    pi = prefix(S("q0", 1), ("play?", DELTA, S("q1", 1)), ("quit?", "endPlayList!", S("q0", 1)))
    pi.validate(g)
    assert trace_of(pi) == ("play?", "quit?")


def test_trace_printer(printer):
    g = build_arena(printer, "nd")
    pi = prefix(S("q0", 1), ("print?", DELTA, S("q3", 1)), (THETA, "printed!", S("q6", 2)))
    pi.validate(g)
    assert trace_of(pi) == ("print?", "printed!")
    assert trace_of(PlayPrefix(S("q0", 1))) == ()
    assert len(pi) == 3 and pi.prefix(1).last == S("q3", 1)


def test_trace_of_stop_token(printer):
    g = build_arena(printer, "ie")
    pi = step(g, PlayPrefix(g.initial), STOP, DELTA)
    assert pi.last == BOTTOM and trace_of(pi) == (STOP,)


def test_validate_rejects_inconsistent(printer):
    g = build_arena(printer, "ie")
    with pytest.raises(DisabledAction):
        prefix(S("q0", 1), ("print?", DELTA, S("q1", 1))).validate(g)
    with pytest.raises(DisabledAction):
        prefix(S("q0", 1), ("print?", "printed!", S("q3", 1))).validate(g)


def test_step_resolvers(printer):
    g = build_arena(printer, "nd")
    pi = step(g, PlayPrefix(g.initial), "print?", DELTA)
    goal = ReachabilityGoal({"q4"})
    assert step(g, pi, "scan?", "printed!", AdversarialResolver(goal)).last == S("q6", 2)
    assert step(g, pi, "scan?", "printed!", input_first).last == S("q4", 1)
    assert step(g, pi, "scan?", "printed!", output_first).last == S("q6", 2)
    assert step(g, pi, "scan?", "printed!", ScriptedResolver([1])).last == S("q4", 1)
    picks = {step(g, pi, "scan?", "printed!", RandomResolver(seed)).last for seed in range(20)}
    assert picks == {S("q4", 1), S("q6", 2)}
    with pytest.raises(ModelError):
        step(g, pi, "scan?", "printed!")
    with pytest.raises(DisabledAction):
        step(g, pi, "print?", "printed!", input_first)


def test_step_stop_and_quiescence(printer):
    g = build_arena(printer, "ie")
    start = PlayPrefix(g.initial)
    assert step(g, start, THETA, DELTA).last == S("q0", 2)
    for s in g.states:
        for x in g.gamma2(s):
            assert g.moves(s, STOP, x) == {BOTTOM}


def test_outcomes_immediate_stop(printer):
    g = build_arena(printer, "nd")
    stop_all = FiniteTraceStrategy({})
    outs = outcomes_bounded(g, stop_all, None, depth=1)
    assert outs and all(pi.last == BOTTOM for pi in outs)


def test_outcomes_example_strategy(printer):
    # print? while enabled, else scan?, else theta; stop from the fourth state on
    def sigma(pi):
        if len(pi) >= 4:
            return STOP
        q = pi.last.base
        for a in ("print?", "scan?"):
            if a in printer.inp(q):
                return a
        return THETA

    g = build_arena(printer, "nd")
    prefixes = outcomes_bounded(g, sigma, None, depth=3, all_lengths=True)
    traces = {trace_of(pi) for pi in prefixes if pi.steps}
    assert traces == {("print?",), ("print?", "scan?"), ("print?", "printed!"),
                      ("print?", "scan?", "printed!"), ("print?", "scan?", "scanned!"),
                      ("print?", "printed!", "scan?")}
    for pi in prefixes:
        pi.validate(g)


def test_outcomes_ie_single_successor(printer):
    g = build_arena(printer, "ie")
    sigma = FiniteTraceStrategy({(): "print?", ("print?",): "scan?", ("print?", "scan?"): THETA})
    outs = outcomes_bounded(g, sigma, None, depth=3)
    # one prefix per output branch: printed! and scanned! at q4
    assert sorted(trace_of(pi) for pi in outs) == [("print?", "scan?", "printed!"),
                                                   ("print?", "scan?", "scanned!")]


def test_outcomes_with_player2_strategy(printer):
    g = build_arena(printer, "nd")
    sigma = FiniteTraceStrategy({(): "print?", ("print?",): "scan?"})
    outs = outcomes_bounded(g, sigma, lambda pi: sorted(g.gamma2(pi.last))[0], depth=2)
    assert {pi.last for pi in outs} == {S("q4", 1), S("q6", 2)}
    with pytest.raises(ValueError):
        outcomes_bounded(g, sigma, None, depth=-1)


def test_input_fairness_example(printer):
    g = build_arena(printer, "nd")
    cycle = (Step("print?", DELTA, S("q3", 1)), Step("scan?", "printed!", S("q6", 2)),
             Step("scan?", DELTA, S("q7", 1)), Step(THETA, "scanned!", S("q0", 2)))
    stem = PlayPrefix(S("q0", 1), (Step(THETA, DELTA, S("q0", 2)),))
    lasso = Lasso(stem, cycle)
    lasso.validate(g)
    assert not is_input_fair(g, lasso)
    assert not is_input_fair(g, lasso, recurrent=False)

    fair_cycle = (Step("print?", DELTA, S("q3", 1)), Step("scan?", "printed!", S("q4", 1)),
                  Step(THETA, "printed!", S("q7", 2)), Step(THETA, "scanned!", S("q0", 2)))
    fair = Lasso(stem, fair_cycle)
    fair.validate(g)
    assert is_input_fair(g, fair)


def test_recurrent_versus_once(printer):
    g = build_arena(printer, "nd")
    # scan? proposed and executed at q3 in the stem, then only refused at q3 in the cycle
    stem = prefix(S("q0", 1), ("print?", DELTA, S("q3", 1)), ("scan?", "printed!", S("q4", 1)),
                  (THETA, "scanned!", S("q5", 2)), (THETA, "printed!", S("q0", 2)))
    cycle = (Step("print?", DELTA, S("q3", 1)), Step("scan?", "printed!", S("q6", 2)),
             Step("scan?", DELTA, S("q7", 1)), Step(THETA, "scanned!", S("q0", 2)))
    lasso = Lasso(stem, cycle)
    lasso.validate(g)
    assert is_input_fair(g, lasso, recurrent=False)
    assert not is_input_fair(g, lasso, recurrent=True)


def test_lasso_must_close(printer):
    g = build_arena(printer, "ie")
    with pytest.raises(ModelError):
        Lasso(PlayPrefix(S("q0", 1)), (Step(THETA, DELTA, S("q0", 2)),)).validate(g)
    ok = Lasso(PlayPrefix(S("q0", 2)), (Step(THETA, DELTA, S("q0", 2)),))
    ok.validate(g)
    assert len(ok.unroll(3)) == 4


def test_winning_play(printer):
    g = build_arena(printer, "ie")
    pi = step(g, step(g, PlayPrefix(g.initial), "print?", DELTA), "scan?", "printed!")
    assert pi.last == S("q4", 1)
    assert is_winning_play(ReachabilityGoal({"q4"}), pi)
    assert not is_winning_play(ReachabilityGoal(set()), pi)
    with pytest.raises(ModelError):
        ReachabilityGoal({None})


def test_goal_check(printer):
    ReachabilityGoal({"q4"}).check(printer)
    with pytest.raises(ModelError):
        ReachabilityGoal({"nowhere"}).check(printer)


def test_finite_strategy_check_and_reachable(printer):
    g = build_arena(printer, "nd")
    sigma = FiniteTraceStrategy({(): "print?", ("print?",): "scan?", ("never",): THETA})
    assert sigma.reachable(g) == {(): "print?", ("print?",): "scan?",
                                  ("print?", "scan?"): STOP, ("print?", "printed!"): STOP}
    with pytest.raises(ModelError):
        sigma.check(g)
    with pytest.raises(DisabledAction):
        FiniteTraceStrategy({(): "printed!"}).check(g)
    FiniteTraceStrategy({(): "print?", ("print?",): "scan?"}).check(g)


def test_exchange_format_round_trip():
    sigma = FiniteTraceStrategy({(): "print?", ("print?",): "scan?", ("print?", "scan?"): STOP})
    text = render_strategy(sigma.decisions)
    assert text == "- -> print?\nprint? -> scan?\nprint? scan? -> stop\n"
    assert parse_strategy(text) == sigma
    assert parse_strategy("# only a comment\n") == FiniteTraceStrategy()


@pytest.mark.parametrize("text", ["- print?\n", "- -> a? b?\n", "- -> a?\n- -> b?\n"])
def test_exchange_format_errors(text):
    with pytest.raises(ParseError):
        parse_strategy(text)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["ie", "oe", "nd"]))
def test_trace_based_and_finite(seed, regime):
    sa = sa_from_seed(seed)
    g = build_arena(sa, regime)
    rng = random.Random(seed)
    # random decision map of depth <= 2 over reachable traces
    decisions, frontier = {}, [((), g.initial)]
    for _ in range(2):
        nxt = []
        for rho, s in frontier:
            a = rng.choice(sorted(g.gamma1(s)))
            decisions[rho] = a
            if a == STOP:
                continue
            for x in g.gamma2(s):
                for t in g.moves(s, a, x):
                    nxt.append((rho + ((a if t.mark == 1 else x),), t))
        frontier = nxt
    sigma = FiniteTraceStrategy(decisions)
    sigma.check(g)
    prefixes = outcomes_bounded(g, sigma, None, depth=4, all_lengths=True)
    by_trace = {}
    for pi in prefixes:
        pi.validate(g)
        rho = trace_of(pi)
        assert by_trace.setdefault(rho, sigma(pi)) == sigma(pi)
        if STOP not in rho:
            assert sa.is_strace(rho)
    for pi in outcomes_bounded(g, sigma, None, depth=sigma.depth + 2):
        assert STOP in [st_.action for st_ in pi.steps]
