"""Test cases and their correspondence with finite trace-based strategies.

A test case is an acyclic SA with two absorbing verdict states.  Tests
built here name their states by breadth-first order over access traces and
share a single Pass and a single Fail state, so two tests are the same up
to renaming exactly when their ``signature`` (the unfolded trace tree) is.
"""
from __future__ import annotations

import itertools
from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass

from .errors import AlphabetMismatch, ExplosionGuard, InvalidTestCase, NotFinite, NotTraceBased
from .game_arena import RESET, STOP, THETA, GameArena, Regime, action_key, build_arena, state_key
from .sa_core import DELTA, SuspensionAutomaton, natural_key, parse_automaton, render_sa
from .strategy_kernel import FiniteTraceStrategy, PlayPrefix, trace_of

PASS = "Pass"
FAIL = "Fail"
DEFAULT_CAP = 100_000


@dataclass(frozen=True, eq=False)
class TestCase(SuspensionAutomaton):
    pass_state: str = PASS
    fail_state: str = FAIL

    __test__ = False  # keep pytest from collecting this class
    # input states of input-eager tests may enable no output at all
    require_nonblocking = False

    def __eq__(self, other):
        return (isinstance(other, TestCase) and super().__eq__(other)
                and (self.pass_state, self.fail_state) == (other.pass_state, other.fail_state))

    def __hash__(self):
        return hash((super().__hash__(), self.pass_state, self.fail_state))

    def replace(self, **changes):
        fields = dict(states=self.states, inputs=self.inputs, outputs=self.outputs,
                      initial=self.initial, trans=self.trans, name=self.name,
                      pass_state=self.pass_state, fail_state=self.fail_state)
        fields.update(changes)
        return TestCase(**fields)

    @property
    def verdict_states(self):
        return (self.pass_state, self.fail_state)

    def verdict(self, state):
        if state == self.pass_state:
            return PASS
        if state == self.fail_state:
            return FAIL
        return None

    def enabled_input(self, state):
        ins = self.inp(state)
        return next(iter(ins)) if len(ins) == 1 else None

    def signature(self) -> frozenset:
        """The trace tree: (access trace, node kind) for every unfolded node."""
        nodes = set()
        stack = [((), self.initial)]
        while stack:
            rho, u = stack.pop()
            v = self.verdict(u)
            if v is not None:
                nodes.add((rho, v))
                continue
            a = self.enabled_input(u)
            nodes.add((rho, f"in:{a}" if a else "obs"))
            for label in self.inp(u) | self.out(u):
                stack.append((rho + (label,), self.trans[(u, label)]))
        return frozenset(nodes)

    def pass_traces(self) -> frozenset:
        return frozenset(rho for rho, kind in self.signature() if kind == PASS)

    def fail_traces(self) -> frozenset:
        return frozenset(rho for rho, kind in self.signature() if kind == FAIL)


def load_testcase(text: str) -> TestCase:
    return TestCase(**parse_automaton(text, verdicts=True))


def load_testcase_file(path) -> TestCase:
    with open(path, encoding="utf-8") as fh:
        return load_testcase(fh.read())


def render_testcase(t: TestCase) -> str:
    return render_sa(t, [f"pass {t.pass_state}", f"fail {t.fail_state}"])


# validation ------------------------------------------------------------------

def testcase_violation(t: TestCase, spec: SuspensionAutomaton, regime) -> InvalidTestCase | None:
    """First violated test-case rule with a witness trace, or None."""
    regime = Regime.parse(regime)
    if t.inputs != spec.inputs or t.outputs != spec.outputs:
        return InvalidTestCase("alphabet", "test and specification alphabets differ")
    if t.pass_state == t.fail_state:
        return InvalidTestCase("verdicts", "Pass and Fail must be distinct states")
    outs = spec.outputs_delta

    # rule 1: verdict states absorb every output and refuse every input
    for v in t.verdict_states:
        if t.inp(v):
            return InvalidTestCase("verdicts", f"{v} enables an input")
        for x in sorted(outs):
            if t.step(v, x) != v:
                return InvalidTestCase("verdicts", f"{v} does not loop on {x}")

    # rule 2: acyclic apart from the verdict self-loops
    colour = {}

    def cycle_from(u, path):
        colour[u] = 1
        for label in sorted(t.inp(u) | t.out(u)):
            w = t.trans[(u, label)]
            if w in t.verdict_states:
                continue
            if colour.get(w) == 1:
                return path + (label,)
            if w not in colour:
                found = cycle_from(w, path + (label,))
                if found is not None:
                    return found
        colour[u] = 2
        return None

    for u in sorted(t.states, key=natural_key):
        if u not in colour and u not in t.verdict_states:
            found = cycle_from(u, ())
            if found is not None:
                return InvalidTestCase("acyclic", f"cycle through {u}", found)

    # rule 3: one input with all outputs, or no input with all outputs and delta
    for u in sorted(t.states, key=natural_key):
        n_in, out_u = len(t.inp(u)), t.out(u)
        observe = n_in == 0 and out_u == outs
        if regime is Regime.IE:
            ok = observe or n_in == 1
        else:
            ok = observe or (n_in == 1 and out_u == spec.outputs)
        if not ok:
            return InvalidTestCase("shape", f"state {u} has inputs {sorted(t.inp(u))} "
                                            f"and outputs {sorted(out_u)}")

    # rule 4: traces entering Pass are spec traces, traces entering Fail are not
    for rho, kind in sorted(t.signature(), key=lambda n: (len(n[0]), n[0])):
        if kind == PASS and not spec.is_strace(rho):
            return InvalidTestCase("verdict-traces", "Pass reached by a non-trace", rho)
        if kind == FAIL and spec.is_strace(rho):
            return InvalidTestCase("verdict-traces", "Fail reached by a spec trace", rho)
    return None


def validate_testcase(t: TestCase, spec: SuspensionAutomaton, regime) -> bool:
    return testcase_violation(t, spec, regime) is None


def check_testcase(t: TestCase, spec: SuspensionAutomaton, regime):
    problem = testcase_violation(t, spec, regime)
    if problem is not None:
        raise problem


# strategy -> test --------------------------------------------------------------

def strategy_decisions(g: GameArena, sigma, max_depth: int = 32) -> dict:
    """Decisions of ``sigma`` on every trace its outcomes reach.

    A ``FiniteTraceStrategy`` is explored by trace.  Any other callable is
    explored prefix by prefix, which detects strategies that decide
    differently on prefixes with the same trace, and strategies that do not
    stop within ``max_depth`` rounds.
    """
    if isinstance(sigma, FiniteTraceStrategy):
        return sigma.reachable(g)
    decisions = {}
    frontier = [PlayPrefix(g.initial)]
    for depth in range(max_depth + 1):
        nxt = []
        for pi in frontier:
            rho = trace_of(pi)
            a = sigma(pi)
            if decisions.setdefault(rho, a) != a:
                raise NotTraceBased(f"two decisions after {' '.join(rho) or '-'}")
            if a == STOP:
                continue
            if depth == max_depth:
                raise NotFinite(f"no stop within {max_depth} rounds")
            s = pi.last
            for x in sorted(g.gamma2(s)):
                for t in sorted(g.moves(s, a, x), key=state_key):
                    nxt.append(pi.extend(a, x, t))
        frontier = nxt
    return decisions


def trace_set(g: GameArena, sigma, max_depth: int = 32) -> frozenset:
    """Traces of the outcome prefixes whose last executed action is not stop.

    The one-state prefix has no executed action and is not included, so a
    strategy that stops immediately has an empty trace set.
    """
    return frozenset(rho for rho in strategy_decisions(g, sigma, max_depth) if rho)


def test_from_traces(traces, spec: SuspensionAutomaton, regime, name="test") -> TestCase:
    """The test case characterised by a (prefix-closed, epsilon-free) trace set."""
    regime = Regime.parse(regime)
    traces = frozenset(traces)
    children = {(): set()}
    for rho in traces:
        children.setdefault(rho, set())
        children.setdefault(rho[:-1], set()).add(rho[-1])
    for rho in traces:
        if rho[:-1] not in traces and rho[:-1]:
            raise NotTraceBased(f"trace set is not prefix closed at {' '.join(rho)}")

    names = {}
    order = []
    queue = deque([()])
    while queue:
        rho = queue.popleft()
        if not children[rho]:
            continue
        names[rho] = f"t{len(order)}"
        order.append(rho)
        for mu in sorted(children[rho]):
            queue.append(rho + (mu,))

    def target(rho):
        return names.get(rho, PASS)

    trans = {}
    for rho in order:
        u = names[rho]
        kids = children[rho]
        ins = [mu for mu in kids if mu in spec.inputs]
        if len(ins) > 1:
            raise NotTraceBased(f"two inputs executed after {' '.join(rho) or '-'}")
        if ins:
            a = ins[0]
            trans[(u, a)] = target(rho + (a,))
            if regime is not Regime.IE:
                for x in spec.outputs:
                    trans[(u, x)] = target(rho + (x,)) if x in kids else FAIL
        else:
            for x in spec.outputs_delta:
                trans[(u, x)] = target(rho + (x,)) if x in kids else FAIL
    for v in (PASS, FAIL):
        for x in spec.outputs_delta:
            trans[(v, x)] = v
    initial = names.get((), PASS)
    return TestCase(states=frozenset(names.values()) | {PASS, FAIL}, inputs=spec.inputs,
                    outputs=spec.outputs, initial=initial, trans=trans, name=name,
                    pass_state=PASS, fail_state=FAIL)


def strategy_to_test(sigma, spec: SuspensionAutomaton, regime, name="test",
                     max_depth: int = 32) -> TestCase:
    g = build_arena(spec, regime)
    return test_from_traces(trace_set(g, sigma, max_depth), spec, regime, name)


# test -> strategy --------------------------------------------------------------

def test_to_strategy(t: TestCase, spec: SuspensionAutomaton | None = None,
                     regime=None) -> FiniteTraceStrategy:
    """The tester strategy of a test: its unique input where it has one,
    stop once Pass is reached, and theta at observation states.

    Traces that enter Fail are not specification traces, so they never occur
    in the arena and carry no decision; like every trace outside the map
    they default to stop.
    """
    if spec is not None:
        if t.inputs != spec.inputs or t.outputs != spec.outputs:
            raise AlphabetMismatch("test and specification alphabets differ")
    decisions = {}
    stack = [((), t.initial)]
    while stack:
        rho, u = stack.pop()
        verdict = t.verdict(u)
        if verdict == PASS:
            decisions[rho] = STOP
            continue
        if verdict == FAIL:
            continue
        a = t.enabled_input(u)
        decisions[rho] = a if a is not None else THETA
        for label in t.inp(u) | t.out(u):
            stack.append((rho + (label,), t.trans[(u, label)]))
    return FiniteTraceStrategy(decisions)


# suites ---------------------------------------------------------------------------

def _children(g, s, d):
    kids = set()
    for x in g.gamma2(s):
        for t in g.moves(s, d, x):
            kids.add((d if t.mark == 1 else x, t))
    return sorted(kids, key=lambda kt: (kt[0], state_key(kt[1])))


def _tester_options(g, s):
    return sorted(g.gamma1(s) - {STOP, RESET}, key=action_key)


def count_strategies(g: GameArena, depth: int) -> int:
    """Number of distinct finite trace-based strategies of trace-depth <= depth."""
    def count(s, remaining):
        if remaining == 0:
            return 1
        total = 1  # stop here
        for d in _tester_options(g, s):
            prod = 1
            for _, t in _children(g, s, d):
                prod *= count(t, remaining - 1)
            total += prod
        return total

    return count(g.initial, depth)


def enumerate_strategies(g: GameArena, depth: int, cap: int = DEFAULT_CAP):
    """Yield every finite trace-based strategy whose non-stop decisions sit on
    traces shorter than ``depth``."""
    n = count_strategies(g, depth)
    if n > cap:
        raise ExplosionGuard(f"{n} strategies at depth {depth} exceed the cap of {cap}")

    def maps(rho, s, remaining):
        yield {}
        if remaining == 0:
            return
        for d in _tester_options(g, s):
            subtrees = [list(maps(rho + (label,), t, remaining - 1))
                        for label, t in _children(g, s, d)]
            for combo in itertools.product(*subtrees):
                m = {rho: d}
                for sub in combo:
                    m.update(sub)
                yield m

    for m in maps((), g.initial, depth):
        yield FiniteTraceStrategy(m)


def gen_suite(spec: SuspensionAutomaton, regime, depth: int,
              cap: int = DEFAULT_CAP) -> list[TestCase]:
    """One test per finite trace-based strategy of trace-depth <= depth,
    deduplicated by trace set and sorted canonically."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    regime = Regime.parse(regime)
    g = build_arena(spec, regime)
    by_traces = {}
    for sigma in enumerate_strategies(g, depth, cap):
        traces = trace_set(g, sigma)
        if traces not in by_traces:
            by_traces[traces] = test_from_traces(traces, spec, regime)
    ordered = sorted(by_traces.items(),
                     key=lambda kv: (len(kv[0]), sorted((len(r), r) for r in kv[0])))
    width = max(3, len(str(len(ordered))))
    return [t.replace(name=f"{spec.name}_{regime.value}_d{depth}_{i:0{width}d}")
            for i, (_, t) in enumerate(ordered)]


def decisions_equal_on_outcomes(g: GameArena, s1: FiniteTraceStrategy,
                                s2: FiniteTraceStrategy) -> bool:
    return s1.reachable(g) == s2.reachable(g)


def fixture_strategy(decisions: Mapping) -> FiniteTraceStrategy:
    return FiniteTraceStrategy({tuple(k.split()) if isinstance(k, str) else k: v
                                for k, v in decisions.items()})


# these names start with "test"; keep pytest from collecting them when imported
for _f in (test_from_traces, test_to_strategy, testcase_violation):
    _f.__test__ = False
del _f
