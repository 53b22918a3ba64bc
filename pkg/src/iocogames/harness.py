"""Executing test cases against simulated systems under test.

The SUT is an input-enabled SA hidden behind ``SutAdapter``; a process
adapter would implement the same three calls (``reset``, ``propose_output``,
``apply_label``).  Each round the test proposes its input (or theta), the SUT
proposes an output (or delta), and the adjudicator decides which one is
executed.  Under ND and IF the input/output conflict is settled by a seeded
draw that is stored in the log so runs can be replayed exactly.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .errors import AlphabetMismatch, ModelError, NotInputEnabled, RegimeMismatch
from .game_arena import STOP, THETA, GameArena, Regime
from .sa_core import DELTA, SuspensionAutomaton, format_trace
from .strategy_kernel import PlayPrefix, ReachabilityGoal
from .testgen import FAIL, PASS, TestCase

RANDOM = "random"
SCRIPTED = "scripted"
ADVERSARIAL = "adversarial"
POLICIES = (RANDOM, SCRIPTED, ADVERSARIAL)


def sub_seed(*parts) -> int:
    """Deterministic 32-bit seed derived from the given parts."""
    return random.Random(":".join(str(p) for p in parts)).getrandbits(32)


class SutAdapter:
    """An SA-backed black box with a configurable output policy.

    ``random`` draws uniformly from the enabled outputs, ``scripted`` plays
    the given outputs in order (then falls back to the first enabled one),
    and ``adversarial`` always prefers a non-delta output, which provokes
    every input/output conflict the model allows.
    """

    def __init__(self, model: SuspensionAutomaton, policy: str = RANDOM, script=()):
        if not model.is_input_enabled():
            raise NotInputEnabled(f"{model.name} is not input-enabled")
        if policy not in POLICIES:
            raise ValueError(f"unknown output policy {policy!r}")
        self.model = model
        self.policy = policy
        self.script = tuple(script)
        self.reset(0)

    def reset(self, seed=0):
        self.state = self.model.initial
        self.trace = ()
        self.rng = random.Random(sub_seed("sut", seed))
        self._scripted = 0

    def propose_output(self) -> str:
        outs = sorted(self.model.out(self.state))
        if self.policy == RANDOM:
            return self.rng.choice(outs)
        if self.policy == SCRIPTED and self._scripted < len(self.script):
            x = self.script[self._scripted]
            self._scripted += 1
            if x not in outs:
                raise ModelError(f"scripted output {x} is not enabled in {self.state}")
            return x
        real = [x for x in outs if x != DELTA]
        return real[0] if real else outs[0]

    def apply_label(self, label: str):
        nxt = self.model.step(self.state, label)
        if nxt is None:
            raise ModelError(f"{self.model.name} cannot execute {label} in {self.state}")
        self.state = nxt
        self.trace += (label,)


def adjudicate(regime: Regime, a: str, x: str, draw: str | None = None) -> str:
    """Executed label for tester proposal ``a`` and SUT proposal ``x``.

    ``draw`` ("input" or "output") settles the ND/IF conflict where both an
    input and a real output are on the table.
    """
    if regime is Regime.IE:
        return x if a == THETA else a
    if regime is Regime.OE:
        return x if (x != DELTA or a == THETA) else a
    if a == THETA:
        return x
    if x == DELTA:
        return a
    if draw not in ("input", "output"):
        raise ModelError("ND conflict needs a draw")
    return a if draw == "input" else x


@dataclass(frozen=True)
class LogStep:
    proposed_input: str
    proposed_output: str
    executed: str
    test_state: str  # after the step
    trace: tuple  # SUT-visible trace after the step
    draw: str | None = None


@dataclass
class ExecutionLog:
    test: str
    regime: Regime
    seed: int
    steps: list = field(default_factory=list)
    verdict: str | None = None

    @property
    def trace(self) -> tuple:
        return self.steps[-1].trace if self.steps else ()

    def line(self) -> str:
        return f"{self.test} {self.seed} {self.verdict} {format_trace(self.trace)}"

    def to_json(self) -> dict:
        return {
            "test": self.test, "regime": self.regime.value, "seed": self.seed,
            "verdict": self.verdict, "trace": list(self.trace),
            "steps": [{"input": s.proposed_input, "output": s.proposed_output,
                       "executed": s.executed, "test_state": s.test_state,
                       "draw": s.draw} for s in self.steps],
        }


def _check_alphabet(t: TestCase, sut: SutAdapter):
    if t.inputs != sut.model.inputs or t.outputs != sut.model.outputs:
        raise AlphabetMismatch(f"test {t.name} and SUT {sut.model.name} have different labels")


def _advance(t: TestCase, u, label, regime):
    nxt = t.step(u, label)
    if nxt is None:
        raise RegimeMismatch(f"test {t.name} has no {label} edge at {u} "
                             f"(was it generated for {regime}?)")
    return nxt


def run_test(t: TestCase, sut: SutAdapter, regime, seed: int = 0) -> ExecutionLog:
    regime = Regime.parse(regime)
    _check_alphabet(t, sut)
    sut.reset(seed)
    rng = random.Random(sub_seed("adjudicator", seed))
    log = ExecutionLog(t.name, regime, seed)
    u = t.initial
    # tests are acyclic outside their verdicts, so this loop ends
    while t.verdict(u) is None:
        a = t.enabled_input(u) or THETA
        x = sut.propose_output()
        draw = None
        if regime in (Regime.ND, Regime.IF) and a != THETA and x != DELTA:
            draw = "input" if rng.random() < 0.5 else "output"
        label = adjudicate(regime, a, x, draw)
        u = _advance(t, u, label, regime)
        sut.apply_label(label)
        log.steps.append(LogStep(a, x, label, u, sut.trace, draw))
    log.verdict = t.verdict(u)
    return log


def replay(t: TestCase, log: ExecutionLog) -> str:
    """Verdict obtained by feeding the logged proposals and draws back
    through the adjudicator and the test."""
    u = t.initial
    for st in log.steps:
        a = t.enabled_input(u) or THETA
        if a != st.proposed_input:
            raise ModelError("log does not belong to this test")
        u = _advance(t, u, adjudicate(log.regime, a, st.proposed_output, st.draw), log.regime)
    return t.verdict(u)


@dataclass
class SuiteSummary:
    counts: dict = field(default_factory=dict)  # test name -> Counter of verdicts
    logs: list = field(default_factory=list)

    @property
    def fails(self) -> int:
        return sum(c[FAIL] for c in self.counts.values())

    @property
    def passes(self) -> int:
        return sum(c[PASS] for c in self.counts.values())

    def killed_by(self) -> list:
        return sorted(name for name, c in self.counts.items() if c[FAIL])


def run_suite(tests, sut: SutAdapter, regime, seed: int = 0, repetitions: int = 1) -> SuiteSummary:
    summary = SuiteSummary()
    for t in sorted(tests, key=lambda t: t.name):
        counts = summary.counts.setdefault(t.name, Counter())
        for rep in range(repetitions):
            log = run_test(t, sut, regime, sub_seed(seed, t.name, rep))
            counts[log.verdict] += 1
            summary.logs.append(log)
    return summary


def simulate_fair(g: GameArena, sigma, goal: ReachabilityGoal, seed: int = 0,
                  max_steps: int = 200, fair: bool = True) -> bool:
    """Play ``sigma`` on an ND arena until the goal, stop, or ``max_steps``.

    The SUT proposes uniformly among the enabled outputs.  When both the
    proposed input and output could be executed, the fair scheduler grants
    the input with probability one half.  ``fair=False`` replaces it with a
    hostile scheduler that always proposes a real output when one exists and
    always executes it.
    """
    rng = random.Random(sub_seed("fair", seed))
    pi = PlayPrefix(g.initial)
    for _ in range(max_steps):
        s = pi.last
        if s in goal:
            return True
        a = sigma(pi)
        if a == STOP:
            return False
        outs = sorted(g.gamma2(s))
        if fair:
            x = rng.choice(outs)
        else:
            real = [o for o in outs if o != DELTA]
            x = real[0] if real else outs[0]
        successors = sorted(g.moves(s, a, x), key=lambda t: t.mark)
        if not successors:
            raise ModelError(f"strategy proposes {a}, not enabled at {s}")
        if len(successors) == 1:
            nxt = successors[0]
        elif fair:
            nxt = successors[0] if rng.random() < 0.5 else successors[1]
        else:
            nxt = successors[-1]
        pi = pi.extend(a, x, nxt)
    return pi.last in goal
