"""Plays, traces, strategies and outcomes on game arenas.

Infinite plays appear only as lassos (stem followed by a repeated cycle).
Strategies are plain callables from a play prefix to an action; the one
concrete strategy class, ``FiniteTraceStrategy``, decides on the observed
trace alone and plays ``stop`` on every trace it has no entry for.
"""
from __future__ import annotations

import random
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DisabledAction, ModelError, ParseError
from .game_arena import (BOTTOM, RESET, STOP, THETA, ArenaState, GameArena,
                         action_key, state_key)
from .sa_core import INPUT, label_kind

Strategy = Callable[["PlayPrefix"], str]


class Step(NamedTuple):
    action: str  # player 1 proposal
    output: str  # player 2 proposal
    next: ArenaState


@dataclass(frozen=True)
class PlayPrefix:
    start: ArenaState
    steps: tuple = ()

    def __len__(self):
        return len(self.steps) + 1

    @property
    def last(self) -> ArenaState:
        return self.steps[-1].next if self.steps else self.start

    @property
    def states(self) -> list:
        return [self.start] + [st.next for st in self.steps]

    def extend(self, a, x, nxt) -> PlayPrefix:
        return PlayPrefix(self.start, self.steps + (Step(a, x, nxt),))

    def prefix(self, j) -> PlayPrefix:
        """The prefix up to (and including) the j-th state."""
        return PlayPrefix(self.start, self.steps[:j])

    def validate(self, g: GameArena):
        _check_steps(g, self.start, self.steps)

    def __str__(self):
        parts = [str(self.start)]
        for st in self.steps:
            parts.append(f"<{st.action},{st.output}>{st.next}")
        return "".join(parts)


def _check_steps(g, s, steps):
    for st in steps:
        if st.action not in g.gamma1(s) or st.output not in g.gamma2(s):
            raise DisabledAction(f"<{st.action},{st.output}> not enabled at {s}")
        if st.next not in g.moves(s, st.action, st.output):
            raise DisabledAction(f"{st.next} is not a move of {s} under <{st.action},{st.output}>")
        s = st.next


@dataclass(frozen=True)
class Lasso:
    """The ultimately periodic play ``stem . cycle^omega``."""

    stem: PlayPrefix
    cycle: tuple

    def validate(self, g: GameArena):
        if not self.cycle:
            raise ModelError("lasso cycle must be non-empty")
        self.stem.validate(g)
        _check_steps(g, self.stem.last, self.cycle)
        if self.cycle[-1].next != self.stem.last:
            raise ModelError("lasso cycle does not return to the end of the stem")

    def unroll(self, times=1) -> PlayPrefix:
        return PlayPrefix(self.stem.start, self.stem.steps + tuple(self.cycle) * times)


@dataclass(frozen=True)
class ReachabilityGoal:
    targets: frozenset

    def __init__(self, targets: Iterable):
        targets = frozenset(targets)
        if None in targets:
            raise ModelError("goals on the stop sink are not allowed")
        object.__setattr__(self, "targets", targets)

    def check(self, sa):
        unknown = self.targets - sa.states
        if unknown:
            raise ModelError(f"goal states not in the automaton: {sorted(unknown)}")

    def __contains__(self, s: ArenaState) -> bool:
        return s.base is not None and s.base in self.targets

    def lifted(self) -> frozenset:
        return frozenset(ArenaState(q, i) for q in self.targets for i in (1, 2))


# traces ---------------------------------------------------------------------

def trace_of(pi: PlayPrefix) -> tuple:
    """Executed labels: the proposed input where the next state has mark 1,
    the proposed output otherwise.  Steps that execute stop or reset?
    contribute those literal tokens."""
    return tuple(st.action if st.next.mark == 1 else st.output for st in pi.steps)


# resolvers for the two-successor case -----------------------------------------

def input_first(pi, a, x, successors):
    return min(successors, key=lambda s: s.mark)


def output_first(pi, a, x, successors):
    return max(successors, key=lambda s: s.mark)


class RandomResolver:
    def __init__(self, seed=0):
        self.rng = seed if isinstance(seed, random.Random) else random.Random(seed)

    def __call__(self, pi, a, x, successors):
        return self.rng.choice(sorted(successors, key=state_key))


class ScriptedResolver:
    """Resolves successive conflicts by a scripted sequence of marks (1 or 2)."""

    def __init__(self, marks: Iterable[int]):
        self.marks = list(marks)
        self.used = 0

    def __call__(self, pi, a, x, successors):
        mark = self.marks[self.used]
        self.used += 1
        for s in successors:
            if s.mark == mark:
                return s
        raise ModelError(f"scripted mark {mark} matches none of {successors}")


class AdversarialResolver:
    """Keeps away from the goal; with a rank table, prefers the worst rank."""

    def __init__(self, goal: ReachabilityGoal, rank: Mapping | None = None):
        self.goal = goal
        self.rank = rank or {}

    def __call__(self, pi, a, x, successors):
        inf = float("inf")

        def badness(s):
            return (s not in self.goal, self.rank.get(s, inf), state_key(s))

        return max(successors, key=badness)


def step(g: GameArena, pi: PlayPrefix, a: str, x: str, resolver=None) -> PlayPrefix:
    successors = g.moves(pi.last, a, x)
    if not successors:
        raise DisabledAction(f"<{a},{x}> not enabled at {pi.last}")
    if len(successors) == 1:
        (nxt,) = successors
    else:
        if resolver is None:
            raise ModelError(f"<{a},{x}> at {pi.last} needs a resolver")
        nxt = resolver(pi, a, x, sorted(successors, key=state_key))
        if nxt not in successors:
            raise ModelError(f"resolver picked {nxt}, not a move of {pi.last}")
    return pi.extend(a, x, nxt)


def outcomes_bounded(g: GameArena, s1: Strategy, s2: Strategy | None = None,
                     depth: int = 1, all_lengths: bool = False) -> list:
    """Prefixes of Outc(s1, s2) with ``depth`` steps, every resolution included.

    ``s2=None`` ranges over all player-2 strategies, i.e. branches on every
    enabled output.  With ``all_lengths`` the shorter prefixes are returned too.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    frontier = [PlayPrefix(g.initial)]
    collected = list(frontier) if all_lengths else []
    for _ in range(depth):
        nxt = []
        for pi in frontier:
            s = pi.last
            a = s1(pi)
            if a not in g.gamma1(s):
                raise DisabledAction(f"strategy proposes {a!r}, not enabled at {s}")
            if s2 is None:
                outputs = sorted(g.gamma2(s))
            else:
                outputs = [s2(pi)]
                if outputs[0] not in g.gamma2(s):
                    raise DisabledAction(f"player 2 proposes {outputs[0]!r}, not enabled at {s}")
            for x in outputs:
                for t in sorted(g.moves(s, a, x), key=state_key):
                    nxt.append(pi.extend(a, x, t))
        frontier = nxt
        if all_lengths:
            collected.extend(frontier)
    return collected if all_lengths else frontier


# plays --------------------------------------------------------------------------

def _executed_input(st: Step) -> bool:
    return (st.next.mark == 1 and st.next.base is not None
            and st.action not in (THETA, STOP, RESET))


def is_input_fair(g: GameArena, play: Lasso, recurrent: bool = True) -> bool:
    """Every input proposed at an SA state is executed there at some point.

    With ``recurrent`` (the default) proposals made inside the cycle must be
    executed inside the cycle, because they recur forever; otherwise one
    execution anywhere in the play suffices.
    """
    def scan(start, steps):
        proposed, executed = set(), set()
        s = start
        for st in steps:
            if s.base is not None and st.action in g.sa.inputs:
                proposed.add((s.base, st.action))
                if _executed_input(st):
                    executed.add((s.base, st.action))
            s = st.next
        return proposed, executed

    stem_prop, stem_exec = scan(play.stem.start, play.stem.steps)
    cyc_prop, cyc_exec = scan(play.stem.last, play.cycle)
    everywhere = stem_exec | cyc_exec
    if not stem_prop <= everywhere:
        return False
    return cyc_prop <= (cyc_exec if recurrent else everywhere)


def is_winning_play(goal: ReachabilityGoal, pi) -> bool:
    if isinstance(pi, Lasso):
        states = pi.stem.states + [st.next for st in pi.cycle]
    else:
        states = pi.states
    return any(s in goal for s in states)


# finite trace-based strategies ------------------------------------------------------

def is_input(label) -> bool:
    return label not in (THETA, STOP, RESET) and label_kind(label) == INPUT


class FiniteTraceStrategy:
    """Player-1 strategy given by a finite map from traces to actions.

    Traces outside the map get ``stop``, which makes every such strategy
    finite; keys are traces of the SA, so the strategy is trace-based.
    """

    def __init__(self, decisions: Mapping | None = None):
        self.decisions = {tuple(k): v for k, v in (decisions or {}).items()}

    def decide(self, trace) -> str:
        return self.decisions.get(tuple(trace), STOP)

    def __call__(self, pi: PlayPrefix) -> str:
        return self.decide(trace_of(pi))

    def __eq__(self, other):
        return isinstance(other, FiniteTraceStrategy) and self.decisions == other.decisions

    def __hash__(self):
        return hash(frozenset(self.decisions.items()))

    def __repr__(self):
        return f"FiniteTraceStrategy({len(self.decisions)} decisions)"

    @property
    def depth(self) -> int:
        return max((len(k) for k in self.decisions), default=0)

    def check(self, g: GameArena):
        """Every stored decision is enabled where its trace leads."""
        for rho, a in self.decisions.items():
            q = g.sa.state_after(rho)
            if q is None:
                raise ModelError(f"{' '.join(rho) or '-'} is not a trace of {g.sa.name}")
            mark = 1 if not rho or is_input(rho[-1]) else 2
            if a not in g.gamma1(ArenaState(q, mark)):
                raise DisabledAction(f"{a!r} is not enabled after {' '.join(rho) or '-'}")

    def reachable(self, g: GameArena) -> dict:
        """Decisions on the traces this strategy actually reaches, stops included."""
        out = {}
        frontier = [((), g.initial)]
        seen = set()
        while frontier:
            rho, s = frontier.pop()
            if rho in seen:
                continue
            seen.add(rho)
            a = self.decide(rho)
            out[rho] = a
            if a == STOP:
                continue
            if a not in g.gamma1(s):
                raise DisabledAction(f"{a!r} is not enabled after {' '.join(rho) or '-'}")
            for x in g.gamma2(s):
                for t in g.moves(s, a, x):
                    label = a if t.mark == 1 else x
                    frontier.append((rho + (label,), t))
        return out

    def render(self) -> str:
        return render_strategy(self.decisions)


def render_strategy(decisions: Mapping) -> str:
    lines = []
    for rho in sorted(decisions, key=lambda r: (len(r), r)):
        lines.append(f"{' '.join(rho) if rho else '-'} -> {decisions[rho]}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_strategy(text: str) -> FiniteTraceStrategy:
    decisions = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise ParseError("expected 'TRACE -> ACTION'", lineno)
        lhs, rhs = (part.strip() for part in line.split("->", 1))
        rho = () if lhs == "-" else tuple(lhs.split())
        if not rhs or len(rhs.split()) != 1:
            raise ParseError("expected exactly one action", lineno)
        if rho in decisions:
            raise ParseError(f"duplicate trace {lhs!r}", lineno)
        decisions[rho] = rhs
    return FiniteTraceStrategy(decisions)


def sorted_actions(actions) -> list:
    return sorted(actions, key=action_key)


