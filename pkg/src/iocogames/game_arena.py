"""Concurrent game arenas underlying suspension automata.

The tester (player 1) proposes an input, ``theta`` (wait for an output) or
``stop``; the SUT (player 2) proposes an enabled output or delta.  The
regime decides which of the two proposals is executed.  Arena states pair
an SA state with the player whose action led there; ``BOTTOM`` is the sink
reached by ``stop``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ReservedLabelError
from .sa_core import DELTA, SuspensionAutomaton, natural_key

THETA = "theta"
STOP = "stop"
RESET = "reset?"
META_ACTIONS = (THETA, STOP, RESET)


class Regime(str, enum.Enum):
    IE = "ie"  # input-eager
    OE = "oe"  # output-eager
    ND = "nd"  # nondeterministic
    IF = "if"  # input-fair: ND moves, fairness restricts the plays

    @classmethod
    def parse(cls, value) -> Regime:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())

    def __str__(self):
        return self.value.upper()


class ArenaState(NamedTuple):
    base: str | None  # None is the sink reached by stop
    mark: int  # 1: entered by a tester action, 2: by an SUT action

    def __str__(self):
        return f"({'⊥' if self.base is None else self.base},{self.mark})"


BOTTOM = ArenaState(None, 1)


def state_key(s: ArenaState):
    return (s.base is None, natural_key(s.base or ""), s.mark)


def action_key(a: str):
    """Canonical order: SA labels alphabetically, then theta, reset?, stop."""
    order = {THETA: 1, RESET: 2, STOP: 3}
    return (order.get(a, 0), a)


@dataclass(frozen=True)
class GameArena:
    """Arena view over an SA; moves are computed on demand."""

    sa: SuspensionAutomaton
    regime: Regime
    resettable: bool = False

    @property
    def initial(self) -> ArenaState:
        return ArenaState(self.sa.initial, 1)

    @property
    def states(self) -> frozenset:
        return frozenset(ArenaState(q, i) for q in self.sa.states for i in (1, 2)) | {BOTTOM}

    @property
    def acts1(self) -> frozenset:
        extra = {THETA, STOP, RESET} if self.resettable else {THETA, STOP}
        return self.sa.inputs | extra

    @property
    def acts2(self) -> frozenset:
        return self.sa.outputs_delta

    def sorted_states(self) -> list:
        return sorted(self.states, key=state_key)

    def gamma1(self, s: ArenaState) -> frozenset:
        if s.base is None:
            return frozenset({STOP})
        extra = {THETA, STOP, RESET} if self.resettable else {THETA, STOP}
        return self.sa.inp(s.base) | extra

    def gamma2(self, s: ArenaState) -> frozenset:
        if s.base is None:
            return self.sa.outputs_delta
        return self.sa.out(s.base)

    def moves(self, s: ArenaState, a: str, x: str) -> frozenset:
        if a not in self.gamma1(s) or x not in self.gamma2(s):
            return frozenset()
        if a == STOP:
            return frozenset({BOTTOM})
        if a == RESET:
            return frozenset({self.initial})
        q = s.base
        by_input = ArenaState(self.sa.step(q, a), 1) if a != THETA else None
        by_output = ArenaState(self.sa.step(q, x), 2)
        regime = self.regime
        if regime is Regime.IE:
            return frozenset({by_input if a != THETA else by_output})
        if regime is Regime.OE:
            if x != DELTA or a == THETA:
                return frozenset({by_output})
            return frozenset({by_input})
        # ND and IF share the moves function
        if a == THETA:
            return frozenset({by_output})
        if x == DELTA:
            return frozenset({by_input})
        return frozenset({by_input, by_output})

    def with_regime(self, regime, resettable=None) -> GameArena:
        return build_arena(self.sa, regime,
                           self.resettable if resettable is None else resettable)


def build_arena(sa: SuspensionAutomaton, regime, resettable: bool = False) -> GameArena:
    used = sa.labels
    for meta in (THETA, STOP) + ((RESET,) if resettable else ()):
        if meta in used:
            raise ReservedLabelError(f"{meta!r} is reserved for the arena")
    return GameArena(sa, Regime.parse(regime), resettable)


def render_arena(g: GameArena) -> list[str]:
    """Deterministic line listing of states, enabling sets and all moves."""
    lines = [
        f"arena {g.sa.name} regime={g.regime.value} reset={'yes' if g.resettable else 'no'}",
        f"initial {g.initial}",
    ]
    states = g.sorted_states()
    for s in states:
        g1 = " ".join(sorted(g.gamma1(s), key=action_key))
        g2 = " ".join(sorted(g.gamma2(s)))
        lines.append(f"state {s} gamma1 {{{g1}}} gamma2 {{{g2}}}")
    for s in states:
        for a in sorted(g.gamma1(s), key=action_key):
            for x in sorted(g.gamma2(s)):
                targets = " ".join(str(t) for t in sorted(g.moves(s, a, x), key=state_key))
                lines.append(f"move {s} {a} {x} -> {targets}")
    return lines


def arena_json(g: GameArena) -> dict:
    states = g.sorted_states()
    return {
        "automaton": g.sa.name,
        "regime": g.regime.value,
        "resettable": g.resettable,
        "initial": str(g.initial),
        "states": [
            {"state": str(s),
             "gamma1": sorted(g.gamma1(s), key=action_key),
             "gamma2": sorted(g.gamma2(s))}
            for s in states
        ],
        "moves": [
            {"state": str(s), "input": a, "output": x,
             "targets": [str(t) for t in sorted(g.moves(s, a, x), key=state_key)]}
            for s in states
            for a in sorted(g.gamma1(s), key=action_key)
            for x in sorted(g.gamma2(s))
        ],
    }
