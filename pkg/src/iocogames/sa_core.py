"""Suspension automata: data model, file format, and trace operations.

Labels are plain strings. The suffix carries the kind: inputs end in ``?``,
outputs in ``!``, and quiescence is the reserved name ``delta``, which is
never declared in a file but always belongs to the output alphabet.
"""
from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import AlphabetError, DeterminismViolation, NonBlockingViolation, ParseError

DELTA = "delta"

INPUT = "input"
OUTPUT = "output"
QUIESCENCE = "quiescence"

_IDENT = re.compile(r"[A-Za-z0-9_]+[?!]?\Z")
_DIRECTIVES = ("automaton", "inputs", "outputs", "initial")
_VERDICT_DIRECTIVES = ("pass", "fail")

Trace = tuple  # tuple[str, ...]; the empty tuple is epsilon


def label_kind(name: str) -> str:
    if name == DELTA:
        return QUIESCENCE
    if name.endswith("?"):
        return INPUT
    if name.endswith("!"):
        return OUTPUT
    raise AlphabetError(f"label {name!r} must end in '?' or '!'")


def natural_key(s):
    """Sort key that orders q2 before q10."""
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", str(s))]


def format_trace(trace: Iterable[str], empty: str = "ε") -> str:
    trace = tuple(trace)
    return " ".join(trace) if trace else empty


@dataclass(frozen=True)
class SuspensionAutomaton:
    """Deterministic, non-blocking automaton over inputs, outputs and delta.

    ``trans`` maps ``(state, label)`` to the successor state; a dict cannot
    hold two successors for one key, so determinism holds by construction.
    Instances are validated on creation and never mutated afterwards.
    """

    states: frozenset
    inputs: frozenset
    outputs: frozenset
    initial: str
    trans: Mapping
    name: str = "sa"
    _in: dict = field(init=False, repr=False, compare=False)
    _out: dict = field(init=False, repr=False, compare=False)

    # test cases relax this for their input states under input-eager testing
    require_nonblocking = True

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        object.__setattr__(self, "trans", dict(self.trans))
        self._check_alphabet()
        if self.initial not in self.states:
            raise ParseError(f"initial state {self.initial!r} is not a state")
        ins = {q: [] for q in self.states}
        outs = {q: [] for q in self.states}
        labels = self.labels
        for (q, a), q2 in self.trans.items():
            if q not in self.states or q2 not in self.states:
                raise ParseError(f"transition {q} {a} {q2} leaves the state set")
            if a not in labels:
                raise AlphabetError(f"undeclared label {a!r}")
            (ins if a in self.inputs else outs)[q].append(a)
        object.__setattr__(self, "_in", {q: frozenset(v) for q, v in ins.items()})
        object.__setattr__(self, "_out", {q: frozenset(v) for q, v in outs.items()})
        if self.require_nonblocking:
            blocked = sorted((q for q in self.states if not self._out[q]), key=natural_key)
            if blocked:
                raise NonBlockingViolation(
                    f"state {blocked[0]} enables no output and no delta")

    def _check_alphabet(self):
        if DELTA in self.inputs or DELTA in self.outputs:
            raise AlphabetError("delta is implicit and may not be declared")
        both = self.inputs & self.outputs
        if both:
            raise AlphabetError(f"label {sorted(both)[0]!r} is both input and output")
        for a in self.inputs:
            if label_kind(a) != INPUT:
                raise AlphabetError(f"input {a!r} must end in '?'")
        for x in self.outputs:
            if label_kind(x) != OUTPUT:
                raise AlphabetError(f"output {x!r} must end in '!'")

    def __hash__(self):
        return hash((self.states, self.inputs, self.outputs, self.initial,
                     frozenset(self.trans.items())))

    # alphabet ---------------------------------------------------------------

    @property
    def outputs_delta(self) -> frozenset:
        return self.outputs | {DELTA}

    @property
    def labels(self) -> frozenset:
        return self.inputs | self.outputs_delta

    # per-state queries -------------------------------------------------------

    def inp(self, q) -> frozenset:
        return self._in[q]

    def out(self, q) -> frozenset:
        return self._out[q]

    def step(self, q, label):
        """Successor of ``q`` under ``label`` or None when undefined."""
        return self.trans.get((q, label))

    # trace operations --------------------------------------------------------

    def after(self, states: Iterable, rho: Iterable[str] = ()) -> frozenset:
        current = frozenset(states)
        for mu in rho:
            current = frozenset(
                q2 for q in current if (q2 := self.trans.get((q, mu))) is not None)
            if not current:
                break
        return current

    def out_set(self, qs: Iterable) -> frozenset:
        result = frozenset()
        for q in qs:
            result |= self._out[q]
        return result

    def is_strace(self, rho: Iterable[str]) -> bool:
        return bool(self.after({self.initial}, rho))

    def state_after(self, rho: Iterable[str]):
        """The unique state reached by ``rho`` from the initial state, or None."""
        reached = self.after({self.initial}, rho)
        return next(iter(reached)) if reached else None

    def mixed_states(self) -> frozenset:
        return frozenset(q for q in self.states
                         if self._in[q] and self._out[q] != {DELTA})

    def is_input_enabled(self) -> bool:
        return all(self._in[q] == self.inputs for q in self.states)

    def reachable_states(self) -> frozenset:
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            q = stack.pop()
            for a in self._in[q] | self._out[q]:
                q2 = self.trans[(q, a)]
                if q2 not in seen:
                    seen.add(q2)
                    stack.append(q2)
        return frozenset(seen)

    def sorted_states(self) -> list:
        return sorted(self.states, key=natural_key)

    def replace(self, **changes) -> SuspensionAutomaton:
        fields = dict(states=self.states, inputs=self.inputs, outputs=self.outputs,
                      initial=self.initial, trans=self.trans, name=self.name)
        fields.update(changes)
        return type(self)(**fields)


# file format ----------------------------------------------------------------

def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if line:
            yield lineno, line


def _ident(token, lineno):
    if not _IDENT.match(token):
        raise ParseError(f"bad identifier {token!r}", lineno)
    return token


def parse_automaton(text: str, verdicts: bool = False) -> dict:
    """Parse the line-oriented format into constructor keyword arguments.

    With ``verdicts=True`` the ``pass STATE`` / ``fail STATE`` directives of
    the test-case format are accepted and returned as ``pass_state`` and
    ``fail_state``.
    """
    directives = _DIRECTIVES + (_VERDICT_DIRECTIVES if verdicts else ())
    seen: dict[str, object] = {}
    trans: dict = {}
    states: set = set()

    for lineno, toks in _tokens(text):
        head = toks[0]
        if head in directives:
            if head in seen:
                raise ParseError(f"duplicate '{head}' directive", lineno)
            args = [_ident(t, lineno) for t in toks[1:]]
            if head in ("inputs", "outputs"):
                if len(set(args)) != len(args):
                    raise AlphabetError(f"line {lineno}: label declared twice")
                if DELTA in args:
                    raise AlphabetError(f"line {lineno}: delta is implicit and may not be declared")
                suffix = "?" if head == "inputs" else "!"
                for a in args:
                    if not a.endswith(suffix):
                        raise AlphabetError(f"line {lineno}: {head} must end in '{suffix}': {a}")
                seen[head] = args
            else:
                if len(args) != 1:
                    raise ParseError(f"'{head}' takes exactly one argument", lineno)
                seen[head] = args[0]
        elif len(toks) == 3:
            q, a, q2 = (_ident(t, lineno) for t in toks)
            for s in (q, q2):
                if s in directives or s in _VERDICT_DIRECTIVES:
                    raise ParseError(f"state name {s!r} is a reserved word", lineno)
            if (q, a) in trans:
                raise DeterminismViolation(f"line {lineno}: second transition for ({q}, {a})")
            trans[(q, a)] = q2
            states.update((q, q2))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)

    for required in ("automaton", "initial"):
        if required not in seen:
            raise ParseError(f"missing '{required}' directive")
    inputs = frozenset(seen.get("inputs", ()))
    outputs = frozenset(seen.get("outputs", ()))
    declared = inputs | outputs | {DELTA}
    for (q, a) in trans:
        if a not in declared:
            raise AlphabetError(f"undeclared label {a!r} on transition from {q}")
    states.add(seen["initial"])
    kwargs = dict(states=frozenset(states), inputs=inputs, outputs=outputs,
                  initial=seen["initial"], trans=trans, name=seen["automaton"])
    if verdicts:
        for key in _VERDICT_DIRECTIVES:
            if key not in seen:
                raise ParseError(f"missing '{key}' directive")
            states.add(seen[key])
        kwargs["states"] = frozenset(states)
        kwargs["pass_state"] = seen["pass"]
        kwargs["fail_state"] = seen["fail"]
    return kwargs


def load_sa(text: str) -> SuspensionAutomaton:
    return SuspensionAutomaton(**parse_automaton(text))


def load_sa_file(path) -> SuspensionAutomaton:
    with open(path, encoding="utf-8") as fh:
        return load_sa(fh.read())


def render_sa(sa: SuspensionAutomaton, extra_directives: Iterable[str] = ()) -> str:
    lines = [
        f"automaton {sa.name}",
        " ".join(["inputs", *sorted(sa.inputs)]),
        " ".join(["outputs", *sorted(sa.outputs)]),
        f"initial {sa.initial}",
        *extra_directives,
    ]
    for (q, a), q2 in sorted(sa.trans.items(),
                             key=lambda kv: (natural_key(kv[0][0]), kv[0][1])):
        lines.append(f"{q} {a} {q2}")
    return "\n".join(lines) + "\n"
