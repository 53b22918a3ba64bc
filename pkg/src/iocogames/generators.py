"""Seeded random suspension automata and mutants for property checks."""
from __future__ import annotations

import random

from .sa_core import DELTA, SuspensionAutomaton


def random_sa(rng: random.Random, max_states: int = 4, n_inputs: int = 2,
              n_outputs: int = 2, p_input: float = 0.6, p_output: float = 0.4,
              name: str = "rand") -> SuspensionAutomaton:
    """A random deterministic, non-blocking SA.

    Each state gets every input with probability ``p_input`` and every output
    (delta included) with probability ``p_output``; a state left without any
    output gets delta.  Delta mostly loops back to its source.
    """
    n = rng.randint(1, max_states)
    states = [f"q{i}" for i in range(n)]
    inputs = [f"i{k}?" for k in range(n_inputs)]
    outputs = [f"o{k}!" for k in range(n_outputs)]
    trans = {}
    for q in states:
        for a in inputs:
            if rng.random() < p_input:
                trans[(q, a)] = rng.choice(states)
        outs = [x for x in outputs + [DELTA] if rng.random() < p_output]
        if not outs:
            outs = [DELTA]
        for x in outs:
            if x == DELTA and rng.random() < 0.7:
                trans[(q, x)] = q
            else:
                trans[(q, x)] = rng.choice(states)
    return SuspensionAutomaton(frozenset(states), frozenset(inputs), frozenset(outputs),
                               states[0], trans, name)


def mutate(rng: random.Random, sa: SuspensionAutomaton, name: str | None = None) -> SuspensionAutomaton:
    """One random edit: add an output, drop an output, or retarget a transition.

    Edits that would leave a state without outputs are replaced by a retarget.
    """
    trans = dict(sa.trans)
    states = sa.sorted_states()
    q = rng.choice(states)
    kind = rng.choice(("add", "drop", "retarget"))
    if kind == "add":
        missing = sorted(sa.outputs_delta - sa.out(q))
        if missing:
            trans[(q, rng.choice(missing))] = rng.choice(states)
        else:
            kind = "retarget"
    elif kind == "drop":
        outs = sorted(sa.out(q))
        if len(outs) > 1:
            del trans[(q, rng.choice(outs))]
        else:
            kind = "retarget"
    if kind == "retarget":
        keys = sorted(trans)
        trans[rng.choice(keys)] = rng.choice(states)
    return sa.replace(trans=trans, name=name or f"{sa.name}_mut")
