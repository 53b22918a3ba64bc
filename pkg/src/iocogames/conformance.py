"""ioco, action decision sequences, cheating and alternating trace inclusion.

``ioco_check`` decides conformance on pairs of states (both automata are
deterministic).  ``alt_incl_bounded`` evaluates the four-quantifier
alternation over trace-based strategies on the nondeterministic arenas by
brute force, truncated to prefixes of a given number of rounds; it exists to
validate ``alt_incl``, which simply answers with ioco.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import AlphabetMismatch, ExplosionGuard, NotInputEnabled
from .game_arena import RESET, STOP, THETA, GameArena, Regime, action_key, build_arena, state_key
from .sa_core import DELTA, SuspensionAutomaton, format_trace
from .strategy_kernel import FiniteTraceStrategy, PlayPrefix

EXISTENTIAL = "existential"
LITERAL = "literal"
DEFAULT_CAP = 5_000_000


# ioco ------------------------------------------------------------------------------

@dataclass(frozen=True)
class IocoReport:
    holds: bool
    counterexample: tuple | None = None  # (rho, bad_output)

    def describe(self) -> str:
        if self.holds:
            return "conforms"
        rho, x = self.counterexample
        return f"{format_trace(rho)} {x}"


def _check_alphabets(a: SuspensionAutomaton, b: SuspensionAutomaton):
    if a.inputs != b.inputs or a.outputs != b.outputs:
        raise AlphabetMismatch(f"{a.name} and {b.name} have different label sets")


def ioco_check(impl: SuspensionAutomaton, spec: SuspensionAutomaton,
               max_length: int | None = None) -> IocoReport:
    """Breadth-first search of reachable state pairs for a violation.

    With ``max_length`` only specification traces of at most that length
    are examined.  The counterexample is a shortest violating trace; ties
    are broken by label order.
    """
    _check_alphabets(impl, spec)
    if not impl.is_input_enabled():
        raise NotInputEnabled(f"{impl.name} is not input-enabled")
    start = (impl.initial, spec.initial)
    seen = {start}
    queue = deque([((), start)])
    while queue:
        rho, (p, q) = queue.popleft()
        bad = impl.out(p) - spec.out(q)
        if bad:
            return IocoReport(False, (rho, min(bad)))
        if max_length is not None and len(rho) >= max_length:
            continue
        for mu in sorted(spec.inp(q) | spec.out(q)):
            p2 = impl.step(p, mu)
            if p2 is None:
                continue
            pair = (p2, spec.step(q, mu))
            if pair not in seen:
                seen.add(pair)
                queue.append((rho + (mu,), pair))
    return IocoReport(True)


def angelic_complete(sa: SuspensionAutomaton) -> SuspensionAutomaton:
    """Make every missing input a self-loop."""
    trans = dict(sa.trans)
    for q in sa.states:
        for a in sa.inputs - sa.inp(q):
            trans[(q, a)] = q
    if len(trans) == len(sa.trans):
        return sa
    return sa.replace(trans=trans)


def alt_incl(impl: SuspensionAutomaton, spec: SuspensionAutomaton) -> bool:
    """Alternating trace inclusion of the ND arenas, decided through ioco."""
    return ioco_check(impl, spec).holds


# action decision sequences and cheating ----------------------------------------

class ActionDecisionSequence(NamedTuple):
    marks: tuple
    proposals: tuple  # (input proposal, output proposal) per round

    def __str__(self):
        parts = [str(self.marks[0])]
        for (a, x), j in zip(self.proposals, self.marks[1:]):
            parts.append(f"<{a},{x}>{j}")
        return "".join(parts)


def actions_of(pi: PlayPrefix) -> ActionDecisionSequence:
    return ActionDecisionSequence(tuple(s.mark for s in pi.states),
                                  tuple((st.action, st.output) for st in pi.steps))


def matched_prefixes(gA: GameArena, gB: GameArena, depth: int):
    """Pairs of prefixes with equal action decision sequences, up to ``depth`` rounds."""
    frontier = [(PlayPrefix(gA.initial), PlayPrefix(gB.initial))]
    for d in range(depth + 1):
        yield from frontier
        if d == depth:
            return
        nxt = []
        for pa, pb in frontier:
            sa_, sb_ = pa.last, pb.last
            acts = sorted(gA.gamma1(sa_) & gB.gamma1(sb_), key=action_key)
            outs = sorted(gA.gamma2(sa_) & gB.gamma2(sb_))
            for a in acts:
                for x in outs:
                    for ta in sorted(gA.moves(sa_, a, x), key=state_key):
                        for tb in gB.moves(sb_, a, x):
                            if ta.mark == tb.mark:
                                nxt.append((pa.extend(a, x, ta), pb.extend(a, x, tb)))
        frontier = nxt


def _all_prefixes(g: GameArena, depth: int):
    frontier = [PlayPrefix(g.initial)]
    for d in range(depth + 1):
        yield from frontier
        if d == depth:
            return
        frontier = [pi.extend(a, x, t)
                    for pi in frontier
                    for a in sorted(g.gamma1(pi.last), key=action_key)
                    for x in sorted(g.gamma2(pi.last))
                    for t in sorted(g.moves(pi.last, a, x), key=state_key)]


def cheats_on(gA: GameArena, sA, gB: GameArena, sB, depth: int,
              reading: str = EXISTENTIAL) -> bool:
    """Whether ``sA`` cheats on ``sB`` on prefixes of at most ``depth`` rounds.

    existential: some matched pair of prefixes has sB proposing a non-theta
    action while sA proposes theta.
    literal: some A-prefix is such that, for every B-prefix, a match with a
    non-theta B proposal forces sA to theta there.  That holds whenever sA
    plays theta on some prefix or some prefix has no non-theta match.
    """
    if reading == EXISTENTIAL:
        return any(sA(pa) == THETA and sB(pb) != THETA
                   for pa, pb in matched_prefixes(gA, gB, depth))
    if reading == LITERAL:
        triggered = {}
        for pa, pb in matched_prefixes(gA, gB, depth):
            if sB(pb) != THETA:
                triggered[actions_of(pa)] = True
        return any(sA(pa) == THETA or actions_of(pa) not in triggered
                   for pa in _all_prefixes(gA, depth))
    raise ValueError(f"unknown cheating reading {reading!r}")


# bounded alternating trace inclusion --------------------------------------------

def _trace_tree(g: GameArena, depth: int) -> dict:
    """Every trace of at most ``depth`` labels reachable by some prefix, with its state."""
    tree = {(): g.initial}
    frontier = [((), g.initial)]
    for _ in range(depth):
        nxt = []
        for rho, s in frontier:
            for a in g.gamma1(s):
                for x in g.gamma2(s):
                    for t in g.moves(s, a, x):
                        rho2 = rho + (a if t.mark == 1 else x,)
                        if rho2 not in tree:
                            tree[rho2] = t
                            nxt.append((rho2, t))
        frontier = nxt
    return tree


def _children(g, s, a, x):
    return sorted(((a if t.mark == 1 else x), t) for t in g.moves(s, a, x))


def outcome_traces(g: GameArena, s1, s2, depth: int) -> frozenset:
    """Traces of outcome prefixes of at most ``depth`` rounds (all resolutions)."""
    traces = {()}
    frontier = [((), g.initial)]
    for _ in range(depth):
        nxt = []
        for rho, s in frontier:
            for label, t in _children(g, s, s1(rho), s2(rho)):
                traces.add(rho + (label,))
                nxt.append((rho + (label,), t))
        frontier = nxt
    return frozenset(traces)


def _output_maps(tree: dict, g: GameArena, depth: int, prefer=None):
    keys = sorted((r for r in tree if len(r) < depth), key=lambda r: (len(r), r))
    options = []
    for r in keys:
        opts = sorted(g.gamma2(tree[r]))
        if prefer is not None and prefer.get(r) in opts:
            opts.remove(prefer[r])
            opts.insert(0, prefer[r])
        options.append(opts)
    return keys, options


def _count(options) -> int:
    n = 1
    for o in options:
        n *= len(o)
    return n


def _tester_maps(gB: GameArena, s2, depth: int):
    """Player-1 trace maps of B that differ on their own outcome tree."""
    def maps(rho, s, remaining):
        if remaining == 0:
            yield {}
            return
        for b in sorted(gB.gamma1(s), key=action_key):
            if b == RESET:
                continue
            subtrees = [list(maps(rho + (label,), t, remaining - 1))
                        for label, t in _children(gB, s, b, s2(rho))]
            for combo in itertools.product(*subtrees):
                m = {rho: b}
                for sub in combo:
                    m.update(sub)
                yield m

    return maps((), gB.initial, depth)


def _check_pair(gA: GameArena, gB: GameArena):
    for g in (gA, gB):
        if g.regime not in (Regime.ND, Regime.IF):
            raise ValueError("alternating trace inclusion is defined on ND arenas")
    _check_alphabets(gA.sa, gB.sa)
    if not gA.sa.is_input_enabled():
        raise NotInputEnabled(f"{gA.sa.name} is not input-enabled")


def alt_incl_bounded(gA: GameArena, gB: GameArena, depth: int,
                     cheat_reading: str = EXISTENTIAL, cap: int = DEFAULT_CAP) -> bool:
    """Brute-force evaluation of alternating trace inclusion up to ``depth`` rounds.

    For all SUT strategies of A, some SUT strategy of B is such that for all
    tester strategies of B some non-cheating tester strategy of A keeps the
    traces of A's outcome prefixes inside those of B's.  Strategies are maps
    on traces shorter than ``depth``.  The three outer quantifiers are
    enumerated; the innermost one is a memoised search over A's trace tree.
    """
    _check_pair(gA, gB)
    if cheat_reading not in (EXISTENTIAL, LITERAL):
        raise ValueError(f"unknown cheating reading {cheat_reading!r}")
    tree_a = _trace_tree(gA, depth)
    tree_b = _trace_tree(gB, depth)
    keys_a, opts_a = _output_maps(tree_a, gA, depth)
    if _count(opts_a) * _count(_output_maps(tree_b, gB, depth)[1]) > cap:
        raise ExplosionGuard("player-2 strategy spaces exceed the cap")

    # traces realised by the same action decision sequence in both arenas
    matched = {}
    a_sequences = {}
    for pa, pb in matched_prefixes(gA, gB, depth - 1):
        rho = tuple(st.action if st.next.mark == 1 else st.output for st in pa.steps)
        matched.setdefault(rho, set()).add(actions_of(pa))
    if cheat_reading == LITERAL:
        for pa in _all_prefixes(gA, depth - 1):
            rho = tuple(st.action if st.next.mark == 1 else st.output for st in pa.steps)
            a_sequences.setdefault(rho, set()).add(actions_of(pa))

    def forbidden_and_ok(sigma_b: dict):
        if cheat_reading == EXISTENTIAL:
            forbid = {rho for rho in matched if sigma_b.get(rho, STOP) != THETA}
            return forbid, True
        # literal: every A-sequence needs a non-theta match, and A never waits
        nontheta = set()
        for rho, seqs in matched.items():
            if sigma_b.get(rho, STOP) != THETA:
                nontheta |= seqs
        ok = all(seqs <= nontheta for seqs in a_sequences.values())
        return set(tree_a), ok

    def exists_tester_a(s2a, traces_b, forbid):
        @lru_cache(maxsize=None)
        def ok(rho):
            if rho not in traces_b:
                return False
            if len(rho) == depth:
                return True
            s = tree_a[rho]
            x = s2a[rho]
            for a in sorted(gA.gamma1(s), key=action_key):
                if a == RESET or (a == THETA and rho in forbid):
                    continue
                if all(ok(rho + (label,)) for label, _ in _children(gA, s, a, x)):
                    return True
            return False

        return ok(())

    for choice_a in itertools.product(*opts_a):
        s2a = dict(zip(keys_a, choice_a))
        keys_b, opts_b = _output_maps(tree_b, gB, depth, prefer=s2a)
        found = False
        for choice_b in itertools.product(*opts_b):
            s2b = dict(zip(keys_b, choice_b))
            s2b_fn = s2b.__getitem__
            good = True
            for sigma_b in _tester_maps(gB, s2b_fn, depth):
                traces_b = outcome_traces(gB, lambda r: sigma_b.get(r, STOP), s2b_fn, depth)
                forbid, pre = forbidden_and_ok(sigma_b)
                if not pre or not exists_tester_a(s2a, traces_b, frozenset(forbid)):
                    good = False
                    break
            if good:
                found = True
                break
        if not found:
            return False
    return True


def alt_incl_recursive(gA: GameArena, gB: GameArena, depth: int) -> bool:
    """The same bounded relation (existential cheating reading) evaluated
    trace by trace.

    Trace-based strategies on different subtrees are independent and the
    inclusion condition is monotone, so each quantifier can be pushed down
    to the node it decides: for every A output there is a B output such that
    for every B tester action some non-cheating A tester action keeps A's
    successor traces among B's, and recursively so below them.
    """
    _check_pair(gA, gB)
    tree_a = _trace_tree(gA, depth)
    tree_b = _trace_tree(gB, depth)
    matched = set()
    for pa, _ in matched_prefixes(gA, gB, depth - 1):
        matched.add(tuple(st.action if st.next.mark == 1 else st.output for st in pa.steps))

    @lru_cache(maxsize=None)
    def value(rho):
        if len(rho) == depth:
            return True
        sa_, sb_ = tree_a[rho], tree_b[rho]
        acts_a = [a for a in sorted(gA.gamma1(sa_), key=action_key) if a != RESET]
        acts_b = [b for b in sorted(gB.gamma1(sb_), key=action_key) if b != RESET]
        for xa in sorted(gA.gamma2(sa_)):
            if not any(
                    all(any(_node_ok(rho, a, b, xa, xb)
                            for a in acts_a if not (a == THETA and b != THETA and rho in matched))
                        for b in acts_b)
                    for xb in sorted(gB.gamma2(sb_))):
                return False
        return True

    def _node_ok(rho, a, b, xa, xb):
        kids_a = {label for label, _ in _children(gA, tree_a[rho], a, xa)}
        kids_b = {label for label, _ in _children(gB, tree_b[rho], b, xb)}
        return kids_a <= kids_b and all(value(rho + (mu,)) for mu in kids_a)

    return value(())


def bounded_alt_incl_sa(impl: SuspensionAutomaton, spec: SuspensionAutomaton, depth: int,
                        cheat_reading: str = EXISTENTIAL, cap: int = DEFAULT_CAP) -> bool:
    return alt_incl_bounded(build_arena(impl, Regime.ND), build_arena(spec, Regime.ND),
                            depth, cheat_reading, cap)
