"""Reachability synthesis for the tester.

``solve_reach`` is the attractor: ranks are the number of rounds the tester
needs to force a goal state, whatever the SUT proposes and however
conflicts are resolved.  ``solve_reach_bruteforce`` is the depth-bounded
game-tree search used to validate it.  For the input-fair regime there are
two routes: ``solve_reach_if`` (the input-eager answer plus a retry
strategy for the nondeterministic arena) and ``solve_reach_fair``, which
solves the fairness game on the nondeterministic arena directly.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import ModelError
from .game_arena import (BOTTOM, RESET, STOP, THETA, ArenaState, GameArena, Regime,
                         action_key, state_key)
from .sa_core import DELTA
from .strategy_kernel import FiniteTraceStrategy, PlayPrefix, ReachabilityGoal, trace_of

INF = float("inf")


@dataclass
class SynthesisResult:
    winning: bool
    strategy: FiniteTraceStrategy | None
    rank: dict = field(default_factory=dict)
    retry: RetryStrategy | None = None
    requires_reset: bool = False


def cpre(g: GameArena, t) -> frozenset:
    """States where some tester action forces the next state into ``t``."""
    t = frozenset(t)
    result = set()
    for s in g.states:
        outputs = g.gamma2(s)
        for a in g.gamma1(s):
            if all((m := g.moves(s, a, x)) and m <= t for x in outputs):
                result.add(s)
                break
    return frozenset(result)


def attractor_ranks(g: GameArena, goal: ReachabilityGoal) -> dict:
    layer = goal.lifted() & g.states
    rank = {s: 0 for s in layer}
    won = frozenset(layer)
    i = 0
    while True:
        i += 1
        bigger = cpre(g, won) | won
        fresh = bigger - won
        if not fresh:
            return rank
        for s in fresh:
            rank[s] = i
        won = bigger


def _worst_rank(g, rank, s, a):
    worst = -1
    for x in g.gamma2(s):
        succ = g.moves(s, a, x)
        if not succ:
            return INF
        for t in succ:
            worst = max(worst, rank.get(t, INF))
    return worst


def best_action(g: GameArena, rank: dict, s: ArenaState):
    """Action minimising the worst successor rank; stop is never chosen."""
    candidates = sorted((a for a in g.gamma1(s) if a != STOP), key=action_key)
    scored = [(_worst_rank(g, rank, s, a), action_key(a), a) for a in candidates]
    if not scored:
        return None, INF
    worst, _, a = min(scored)
    return a, worst


def extract_strategy(g: GameArena, goal: ReachabilityGoal, rank: dict) -> FiniteTraceStrategy:
    """Rank-decreasing choices keyed on the trace that reaches each arena state."""
    decisions = {}
    queue = deque([((), g.initial)])
    while queue:
        rho, s = queue.popleft()
        if rho in decisions:
            continue
        if s in goal:
            decisions[rho] = STOP
            continue
        a, worst = best_action(g, rank, s)
        if a is None or worst >= rank[s]:
            raise ModelError(f"no rank-decreasing action at {s}")
        decisions[rho] = a
        for x in sorted(g.gamma2(s)):
            for t in sorted(g.moves(s, a, x), key=state_key):
                queue.append((rho + (a if t.mark == 1 else x,), t))
    return FiniteTraceStrategy(decisions)


def solve_reach(g: GameArena, goal: ReachabilityGoal) -> SynthesisResult:
    if g.regime is Regime.IF:
        raise ModelError("input-fair winning is not a plain reachability game; use solve_reach_if")
    goal.check(g.sa)
    rank = attractor_ranks(g, goal)
    if g.initial not in rank:
        return SynthesisResult(False, None, rank)
    return SynthesisResult(True, extract_strategy(g, goal, rank), rank)


def solve_reach_bruteforce(g: GameArena, goal: ReachabilityGoal, depth: int) -> bool:
    """Exhaustive search of the game tree up to ``depth`` rounds.

    Player 2 and the conflict resolution are adversarial: the tester needs
    one action that works for every output and every successor.
    """
    if g.regime is Regime.IF:
        raise ModelError("brute force applies to the IE, OE and ND regimes")

    @lru_cache(maxsize=None)
    def win(s, d):
        if s in goal:
            return True
        if d == 0:
            return False
        for a in sorted(g.gamma1(s), key=action_key):
            if all(g.moves(s, a, x) and all(win(t, d - 1) for t in g.moves(s, a, x))
                   for x in g.gamma2(s)):
                return True
        return False

    return win(g.initial, depth)


# input-fair regime ------------------------------------------------------------

class RetryStrategy:
    """Follows an input-eager witness on a nondeterministic arena.

    Decisions are looked up on the trace since the last ``reset?``.  When
    the SUT diverts the play off the witness (an output was executed where
    the witness proposed an input) the strategy resets and starts over.
    Without a reset action it keeps to the positional attractor choice where
    one exists and stops otherwise.
    """

    def __init__(self, witness: FiniteTraceStrategy, ie_arena: GameArena, rank: dict,
                 resettable: bool):
        self.witness = witness
        self.ie_arena = ie_arena
        self.rank = rank
        self.resettable = resettable

    def __call__(self, pi: PlayPrefix) -> str:
        s = pi.last
        if s.base is None:
            return STOP
        rho = trace_of(pi)
        if RESET in rho:
            rho = rho[len(rho) - rho[::-1].index(RESET):]
        decision = self.witness.decisions.get(rho)
        if decision is not None:
            return decision
        if self.resettable:
            return RESET
        if s in self.rank:
            return best_action(self.ie_arena, self.rank, s)[0] if self.rank[s] else STOP
        return STOP


def _diversion_needs_reset(sa, witness: FiniteTraceStrategy) -> bool:
    """True if some diversion from the witness can never return to the
    state where the diverted input was proposed."""
    def reach(q):
        seen, stack = {q}, [q]
        while stack:
            p = stack.pop()
            for a in sa.inp(p) | sa.out(p):
                p2 = sa.step(p, a)
                if p2 not in seen:
                    seen.add(p2)
                    stack.append(p2)
        return seen

    for rho, a in witness.decisions.items():
        if a in (STOP, THETA):
            continue
        q = sa.state_after(rho)
        for x in sa.out(q) - {DELTA}:
            if q not in reach(sa.step(q, x)):
                return True
    return False


def solve_reach_if(g_nd: GameArena, goal: ReachabilityGoal) -> SynthesisResult:
    if g_nd.regime not in (Regime.ND, Regime.IF):
        raise ModelError("solve_reach_if expects an arena with nondeterministic moves")
    ie = g_nd.with_regime(Regime.IE, resettable=False)
    res = solve_reach(ie, goal)
    if not res.winning:
        return res
    res.retry = RetryStrategy(res.strategy, ie, res.rank, g_nd.resettable)
    res.requires_reset = (not g_nd.resettable) and _diversion_needs_reset(g_nd.sa, res.strategy)
    return res


def solve_reach_fair(g: GameArena, goal: ReachabilityGoal) -> bool:
    """Decide whether the tester wins on all input-fair plays of the ND arena.

    A play is fair when every input proposed at a state is, at some point,
    executed at that state.  The game is solved on the product of the arena
    with the status of every (state, input) pair: never proposed, pending,
    or executed.  The SUT wins by avoiding the goal while visiting
    no-pending states infinitely often (a Buchi condition); the tester wins
    everywhere else.
    """
    goal.check(g.sa)
    nd = g.with_regime(Regime.ND, resettable=False)
    sa = nd.sa
    pairs = sorted((q, a) for q in sa.states for a in sa.inp(q))
    index = {p: i for i, p in enumerate(pairs)}

    init = (nd.initial, (0,) * len(pairs))
    ids = {init: 0}
    nodes = [init]
    succ = []  # succ[v][a_index] -> list over x of successor-id lists
    queue = deque([0])
    goal_nodes = set()
    while queue:
        v = queue.popleft()
        s, status = nodes[v]
        while len(succ) <= v:
            succ.append(None)
        if s in goal:
            goal_nodes.add(v)
            succ[v] = []
            continue
        per_action = []
        for a in sorted(nd.gamma1(s), key=action_key):
            per_output = []
            for x in sorted(nd.gamma2(s)):
                targets = []
                for t in nd.moves(s, a, x):
                    st = status
                    if s.base is not None and a in sa.inputs:
                        i = index[(s.base, a)]
                        if t.mark == 1:
                            st = st[:i] + (2,) + st[i + 1:]
                        elif st[i] == 0:
                            st = st[:i] + (1,) + st[i + 1:]
                    node = (t, st)
                    if node not in ids:
                        ids[node] = len(nodes)
                        nodes.append(node)
                        queue.append(ids[node])
                    targets.append(ids[node])
                per_output.append(targets)
            per_action.append(per_output)
        succ[v] = per_action

    n = len(nodes)
    safe = [v not in goal_nodes for v in range(n)]
    no_pending = [safe[v] and 1 not in nodes[v][1] for v in range(n)]
    preds = [[] for _ in range(n)]
    for v in range(n):
        for ai, per_output in enumerate(succ[v]):
            for targets in per_output:
                for w in targets:
                    preds[w].append((v, ai))

    def sut_cpre_member(v, target):
        return all(any(any(target[w] for w in targets) for targets in per_output)
                   for per_output in succ[v])

    def sut_attractor(base):
        """Least Y containing ``base`` and every safe state from which the SUT
        can force the next state into Y."""
        inside = list(base)
        sat = set()
        missing = [len(succ[v]) for v in range(n)]
        queue = deque(v for v in range(n) if inside[v])
        while queue:
            w = queue.popleft()
            for v, ai in preds[w]:
                if inside[v] or not safe[v] or (v, ai) in sat:
                    continue
                sat.add((v, ai))
                missing[v] -= 1
                if missing[v] == 0:
                    inside[v] = True
                    queue.append(v)
        return inside

    z = list(safe)
    while True:
        base = [no_pending[v] and sut_cpre_member(v, z) for v in range(n)]
        y = sut_attractor(base)
        if y == z:
            break
        z = y
    return not z[0]
