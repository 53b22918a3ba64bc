"""Test games for suspension automata.

Specifications are suspension automata; under a chosen test assumption each
one induces a concurrent two-player game in which test cases are finite
tester strategies, test derivation is strategy synthesis, and ioco is
alternating trace inclusion.
"""
from importlib import resources

from .conformance import alt_incl, alt_incl_bounded, angelic_complete, ioco_check
from .game_arena import BOTTOM, STOP, THETA, ArenaState, GameArena, Regime, build_arena
from .sa_core import DELTA, SuspensionAutomaton, load_sa, load_sa_file
from .strategy_kernel import FiniteTraceStrategy, PlayPrefix, ReachabilityGoal, trace_of
from .synthesis import solve_reach, solve_reach_fair, solve_reach_if
from .testgen import TestCase, gen_suite, strategy_to_test, test_to_strategy, validate_testcase

__version__ = "0.1.0"


def fixture_path(name: str) -> str:
    """Path of a bundled example model (printer.sa, mp3.sa, ...)."""
    return str(resources.files(__name__).joinpath("fixtures", name))
