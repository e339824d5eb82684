"""Score tool-calling agent traces against task automata.

Typical use::

    from pathscore import load_world, Evaluator, read_traces
    world = load_world("farm.world.json")
    reports = Evaluator(world).evaluate_all(read_traces("run.jsonl"))
"""

from importlib.resources import files

from .alphabet import SENTINEL, Action, Alphabet, RawCall, build_alphabet, canonicalize, normalize_call
from .automaton import (
    GoldenSet,
    RunResult,
    TaskAutomaton,
    TransitionClass,
    World,
    enumerate_goldens,
    load_world,
    load_world_spec,
    parse_world,
    run,
    step,
)
from .baselines import BaselineReport, response_check, state_check
from .condense import CondensedPath, condense
from .evaluate import Evaluator, TraceReport, evaluate_actions, read_traces
from .hlr import HLRCandidateSet, generate_candidates, pc_hlr
from .metrics import (
    MetricConfig,
    MetricReport,
    efficiency,
    harm_rate,
    kendall_order_score,
    levenshtein,
    nld,
    path_correctness,
    pc_ktc,
    prefix_criticality,
)

__version__ = "0.1.0"

__all__ = [
    "SENTINEL",
    "Action",
    "Alphabet",
    "RawCall",
    "build_alphabet",
    "canonicalize",
    "normalize_call",
    "GoldenSet",
    "RunResult",
    "TaskAutomaton",
    "TransitionClass",
    "World",
    "enumerate_goldens",
    "load_world",
    "load_world_spec",
    "parse_world",
    "run",
    "step",
    "BaselineReport",
    "response_check",
    "state_check",
    "CondensedPath",
    "condense",
    "Evaluator",
    "TraceReport",
    "evaluate_actions",
    "read_traces",
    "HLRCandidateSet",
    "generate_candidates",
    "pc_hlr",
    "MetricConfig",
    "MetricReport",
    "efficiency",
    "harm_rate",
    "kendall_order_score",
    "levenshtein",
    "nld",
    "path_correctness",
    "pc_ktc",
    "prefix_criticality",
    "bundled_world",
]


def bundled_world(name: str):
    """Path to a sample world shipped with the package (farm, communication, legal, arm)."""
    return files(__name__) / "worlds" / f"{name}.world.json"
