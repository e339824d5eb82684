"""Final-state and response-style pass/fail checks, for contrast with path metrics.

These are automaton-level stand-ins for the usual leaderboard checks
(labelled ``baseline-state`` and ``baseline-response`` in reports), not
reimplementations of any AST matcher.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .alphabet import Action
from .automaton import GoldenSet, RunResult
from .condense import CondensedPath


@dataclass(frozen=True)
class BaselineReport:
    state_pass: bool
    response_pass: bool


def backend_state(actions: Iterable[Action]) -> tuple[tuple[str, str], ...]:
    """Fold declared write effects over every executed call.

    Unlike the control state, the backend sees every call, including
    ones the automaton classifies as harmful.
    """
    state: dict[str, str] = {}
    for action in actions:
        for var, value in action.effects:
            state[var] = value
    return tuple(sorted(state.items()))


def _uses_effects(goldens: GoldenSet) -> bool:
    return any(a.effects for path in goldens.paths for a in path)


def state_check(run_result: RunResult, goldens: GoldenSet) -> bool:
    """Does the run end where some golden path ends?

    If the task declares backend effects the comparison is on the folded
    backend state, otherwise on the automaton's control state.
    """
    if _uses_effects(goldens):
        final = backend_state(run_result.actions)
        return any(final == backend_state(path) for path in goldens.paths)
    return run_result.final_state in goldens.end_states


def is_subsequence(needle: Sequence, haystack: Sequence) -> bool:
    it = iter(haystack)
    return all(any(tok == h for h in it) for tok in needle)


def response_check(condensed: CondensedPath | Sequence[Action], goldens: GoldenSet) -> bool:
    tokens = condensed.tokens if isinstance(condensed, CondensedPath) else condensed
    return any(is_subsequence(path, tokens) for path in goldens.paths)


def baseline_report(run_result: RunResult, condensed: CondensedPath,
                    goldens: GoldenSet) -> BaselineReport:
    return BaselineReport(state_check(run_result, goldens), response_check(condensed, goldens))
