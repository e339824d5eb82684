"""Action-path condensation: drop self-loops, keep progress and harmful steps."""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import Action
from .automaton import RunResult, TransitionClass


@dataclass(frozen=True)
class CondensedPath:
    tokens: tuple[Action, ...]
    harm_mask: tuple[int, ...]
    source_indices: tuple[int, ...]
    # control state before each retained token
    states_before: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def harmful_count(self) -> int:
        return sum(self.harm_mask)


def condense(run_result: RunResult) -> CondensedPath:
    # classes are per-step and state-dependent, so the same symbol can be
    # dropped in one state and retained in another
    keep = [i for i, cls in enumerate(run_result.classes) if cls is not TransitionClass.SELF_LOOP]
    return CondensedPath(
        tokens=tuple(run_result.actions[i] for i in keep),
        harm_mask=tuple(run_result.harm_mask_raw[i] for i in keep),
        source_indices=tuple(keep),
        states_before=tuple(run_result.states_visited[i] for i in keep),
    )
