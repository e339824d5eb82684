"""Harm-local refinement of the reference set.

Every harmful token of the condensed agent path is either deleted or
replaced by a read that is a defined self-loop in the control state the
agent was in. Progress tokens are left alone. Each repaired sequence is
kept, and when it stops on a state that lies on a golden path it is also
completed with that path's remaining suffix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .alphabet import READ, Action
from .automaton import GoldenSet, TaskAutomaton
from .condense import CondensedPath
from .errors import EmptyCandidateSetError
from .metrics import levenshtein, path_correctness

DEFAULT_HLR_CAP = 256
DELETE = None


@dataclass(frozen=True)
class Provenance:
    # one entry per harmful index: None for delete, else the inserted read
    choices: tuple[Action | None, ...]
    golden_id: int | None = None  # golden whose suffix was appended


@dataclass(frozen=True)
class HLRCandidateSet:
    candidates: tuple[tuple[Action, ...], ...]
    provenance: tuple[Provenance, ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.candidates)


def repair_options(condensed: CondensedPath, automaton: TaskAutomaton) -> list[list[Action | None]]:
    """Choice list for each harmful index: delete, then legal reads in alphabet order."""
    states = condensed.states_before or _replay_states(condensed, automaton)
    options = []
    for k, harmful in enumerate(condensed.harm_mask):
        if harmful:
            reads = [a for a in automaton.self_loops(states[k]) if a.kind == READ]
            options.append([DELETE, *reads])
    return options


def _replay_states(condensed: CondensedPath, automaton: TaskAutomaton) -> tuple[str, ...]:
    run = automaton.run(condensed.tokens)
    return run.states_visited[:-1]


def _choice_product(options: list[list[Action | None]], budget: int):
    """Yield choice tuples ordered by number of replacements, at most ``budget``."""
    emitted = 0
    n = len(options)
    for n_replace in range(n + 1):
        for positions in itertools.combinations(range(n), n_replace):
            pools = [options[i][1:] if i in positions else [DELETE] for i in range(n)]
            for combo in itertools.product(*pools):
                if emitted >= budget:
                    return
                emitted += 1
                yield combo


def _product_size(options) -> int:
    size = 1
    for opts in options:
        size *= len(opts)
    return size


def generate_candidates(condensed: CondensedPath, automaton: TaskAutomaton,
                        goldens: GoldenSet, cap: int = DEFAULT_HLR_CAP) -> HLRCandidateSet:
    if cap < 1:
        raise ValueError("cap must be positive")
    options = repair_options(condensed, automaton)
    budget = max(cap * 16, 4096)
    truncated = _product_size(options) > budget

    pool: dict[tuple[Action, ...], Provenance] = {}
    for combo in _choice_product(options, budget):
        repaired: list[Action] = []
        it = iter(combo)
        for tok, harmful in zip(condensed.tokens, condensed.harm_mask):
            if harmful:
                choice = next(it)
                if choice is not DELETE:
                    repaired.append(choice)
            else:
                repaired.append(tok)
        seq = tuple(repaired)
        pool.setdefault(seq, Provenance(combo))
        end = automaton.run(seq).final_state
        for gid, states in enumerate(goldens.state_paths):
            if end in states:
                first = states.index(end)
                extended = seq + goldens.paths[gid][first:]
                pool.setdefault(extended, Provenance(combo, gid))

    agent = condensed.tokens
    ordered = sorted(pool.items(), key=lambda kv: (
        levenshtein(kv[0], agent), len(kv[0]), tuple(a.action_id for a in kv[0])))
    if len(ordered) > cap:
        truncated = True
        ordered = ordered[:cap]
    return HLRCandidateSet(
        candidates=tuple(seq for seq, _ in ordered),
        provenance=tuple(p for _, p in ordered),
        truncated=truncated,
    )


def pc_hlr(condensed, candidate_set: HLRCandidateSet) -> tuple[float, int]:
    """Path correctness with the refined candidates as the reference set."""
    if not candidate_set.candidates:
        raise EmptyCandidateSetError("HLR candidate set is empty")
    return path_correctness(condensed, candidate_set.candidates)
