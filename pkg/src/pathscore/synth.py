"""Fault injection on golden paths.

Each perturbation kind targets one failure mode: redundant self-loops,
skipped progress steps, swapped steps, harmful calls and wrong
parameters. Random choices come from ``random.Random(seed)`` so a
perturbation list fully determines its output.
"""

from __future__ import annotations

import random
import re
from collections.abc import Sequence
from dataclasses import dataclass

from .alphabet import SENTINEL, Action
from .automaton import GoldenSet, TaskAutomaton, TransitionClass
from .condense import condense
from .errors import InvalidPositionError, ValidationError

INSERT_SELF_LOOP = "insert_self_loop"
DELETE_PROGRESS = "delete_progress"
TRANSPOSE_ADJACENT = "transpose_adjacent"
INJECT_HARMFUL = "inject_harmful"
CORRUPT_PARAMETER = "corrupt_parameter"
KINDS = (INSERT_SELF_LOOP, DELETE_PROGRESS, TRANSPOSE_ADJACENT, INJECT_HARMFUL, CORRUPT_PARAMETER)


@dataclass(frozen=True)
class Perturbation:
    kind: str
    position: int
    payload: Action | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown perturbation kind {self.kind!r}")


def _state_at(automaton: TaskAutomaton, path: Sequence[Action], position: int) -> str:
    return automaton.run(path[:position]).final_state


def _corruptions(automaton: TaskAutomaton, state: str, token: Action) -> list[Action]:
    out = []
    for a in automaton.alphabet:
        if a.function_name != token.function_name or a == token:
            continue
        target = automaton.target(state, a)
        if target is None or target == state:
            out.append(a)
    return out


def apply(path: Sequence[Action], p: Perturbation, automaton: TaskAutomaton) -> list[Action]:
    path = list(path)
    rng = random.Random(p.seed)
    pos = p.position
    n = len(path)

    if p.kind in (INSERT_SELF_LOOP, INJECT_HARMFUL):
        if not 0 <= pos <= n:
            raise InvalidPositionError(f"{p.kind} position {pos} outside 0..{n}")
        state = _state_at(automaton, path, pos)
        if p.kind == INSERT_SELF_LOOP:
            options = automaton.self_loops(state)
            if p.payload is not None and p.payload not in options:
                raise InvalidPositionError(f"{p.payload!r} is not a self-loop at {state}")
        else:
            options = [SENTINEL] + [a for a in automaton.alphabet if automaton.target(state, a) is None]
            if p.payload is not None and automaton.target(state, p.payload) is not None:
                raise InvalidPositionError(f"{p.payload!r} is defined at {state}")
        if not options:
            raise InvalidPositionError(f"no self-loop available at state {state}")
        path.insert(pos, p.payload if p.payload is not None else rng.choice(options))
        return path

    if not 0 <= pos < n:
        raise InvalidPositionError(f"{p.kind} position {pos} outside 0..{n - 1}")

    if p.kind == DELETE_PROGRESS:
        if automaton.run(path).classes[pos] is not TransitionClass.PROGRESS:
            raise InvalidPositionError(f"step {pos} is not a progress step")
        del path[pos]
    elif p.kind == TRANSPOSE_ADJACENT:
        if pos + 1 >= n or path[pos] == path[pos + 1]:
            raise InvalidPositionError(f"cannot transpose at {pos}")
        path[pos], path[pos + 1] = path[pos + 1], path[pos]
    else:
        state = _state_at(automaton, path, pos)
        if p.payload is not None:
            if p.payload == path[pos]:
                raise InvalidPositionError("corruption payload equals the original token")
            path[pos] = p.payload
        else:
            options = _corruptions(automaton, state, path[pos])
            path[pos] = rng.choice(options) if options else SENTINEL
    return path


def synthesize(golden: Sequence[Action], perturbations: Sequence[Perturbation],
               automaton: TaskAutomaton) -> list[Action]:
    """Apply perturbations left to right; positions refer to the current path."""
    path = list(golden)
    for p in perturbations:
        path = apply(path, p, automaton)
    return path


def _is_golden(path: Sequence[Action], automaton: TaskAutomaton, goldens: GoldenSet) -> bool:
    return condense(automaton.run(path)).tokens in set(goldens.paths)


def valid_positions(kind: str, path: Sequence[Action], automaton: TaskAutomaton,
                    goldens: GoldenSet | None = None) -> list[int]:
    """Positions where ``kind`` applies; with ``goldens``, only those that introduce a fault.

    A swap or deletion that lands on another golden path (e.g. two
    independent steps done in the other valid order) is not a fault.
    """
    path = list(path)
    n = len(path)
    out = []
    if kind == INSERT_SELF_LOOP:
        out = [i for i in range(n + 1) if automaton.self_loops(_state_at(automaton, path, i))]
        return out
    if kind == INJECT_HARMFUL:
        return list(range(n + 1))
    run = automaton.run(path)
    for i in range(n):
        if kind == DELETE_PROGRESS and run.classes[i] is not TransitionClass.PROGRESS:
            continue
        if kind == TRANSPOSE_ADJACENT and (i + 1 >= n or path[i] == path[i + 1]):
            continue
        if goldens is not None:
            if kind == CORRUPT_PARAMETER:
                state = run.states_visited[i]
                payloads = _corruptions(automaton, state, path[i]) or [SENTINEL]
                trials = [apply(path, Perturbation(kind, i, a), automaton) for a in payloads]
            else:
                trials = [apply(path, Perturbation(kind, i), automaton)]
            if any(_is_golden(t, automaton, goldens) for t in trials):
                continue
        out.append(i)
    return out


def random_perturbation(kind: str, path: Sequence[Action], automaton: TaskAutomaton,
                        rng: random.Random, goldens: GoldenSet | None = None) -> Perturbation | None:
    positions = valid_positions(kind, path, automaton, goldens)
    if not positions:
        return None
    return Perturbation(kind, rng.choice(positions), seed=rng.randrange(2**31))


@dataclass
class FaultSpec:
    """Parsed ``--faults`` item: ``kind``, ``kind@pos`` or ``kind*count``."""

    kind: str
    position: int | None = None
    count: int = 1


_FAULT_RE = re.compile(r"^(?P<kind>[a-z_]+)(?:@(?P<pos>\d+))?(?:\*(?P<count>\d+))?$")


def parse_faults(text: str) -> list[FaultSpec]:
    specs = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        m = _FAULT_RE.match(item)
        if not m or m["kind"] not in KINDS:
            raise ValidationError(f"bad fault spec {item!r}; kinds are {', '.join(KINDS)}")
        specs.append(FaultSpec(m["kind"], int(m["pos"]) if m["pos"] else None,
                               int(m["count"]) if m["count"] else 1))
    return specs


def synthesize_from_specs(golden: Sequence[Action], specs: Sequence[FaultSpec],
                          automaton: TaskAutomaton, seed: int,
                          goldens: GoldenSet | None = None) -> tuple[list[Action], list[Perturbation]]:
    """Draw concrete perturbations for ``specs`` and apply them in order.

    Fault kinds with no applicable position on the current path are
    skipped, and the returned perturbation list shows what was applied.
    """
    rng = random.Random(seed)
    path = list(golden)
    applied = []
    for spec in specs:
        for _ in range(spec.count):
            if spec.position is not None:
                p = Perturbation(spec.kind, spec.position, seed=rng.randrange(2**31))
            else:
                p = random_perturbation(spec.kind, path, automaton, rng, goldens)
                if p is None:
                    continue
            path = apply(path, p, automaton)
            applied.append(p)
    return path, applied
