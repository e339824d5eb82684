"""Task automata: execution with harmful-transition semantics and golden paths."""

from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from types import MappingProxyType
from typing import Any

from .alphabet import Action, Alphabet, build_alphabet
from .errors import (
    CyclicProgressGraphError,
    EmptyGoldenSetError,
    GoldenCapExceededError,
    ParseError,
    PathScoreError,
    UnknownStateError,
    ValidationError,
)

WORLD_FORMAT = "pathscore.world/1"
DEFAULT_GOLDEN_CAP = 512


class TransitionClass(str, enum.Enum):
    PROGRESS = "progress"
    SELF_LOOP = "self_loop"
    HARMFUL = "harmful"


@dataclass(frozen=True)
class TaskAutomaton:
    task_id: str
    states: tuple[str, ...]
    alphabet: Alphabet
    transitions: Mapping[tuple[str, int], str]
    initial: str
    terminals: frozenset[str]
    prompt: str = ""
    world: str = ""
    declared_goldens: tuple[tuple[Action, ...], ...] | None = None

    def __post_init__(self):
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            raise ValidationError(f"{self.task_id}: duplicate state identifiers")
        if self.initial not in state_set:
            raise ValidationError(f"{self.task_id}: initial state {self.initial!r} not in states")
        stray = self.terminals - state_set
        if stray:
            raise ValidationError(f"{self.task_id}: terminals {sorted(stray)} not in states")
        ids = {a.action_id for a in self.alphabet}
        for (src, aid), dst in self.transitions.items():
            if src not in state_set or dst not in state_set:
                raise ValidationError(
                    f"{self.task_id}: transition endpoint {src!r}->{dst!r} not in states")
            if aid not in ids:
                raise ValidationError(f"{self.task_id}: transition action {aid} not in alphabet")
        object.__setattr__(self, "transitions", MappingProxyType(dict(self.transitions)))

    def target(self, state: str, action: Action) -> str | None:
        return self.transitions.get((state, action.action_id))

    def step(self, state: str, action: Action) -> tuple[str, TransitionClass]:
        return step(self, state, action)

    def run(self, actions: Iterable[Action]) -> RunResult:
        return run(self, actions)

    def progress_edges(self) -> list[tuple[str, Action, str]]:
        by_id = {a.action_id: a for a in self.alphabet}
        return sorted(
            ((src, by_id[aid], dst) for (src, aid), dst in self.transitions.items() if src != dst),
            key=lambda e: (e[0], e[1].action_id),
        )

    def self_loops(self, state: str) -> list[Action]:
        """Actions with a defined self-loop at ``state``, in alphabet order."""
        return [a for a in self.alphabet if self.transitions.get((state, a.action_id)) == state]


@dataclass(frozen=True)
class RunResult:
    states_visited: tuple[str, ...]
    classes: tuple[TransitionClass, ...]
    harm_mask_raw: tuple[int, ...]
    final_state: str
    actions: tuple[Action, ...]

    @property
    def harmful_count(self) -> int:
        return sum(self.harm_mask_raw)


@dataclass(frozen=True)
class GoldenSet:
    paths: tuple[tuple[Action, ...], ...]
    lengths: tuple[int, ...]
    end_states: tuple[str, ...]
    state_paths: tuple[tuple[str, ...], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


def step(automaton: TaskAutomaton, state: str, action: Action) -> tuple[str, TransitionClass]:
    """Apply one action. Undefined transitions are harmful and keep the state."""
    if state not in automaton.states:
        raise UnknownStateError(f"{state!r} is not a state of task {automaton.task_id!r}")
    target = automaton.transitions.get((state, action.action_id))
    if target is None:
        return state, TransitionClass.HARMFUL
    if target == state:
        return state, TransitionClass.SELF_LOOP
    return target, TransitionClass.PROGRESS


def run(automaton: TaskAutomaton, actions: Iterable[Action]) -> RunResult:
    actions = tuple(actions)
    state = automaton.initial
    visited = [state]
    classes = []
    for action in actions:
        state, cls = step(automaton, state, action)
        visited.append(state)
        classes.append(cls)
    return RunResult(
        states_visited=tuple(visited),
        classes=tuple(classes),
        harm_mask_raw=tuple(int(c is TransitionClass.HARMFUL) for c in classes),
        final_state=state,
        actions=actions,
    )


def enumerate_goldens(automaton: TaskAutomaton, cap: int = DEFAULT_GOLDEN_CAP) -> GoldenSet:
    """All simple initial-to-terminal paths over progress edges.

    Paths are recorded whenever a terminal state is reached, including
    paths that pass through one terminal on the way to another. Output is
    sorted by action-id sequence. Exceeding ``cap`` is an error rather
    than a truncation, since a partial set would bias the max over
    references.
    """
    edges = automaton.progress_edges()
    graph: dict[str, list[str]] = {s: [] for s in automaton.states}
    adjacency: dict[str, list[tuple[Action, str]]] = {s: [] for s in automaton.states}
    for src, action, dst in edges:
        graph[dst].append(src)
        adjacency[src].append((action, dst))
    try:
        tuple(TopologicalSorter(graph).static_order())
    except CycleError as exc:
        cycle = " -> ".join(exc.args[1]) if len(exc.args) > 1 else "?"
        raise CyclicProgressGraphError(
            f"task {automaton.task_id!r} has a progress cycle: {cycle}") from None

    found: list[tuple[tuple[Action, ...], tuple[str, ...]]] = []
    # iterative DFS; the progress graph is acyclic so every path is simple
    stack: list[tuple[str, tuple[Action, ...], tuple[str, ...]]] = [
        (automaton.initial, (), (automaton.initial,))]
    while stack:
        state, path, states = stack.pop()
        if state in automaton.terminals:
            found.append((path, states))
            if len(found) > cap:
                raise GoldenCapExceededError(
                    f"task {automaton.task_id!r} has more than {cap} golden paths")
        for action, dst in reversed(adjacency[state]):
            stack.append((dst, path + (action,), states + (dst,)))

    if not found:
        raise EmptyGoldenSetError(f"task {automaton.task_id!r}: no progress path reaches a terminal")
    found.sort(key=lambda item: tuple(a.action_id for a in item[0]))
    return GoldenSet(
        paths=tuple(p for p, _ in found),
        lengths=tuple(len(p) for p, _ in found),
        end_states=tuple(s[-1] for _, s in found),
        state_paths=tuple(s for _, s in found),
    )


# -- world files -------------------------------------------------------------

@dataclass(frozen=True)
class World:
    name: str
    alphabet: Alphabet
    tasks: Mapping[str, TaskAutomaton]

    def task(self, task_id: str) -> TaskAutomaton:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise ValidationError(
                f"world {self.name!r} has no task {task_id!r}") from None


def _transition_triple(tr: Any) -> tuple[str, Any, str]:
    if isinstance(tr, Mapping):
        try:
            return str(tr["from"]), tr["action"], str(tr["to"])
        except KeyError as exc:
            raise ValidationError(f"transition missing field {exc.args[0]!r}: {tr!r}") from None
    if isinstance(tr, Sequence) and not isinstance(tr, str) and len(tr) == 3:
        return str(tr[0]), tr[1], str(tr[2])
    raise ValidationError(f"malformed transition {tr!r}")


def _build_task(doc: Mapping[str, Any], alphabet: Alphabet, world: str) -> TaskAutomaton:
    task_id = doc.get("task_id")
    if not task_id:
        raise ValidationError("task without task_id")
    states = [str(s) for s in doc.get("states", [])]
    triples = [_transition_triple(tr) for tr in doc.get("transitions", [])]
    # shorthand: {"state" or "*": [action refs]} adds self-loops
    for where, refs in (doc.get("self_loops") or {}).items():
        targets = states if where == "*" else [str(where)]
        triples.extend((s, ref, s) for s in targets for ref in refs)
    transitions: dict[tuple[str, int], str] = {}
    for src, ref, dst in triples:
        action = alphabet.resolve(ref)
        key = (src, action.action_id)
        if key in transitions and transitions[key] != dst:
            raise ValidationError(
                f"{task_id}: nondeterministic transition on ({src}, {action.render()})")
        transitions[key] = dst
    declared = None
    if "goldens" in doc:
        declared = tuple(tuple(alphabet.resolve(r) for r in path) for path in doc["goldens"])
    return TaskAutomaton(
        task_id=str(task_id),
        states=tuple(states),
        alphabet=alphabet,
        transitions=transitions,
        initial=str(doc.get("initial")),
        terminals=frozenset(str(s) for s in doc.get("terminals", [])),
        prompt=doc.get("prompt", ""),
        world=world,
        declared_goldens=declared,
    )


def parse_world(doc: Mapping[str, Any], golden_cap: int = DEFAULT_GOLDEN_CAP) -> World:
    """Validate a decoded world document and build its automata."""
    if not isinstance(doc, Mapping):
        raise ParseError("world document must be a JSON object")
    if doc.get("format") != WORLD_FORMAT:
        raise ValidationError(f"unsupported world format {doc.get('format')!r}")
    name = str(doc.get("world", ""))
    alphabet = build_alphabet(doc)
    tasks: dict[str, TaskAutomaton] = {}
    for task_doc in doc.get("tasks", []):
        task = _build_task(task_doc, alphabet, name)
        if task.task_id in tasks:
            raise ValidationError(f"duplicate task id {task.task_id!r}")
        if task.declared_goldens is not None:
            enumerated = enumerate_goldens(task, golden_cap).paths
            if sorted(task.declared_goldens, key=_ids) != list(enumerated):
                raise ValidationError(
                    f"{task.task_id}: declared golden paths do not match enumeration")
        tasks[task.task_id] = task
    return World(name=name, alphabet=alphabet, tasks=MappingProxyType(tasks))


def _ids(path: Sequence[Action]) -> tuple[int, ...]:
    return tuple(a.action_id for a in path)


def load_world(path: str | Path, golden_cap: int = DEFAULT_GOLDEN_CAP) -> World:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return parse_world(doc, golden_cap)
    except PathScoreError as exc:
        if isinstance(exc, (ParseError, ValidationError)):
            raise type(exc)(f"{path}: {exc}") from None
        raise


def load_world_spec(path: str | Path) -> tuple[list[TaskAutomaton], Alphabet]:
    world = load_world(path)
    return list(world.tasks.values()), world.alphabet
