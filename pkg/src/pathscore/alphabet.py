"""Finite action space and mapping of raw tool calls onto it.

An action is a tool name together with a canonical argument pattern, so
``water(target='plant_A')`` and ``water(target='plant_B')`` are distinct
symbols. Calls that match no enumerated action collapse onto a single
out-of-alphabet sentinel, which every automaton treats as harmful.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import DuplicateActionError, UnknownActionRefError, ValidationError

READ = "read"
WRITE = "write"
ACTION_KINDS = (READ, WRITE)

ArgPattern = tuple[tuple[str, str], ...]


def canonicalize(value: Any) -> Any:
    """Normalize an argument value so equal calls compare equal.

    Strings are NFC-normalized, integral floats become ints, mapping keys
    are sorted. The result is a plain JSON-compatible value and applying
    the function twice is the same as applying it once.
    """
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, str):
        return unicodedata.normalize("NFC", value)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if math.isfinite(value) and value.is_integer():
            return int(value)
        return value
    if isinstance(value, Mapping):
        items = sorted((canonicalize(k), canonicalize(v)) for k, v in value.items())
        return {k: v for k, v in items}
    if isinstance(value, (list, tuple)):
        return [canonicalize(v) for v in value]
    raise TypeError(f"unsupported argument value {value!r}")


def _render(value: Any) -> str:
    # json.dumps emits floats with repr(), i.e. the shortest round-trip form
    return json.dumps(canonicalize(value), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def arg_pattern(args: Mapping[str, Any] | None) -> ArgPattern:
    if not args:
        return ()
    return tuple(sorted((unicodedata.normalize("NFC", str(k)), _render(v))
                        for k, v in args.items()))


@dataclass(frozen=True, order=False)
class Action:
    """One alphabet symbol. Equality ignores id, kind and effects."""

    function_name: str
    arg_pattern: ArgPattern = ()
    action_id: int = field(default=-1, compare=False)
    kind: str = field(default=WRITE, compare=False)
    name: str | None = field(default=None, compare=False)
    effects: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    @property
    def key(self) -> tuple[str, ArgPattern]:
        return (self.function_name, self.arg_pattern)

    @property
    def is_sentinel(self) -> bool:
        return self.action_id == SENTINEL_ID

    @property
    def args(self) -> dict[str, Any]:
        return {k: json.loads(v) for k, v in self.arg_pattern}

    def render(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.arg_pattern)
        return f"{self.function_name}({inner})"

    def __repr__(self) -> str:
        return self.name or self.render()


SENTINEL_ID = -1
SENTINEL = Action("<out-of-alphabet>", (), SENTINEL_ID, WRITE, "<out-of-alphabet>")


@dataclass(frozen=True)
class RawCall:
    task_id: str
    step_index: int
    function_name: str
    args: dict[str, Any] = field(default_factory=dict)


class Alphabet(Sequence[Action]):
    """Immutable, ordered action list with constant-time call lookup."""

    def __init__(self, actions: Iterable[Action]):
        self._actions = tuple(actions)
        self._by_key = {a.key: a for a in self._actions}
        self._by_name = {a.name: a for a in self._actions if a.name}
        if len(self._by_key) != len(self._actions):
            raise DuplicateActionError("alphabet contains duplicate actions")

    def __getitem__(self, index):
        return self._actions[index]

    def __len__(self) -> int:
        return len(self._actions)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Alphabet):
            return self._actions == other._actions
        if isinstance(other, (list, tuple)):
            return list(self._actions) == list(other)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def lookup(self, function_name: str, args: Mapping[str, Any] | None = None) -> Action:
        try:
            key = (function_name, arg_pattern(args))
        except TypeError:
            return SENTINEL
        return self._by_key.get(key, SENTINEL)

    def resolve(self, ref: Any) -> Action:
        """Resolve a world-file action reference: an alias or ``{function, args}``."""
        if isinstance(ref, str):
            if ref in self._by_name:
                return self._by_name[ref]
            raise UnknownActionRefError(f"unknown action alias {ref!r}")
        if isinstance(ref, Mapping) and "function" in ref:
            action = self.lookup(ref["function"], ref.get("args"))
            if action.is_sentinel:
                raise UnknownActionRefError(f"transition references unknown action {ref!r}")
            return action
        raise UnknownActionRefError(f"malformed action reference {ref!r}")

    def reads(self) -> list[Action]:
        return [a for a in self._actions if a.kind == READ]


def _action_from_entry(entry: Mapping[str, Any]) -> Action:
    if not isinstance(entry, Mapping) or "function" not in entry:
        raise ValidationError(f"action entry needs a 'function' field: {entry!r}")
    kind = entry.get("kind", WRITE)
    if kind not in ACTION_KINDS:
        raise ValidationError(f"action kind must be read or write, got {kind!r}")
    effects = entry.get("effects") or {}
    if kind == READ and effects:
        raise ValidationError(f"read action {entry['function']} declares effects")
    return Action(
        function_name=str(entry["function"]),
        arg_pattern=arg_pattern(entry.get("args")),
        kind=kind,
        name=entry.get("name"),
        effects=tuple(sorted((str(k), _render(v)) for k, v in effects.items())),
    )


def build_alphabet(world_spec: Mapping[str, Any]) -> Alphabet:
    """Build the deduplicated, deterministically ordered action alphabet.

    Every transition in every task must reference an action from the
    result; dangling references raise :class:`UnknownActionRefError`.
    """
    entries = [_action_from_entry(e) for e in world_spec.get("actions", [])]
    seen: dict[tuple[str, ArgPattern], Action] = {}
    for action in entries:
        if action.key in seen:
            raise DuplicateActionError(f"duplicate action {action.render()}")
        seen[action.key] = action
    aliases = [a.name for a in entries if a.name]
    if len(aliases) != len(set(aliases)):
        raise DuplicateActionError("duplicate action alias")

    ordered = sorted(entries, key=lambda a: a.key)
    alphabet = Alphabet(
        Action(a.function_name, a.arg_pattern, i, a.kind, a.name, a.effects)
        for i, a in enumerate(ordered)
    )
    for task in world_spec.get("tasks", []):
        for tr in task.get("transitions", []):
            if isinstance(tr, Mapping):
                ref = tr.get("action")
            elif isinstance(tr, (list, tuple)) and len(tr) == 3:
                ref = tr[1]
            else:
                raise ValidationError(f"malformed transition {tr!r}")
            alphabet.resolve(ref)
        for refs in (task.get("self_loops") or {}).values():
            for ref in refs:
                alphabet.resolve(ref)
    return alphabet


def normalize_call(call: RawCall, alphabet: Sequence[Action]) -> Action:
    """Map a raw call onto its alphabet action, or the sentinel if none match."""
    if isinstance(alphabet, Alphabet):
        return alphabet.lookup(call.function_name, call.args)
    try:
        key = (call.function_name, arg_pattern(call.args))
    except TypeError:
        return SENTINEL
    for action in alphabet:
        if action.key == key:
            return action
    return SENTINEL
