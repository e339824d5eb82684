from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathscore.alphabet import SENTINEL, Alphabet, RawCall, arg_pattern, build_alphabet, canonicalize, normalize_call
from pathscore.errors import DuplicateActionError, UnknownActionRefError

json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False) | st.text(max_size=8),
    lambda inner: st.lists(inner, max_size=3) | st.dictionaries(st.text(max_size=4), inner, max_size=3),
    max_leaves=8,
)


def farm_spec(extra=()):
    return {"actions": [
        {"function": "water_plant", "args": {"plant_id": p}} for p in ("plant_A", "plant_B", "plant_C")
    ] + list(extra)}


def test_build_alphabet_enumerates_argument_patterns():
    alphabet = build_alphabet(farm_spec())
    assert len(alphabet) == 3
    assert [a.args["plant_id"] for a in alphabet] == ["plant_A", "plant_B", "plant_C"]
    assert [a.action_id for a in alphabet] == [0, 1, 2]


def test_build_alphabet_empty():
    assert len(build_alphabet({"actions": []})) == 0


def test_ordering_is_by_function_then_args():
    spec = {"actions": [{"function": "b"}, {"function": "a", "args": {"x": 2}}, {"function": "a", "args": {"x": 1}}]}
    assert [a.render() for a in build_alphabet(spec)] == ["a(x=1)", "a(x=2)", "b()"]


def test_duplicate_after_canonicalization():
    spec = {"actions": [
        {"function": "water_plant", "args": {"plant_id": "A", "liters": 2}},
        {"function": "water_plant", "args": {"liters": 2.0, "plant_id": "A"}},
    ]}
    with pytest.raises(DuplicateActionError):
        build_alphabet(spec)


def test_unknown_transition_reference():
    spec = farm_spec()
    spec["tasks"] = [{"transitions": [["q0", {"function": "harvest"}, "q1"]]}]
    with pytest.raises(UnknownActionRefError):
        build_alphabet(spec)


@given(json_values)
def test_canonicalize_idempotent(value):
    once = canonicalize(value)
    assert canonicalize(once) == once


def test_canonicalize_details():
    assert canonicalize(4.0) == 4 and canonicalize(4.5) == 4.5
    assert canonicalize(True) is True
    assert canonicalize("é") == "é"
    assert list(canonicalize({"b": 1, "a": 2})) == ["a", "b"]
    assert arg_pattern({"x": "1"}) != arg_pattern({"x": 1})


def test_normalize_exact_match_and_sentinel():
    alphabet = build_alphabet(farm_spec())
    hit = normalize_call(RawCall("t", 0, "water_plant", {"plant_id": "plant_A"}), alphabet)
    assert hit == alphabet[0]
    assert normalize_call(RawCall("t", 0, "water_plant", {"plant_id": "plant_Z"}), alphabet) is SENTINEL
    assert normalize_call(RawCall("t", 0, "transferFunds", {"amount": 50}), alphabet) is SENTINEL
    assert normalize_call(RawCall("t", 0, "water_plant", {"plant_id": object()}), alphabet) is SENTINEL


def test_normalize_on_plain_list_matches_alphabet_lookup():
    alphabet = build_alphabet(farm_spec())
    call = RawCall("t", 0, "water_plant", {"plant_id": "plant_C"})
    assert normalize_call(call, list(alphabet)) == normalize_call(call, alphabet) == alphabet[2]


@given(st.text(max_size=12), st.dictionaries(st.sampled_from(["plant_id", "liters"]),
                                             st.sampled_from(["plant_A", "plant_B", "plant_C", 1, 2.5])))
def test_normalize_total_and_injective(function, args):
    alphabet = build_alphabet(farm_spec())
    got = normalize_call(RawCall("t", 0, function, args), alphabet)
    assert got is SENTINEL or got in alphabet
    matches = [a for a in alphabet if a.key == (function, arg_pattern(args))]
    assert len(matches) <= 1


def test_alphabet_rejects_duplicates_directly():
    a = build_alphabet(farm_spec())[0]
    with pytest.raises(DuplicateActionError):
        Alphabet([a, a])
