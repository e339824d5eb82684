from __future__ import annotations

from pathlib import Path

import pytest

from pathscore import SENTINEL, bundled_world, load_world

FIXTURES = Path(__file__).parent / "fixtures"
WORLD_NAMES = ("farm", "communication", "legal", "arm")


def world_path(name: str) -> Path:
    if name == "toy":
        return FIXTURES / "hlr_toy.world.json"
    return Path(str(bundled_world(name)))


def actions(world, names):
    """Alias list -> Action list; unknown aliases become the sentinel."""
    by_name = {a.name: a for a in world.alphabet}
    return [by_name.get(n, SENTINEL) for n in names]


@pytest.fixture(scope="session")
def worlds():
    return {name: load_world(world_path(name)) for name in (*WORLD_NAMES, "toy")}


@pytest.fixture(scope="session")
def toy(worlds):
    return worlds["toy"]


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line, then fail the test if the check failed."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        request.config.stash.setdefault(_CRITERIA, []).append((number, line))
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
