"""Trace ingestion and per-trace evaluation pipeline."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .alphabet import Action, RawCall, normalize_call
from .automaton import DEFAULT_GOLDEN_CAP, GoldenSet, TaskAutomaton, World, enumerate_goldens
from .baselines import BaselineReport, baseline_report
from .condense import condense
from .errors import PathScoreError
from .hlr import DEFAULT_HLR_CAP, generate_candidates, pc_hlr
from .metrics import (
    MetricConfig,
    MetricReport,
    efficiency,
    harm_rate,
    path_correctness,
    pc_ktc,
    prefix_criticality,
)

log = logging.getLogger(__name__)


@dataclass
class Trace:
    model: str
    task_id: str
    run: str
    calls: list[RawCall] = field(default_factory=list)
    error: str | None = None


@dataclass(frozen=True)
class TraceReport:
    model: str
    world: str
    task_id: str
    run: str
    valid: bool
    error: str | None = None
    metrics: MetricReport | None = None
    pc_hlr: float | None = None
    hlr_best: int | None = None
    hlr_truncated: bool = False
    hlr_size: int = 0
    baseline: BaselineReport | None = None

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.model, self.world, self.task_id, self.run)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        if self.metrics is not None:
            out["metrics"]["prefix_crit_by_beta"] = {
                repr(b): v for b, v in self.metrics.prefix_crit_by_beta.items()}
        return out

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> TraceReport:
        doc = dict(doc)
        if doc.get("metrics") is not None:
            m = dict(doc["metrics"])
            m["prefix_crit_by_beta"] = {float(b): v for b, v in m.get("prefix_crit_by_beta", {}).items()}
            doc["metrics"] = MetricReport(**m)
        if doc.get("baseline") is not None:
            doc["baseline"] = BaselineReport(**doc["baseline"])
        return cls(**doc)


def evaluate_actions(automaton: TaskAutomaton, actions: Sequence[Action],
                     goldens: GoldenSet, config: MetricConfig = MetricConfig(),
                     hlr_cap: int = DEFAULT_HLR_CAP) -> tuple[MetricReport, float, int, bool, int, BaselineReport]:
    result = automaton.run(actions)
    cpath = condense(result)
    refs = goldens.paths
    pc, best = path_correctness(cpath, refs)
    rate, free, count = harm_rate(cpath.harm_mask)
    by_beta = {b: prefix_criticality(cpath.harm_mask, b) for b in config.betas}
    metrics = MetricReport(
        pc=pc,
        pc_ktc=pc_ktc(cpath, refs, config.lam),
        prefix_crit=by_beta[config.beta],
        harm_rate=rate,
        harm_free=free,
        harmful_count=count,
        efficiency=efficiency(len(actions), goldens.lengths),
        raw_len=len(actions),
        condensed_len=len(cpath),
        best_reference_id=best,
        prefix_crit_by_beta=by_beta,
    )
    cands = generate_candidates(cpath, automaton, goldens, hlr_cap)
    hlr_score, hlr_best = pc_hlr(cpath, cands)
    return metrics, hlr_score, hlr_best, cands.truncated, len(cands), baseline_report(result, cpath, goldens)


class Evaluator:
    """Evaluates traces against one world, caching golden sets per task."""

    def __init__(self, world: World, config: MetricConfig = MetricConfig(),
                 hlr_cap: int = DEFAULT_HLR_CAP, golden_cap: int = DEFAULT_GOLDEN_CAP):
        self.world = world
        self.config = config
        self.hlr_cap = hlr_cap
        self.golden_cap = golden_cap
        self._goldens: dict[str, GoldenSet] = {}

    def goldens(self, task_id: str) -> GoldenSet:
        if task_id not in self._goldens:
            self._goldens[task_id] = enumerate_goldens(self.world.task(task_id), self.golden_cap)
        return self._goldens[task_id]

    def evaluate(self, trace: Trace) -> TraceReport:
        base = dict(model=trace.model, world=self.world.name, task_id=trace.task_id, run=trace.run)
        if trace.error is not None:
            return TraceReport(**base, valid=False, error=trace.error)
        try:
            automaton = self.world.task(trace.task_id)
            goldens = self.goldens(trace.task_id)
        except PathScoreError as exc:
            return TraceReport(**base, valid=False, error=str(exc))
        actions = [normalize_call(c, self.world.alphabet) for c in trace.calls]
        metrics, score, best, truncated, size, baseline = evaluate_actions(
            automaton, actions, goldens, self.config, self.hlr_cap)
        return TraceReport(**base, valid=True, metrics=metrics, pc_hlr=score, hlr_best=best,
                           hlr_truncated=truncated, hlr_size=size, baseline=baseline)

    def evaluate_all(self, traces: Iterable[Trace]) -> list[TraceReport]:
        return sorted((self.evaluate(t) for t in traces), key=lambda r: r.key)


def _parse_record(line: str) -> dict[str, Any]:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    for name in ("task_id", "step", "function"):
        if name not in rec:
            raise ValueError(f"missing field {name!r}")
    if not isinstance(rec["step"], int) or isinstance(rec["step"], bool):
        raise ValueError("step must be an integer")
    args = rec.get("args", {})
    if args is None:
        args = {}
    if not isinstance(args, dict):
        raise ValueError("args must be an object")
    rec["args"] = args
    return rec


def read_traces(path: str | Path, default_model: str | None = None) -> list[Trace]:
    """Read line-delimited call records and group them into traces.

    A trace is keyed by ``(model, task_id, run)``; ``model`` defaults to
    the file stem and ``run`` to ``"0"``. Records that fail to parse make
    their trace invalid; lines that cannot be attributed to any trace
    become a separate invalid trace so they still count as runs.
    """
    path = Path(path)
    model_default = default_model or path.stem
    traces: dict[tuple[str, str, str], Trace] = {}
    orphans = 0
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = _parse_record(line)
        except (ValueError, TypeError) as exc:
            key = _salvage_key(line, model_default)
            if key is None:
                orphans += 1
                key = (model_default, "?", f"{path.name}:{lineno}")
            trace = traces.setdefault(key, Trace(*key))
            trace.error = trace.error or f"{path.name}:{lineno}: {exc}"
            log.warning("invalid record %s:%d: %s", path, lineno, exc)
            continue
        key = (str(rec.get("model") or model_default), str(rec["task_id"]), str(rec.get("run", 0)))
        trace = traces.setdefault(key, Trace(*key))
        trace.calls.append(RawCall(key[1], rec["step"], str(rec["function"]), rec["args"]))

    for trace in traces.values():
        if trace.error is None:
            steps = sorted(c.step_index for c in trace.calls)
            if steps != list(range(len(steps))):
                trace.error = f"steps of {trace.task_id!r} are not consecutive from 0"
            trace.calls.sort(key=lambda c: c.step_index)
    return list(traces.values())


def _salvage_key(line: str, model_default: str) -> tuple[str, str, str] | None:
    try:
        rec = json.loads(line)
    except ValueError:
        return None
    if not isinstance(rec, dict) or "task_id" not in rec:
        return None
    return (str(rec.get("model") or model_default), str(rec["task_id"]), str(rec.get("run", 0)))


def write_trace_file(path: str | Path, records: Iterable[Mapping[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


def trace_records(task_id: str, actions: Sequence[Action], model: str | None = None,
                  run: str | int | None = None) -> list[dict[str, Any]]:
    """Render actions as ingestion records; the sentinel becomes an unknown call."""
    out = []
    for k, a in enumerate(actions):
        rec: dict[str, Any] = {"task_id": task_id, "step": k}
        if a.is_sentinel:
            rec.update(function="unknown_tool", args={})
        else:
            rec.update(function=a.function_name, args=a.args)
        if model is not None:
            rec["model"] = model
        if run is not None:
            rec["run"] = str(run)
        out.append(rec)
    return out
