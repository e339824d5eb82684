"""Aggregation of per-trace reports into grouped tables, plus json/csv/markdown output."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import UnknownFormatError, ValidationError
from .evaluate import TraceReport

FORMATS = ("json", "csv", "markdown")
GROUP_DIMS = ("model", "world", "task_id")

METRIC_FIELDS = (
    "harmful_total", "harmful_avg", "eff_avg", "len_avg", "pc", "pc_ktc",
    "prefix_crit", "state_pct", "resp_pct", "pc_hlr", "n_runs", "n_valid",
)
INT_FIELDS = ("harmful_total", "n_runs", "n_valid")

# header text and number format for the markdown grid
_MARKDOWN = {
    "harmful_total": ("Harmful (total)", "{:d}"),
    "harmful_avg": ("Harmful (avg.)", "{:.2f}"),
    "eff_avg": ("Eff. (avg.)", "{:.3f}"),
    "len_avg": ("Len (avg.)", "{:.1f}"),
    "pc": ("PC", "{:.3f}"),
    "pc_ktc": ("PC-KTC", "{:.3f}"),
    "prefix_crit": ("PrefixCrit", "{:.3f}"),
    "state_pct": ("State %", "{:.1f}"),
    "resp_pct": ("Resp. %", "{:.1f}"),
    "pc_hlr": ("PC+HLR", "{:.3f}"),
    "n_runs": ("Runs", "{:d}"),
    "n_valid": ("Valid", "{:d}"),
}
_DIM_TITLES = {"model": "Model", "world": "World", "task_id": "Task"}


@dataclass(frozen=True)
class AggregateRow:
    group_key: tuple[str, ...]
    harmful_total: int
    harmful_avg: float
    eff_avg: float
    len_avg: float
    pc: float
    pc_ktc: float
    prefix_crit: float
    state_pct: float
    resp_pct: float
    pc_hlr: float
    n_runs: int
    n_valid: int


def group_reports(reports: Iterable[TraceReport],
                  group_by: Sequence[str] = ("model", "world")) -> list[tuple[tuple[str, ...], TraceReport]]:
    for dim in group_by:
        if dim not in GROUP_DIMS:
            raise ValidationError(f"cannot group by {dim!r}; choose from {', '.join(GROUP_DIMS)}")
    return [(tuple(getattr(r, d) for d in group_by), r) for r in reports]


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def aggregate(entries: Iterable[tuple[tuple[str, ...], TraceReport]]) -> list[AggregateRow]:
    """One row per group key, sorted by key. Means use valid runs only.

    Undefined efficiencies count as 0.0. ``math.fsum`` keeps the result
    independent of input order.
    """
    groups: dict[tuple[str, ...], list[TraceReport]] = defaultdict(list)
    for key, rep in entries:
        groups[tuple(key)].append(rep)
    rows = []
    for key in sorted(groups):
        reps = groups[key]
        valid = [r for r in reps if r.valid and r.metrics is not None]
        m = [r.metrics for r in valid]
        harmful_total = sum(x.harmful_count for x in m)
        rows.append(AggregateRow(
            group_key=key,
            harmful_total=harmful_total,
            harmful_avg=harmful_total / len(valid) if valid else 0.0,
            eff_avg=_mean([x.efficiency_or_zero for x in m]),
            len_avg=_mean([float(x.raw_len) for x in m]),
            pc=_mean([x.pc for x in m]),
            pc_ktc=_mean([x.pc_ktc for x in m]),
            prefix_crit=_mean([x.prefix_crit for x in m]),
            state_pct=100.0 * _mean([float(r.baseline.state_pass) for r in valid]),
            resp_pct=100.0 * _mean([float(r.baseline.response_pass) for r in valid]),
            pc_hlr=_mean([r.pc_hlr for r in valid]),
            n_runs=len(reps),
            n_valid=len(valid),
        ))
    return rows


def _row_dict(row: AggregateRow, dims: Sequence[str]) -> dict:
    out = dict(zip(dims, row.group_key))
    out.update({f: getattr(row, f) for f in METRIC_FIELDS})
    return out


def emit(rows: Sequence[AggregateRow], fmt: str = "markdown",
         group_by: Sequence[str] | None = None) -> str:
    """Render rows. json and csv keep full precision so they parse back exactly."""
    if fmt not in FORMATS:
        raise UnknownFormatError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
    if not rows:
        raise ValidationError("nothing to emit")
    dims = tuple(group_by) if group_by else tuple(f"group{i}" for i in range(len(rows[0].group_key)))
    if fmt == "json":
        return json.dumps([_row_dict(r, dims) for r in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=[*dims, *METRIC_FIELDS], lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v)
                             for k, v in _row_dict(r, dims).items()})
        return buf.getvalue()

    header = [_DIM_TITLES.get(d, d) for d in dims] + [_MARKDOWN[f][0] for f in METRIC_FIELDS]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join(["---"] * len(dims) + ["---:"] * len(METRIC_FIELDS)) + "|"]
    for r in rows:
        cells = list(r.group_key) + [_MARKDOWN[f][1].format(getattr(r, f)) for f in METRIC_FIELDS]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _coerce(name: str, value) -> int | float:
    return int(value) if name in INT_FIELDS else float(value)


def parse_rows(text: str, fmt: str) -> tuple[list[AggregateRow], tuple[str, ...]]:
    """Inverse of :func:`emit` for json and csv; returns rows and group dims."""
    if fmt == "json":
        records = json.loads(text)
    elif fmt == "csv":
        records = list(csv.DictReader(io.StringIO(text)))
    else:
        raise UnknownFormatError(f"cannot parse format {fmt!r}")
    if not records:
        return [], ()
    dims = tuple(k for k in records[0] if k not in METRIC_FIELDS)
    rows = []
    for rec in records:
        metrics = {f: _coerce(f, rec[f]) for f in METRIC_FIELDS}
        rows.append(AggregateRow(group_key=tuple(str(rec[d]) for d in dims), **metrics))
    return rows, dims
