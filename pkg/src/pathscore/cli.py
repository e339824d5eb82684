"""Command-line entry point: validate, goldens, eval, synth, report.

Exit status is 0 on success, 1 when an input fails validation or
evaluation, and 2 on usage errors. Data goes to stdout (or ``--out``),
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from .automaton import DEFAULT_GOLDEN_CAP, enumerate_goldens, load_world
from .errors import PathScoreError
from .evaluate import Evaluator, TraceReport, read_traces, trace_records
from .hlr import DEFAULT_HLR_CAP
from .metrics import MetricConfig
from .report import FORMATS, GROUP_DIMS, aggregate, emit, group_reports
from .synth import parse_faults, synthesize_from_specs

log = logging.getLogger("pathscore")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _group_by(text: str) -> tuple[str, ...]:
    dims = tuple(d.strip() for d in text.split(",") if d.strip())
    bad = [d for d in dims if d not in GROUP_DIMS]
    if not dims or bad:
        raise argparse.ArgumentTypeError(f"group dims must be from {', '.join(GROUP_DIMS)}")
    return dims


def cmd_validate(args) -> int:
    status = 0
    for path in args.worlds:
        try:
            world = load_world(path, args.golden_cap)
            for task in world.tasks.values():
                enumerate_goldens(task, args.golden_cap)
        except PathScoreError as exc:
            print(f"{path}: {type(exc).__name__}: {exc}", file=sys.stderr)
            status = 1
            continue
        print(f"{path}: ok ({world.name}: {len(world.tasks)} tasks, {len(world.alphabet)} actions)")
    return status


def cmd_goldens(args) -> int:
    world = load_world(args.world, args.golden_cap)
    task_ids = [args.task] if args.task else list(world.tasks)
    lines = []
    for task_id in task_ids:
        goldens = enumerate_goldens(world.task(task_id), args.golden_cap)
        for path in goldens.paths:
            render = (lambda a: a.function_name) if args.names else (lambda a: a.render())
            lines.append(f"{task_id}\t" + " -> ".join(render(a) for a in path))
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _config(args) -> MetricConfig:
    betas = args.beta or [0.5]
    return MetricConfig(lam=args.lam, beta=betas[0], extra_betas=tuple(betas[1:]))


def cmd_eval(args) -> int:
    world = load_world(args.world, args.golden_cap)
    evaluator = Evaluator(world, _config(args), args.hlr_cap, args.golden_cap)
    traces = [t for path in args.traces for t in read_traces(path, args.model)]
    reports = evaluator.evaluate_all(traces)
    for r in reports:
        if not r.valid:
            print(f"invalid run {r.model}/{r.task_id}/{r.run}: {r.error}", file=sys.stderr)

    per_trace = args.per_trace
    if per_trace is None and args.out:
        per_trace = str(Path(args.out).with_suffix("")) + ".traces.jsonl"
    if per_trace:
        with open(per_trace, "w", encoding="utf-8") as fh:
            for r in reports:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")

    if not reports:
        print("no traces to evaluate", file=sys.stderr)
        return 1
    rows = aggregate(group_reports(reports, args.group_by))
    _write(emit(rows, args.format, args.group_by), args.out)
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.reports:
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if line.strip():
                try:
                    reports.append(TraceReport.from_dict(json.loads(line)))
                except (ValueError, TypeError) as exc:
                    print(f"{path}:{lineno}: unreadable report: {exc}", file=sys.stderr)
                    return 1
    if not reports:
        print("no per-trace reports given", file=sys.stderr)
        return 1
    rows = aggregate(group_reports(reports, args.group_by))
    _write(emit(rows, args.format, args.group_by), args.out)
    return 0


def cmd_synth(args) -> int:
    world = load_world(args.world, args.golden_cap)
    automaton = world.task(args.task)
    goldens = enumerate_goldens(automaton, args.golden_cap)
    specs = parse_faults(args.faults)
    rng = random.Random(args.seed)
    records = []
    for run in range(args.count):
        gid = args.golden if args.golden is not None else rng.randrange(len(goldens))
        if not 0 <= gid < len(goldens):
            print(f"golden index {gid} out of range 0..{len(goldens) - 1}", file=sys.stderr)
            return 1
        seed = rng.randrange(2**31)
        path, applied = synthesize_from_specs(goldens.paths[gid], specs, automaton, seed, goldens)
        recs = trace_records(args.task, path, model=args.model, run=run)
        meta = {"seed": seed, "golden": gid,
                "faults": [{"kind": p.kind, "position": p.position, "seed": p.seed} for p in applied]}
        if recs:
            recs[0]["synth"] = meta
        else:
            print(f"run {run}: empty trace ({json.dumps(meta)})", file=sys.stderr)
        records.extend(recs)
    text = "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in records)
    _write(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathscore",
                                     description="Score tool-call traces against task automata.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def caps(p, hlr=False):
        p.add_argument("--golden-cap", type=int, default=DEFAULT_GOLDEN_CAP)
        if hlr:
            p.add_argument("--hlr-cap", type=int, default=DEFAULT_HLR_CAP)

    p = sub.add_parser("validate", help="check world files")
    p.add_argument("worlds", nargs="+")
    caps(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("goldens", help="list golden paths")
    p.add_argument("world")
    p.add_argument("--task")
    p.add_argument("--names", action="store_true", help="print function names only")
    p.add_argument("--out")
    caps(p)
    p.set_defaults(func=cmd_goldens)

    p = sub.add_parser("eval", help="score traces and print an aggregate table")
    p.add_argument("world")
    p.add_argument("traces", nargs="+")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--beta", type=float, action="append",
                   help="prefix-criticality base; repeat for more (first is primary)")
    p.add_argument("--format", choices=FORMATS, default="markdown")
    p.add_argument("--group-by", type=_group_by, default=("model", "world"))
    p.add_argument("--model", help="model label for records that carry none")
    p.add_argument("--out")
    p.add_argument("--per-trace", help="write per-trace reports (JSON lines) here")
    caps(p, hlr=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write fault-injected traces")
    p.add_argument("--world", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--faults", default="", help="e.g. 'insert_self_loop*2,inject_harmful@0'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--golden", type=int)
    p.add_argument("--model")
    p.add_argument("--out")
    caps(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="aggregate per-trace reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--format", choices=FORMATS, default="markdown")
    p.add_argument("--group-by", type=_group_by, default=("model", "world"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PathScoreError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
