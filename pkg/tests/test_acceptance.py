"""Acceptance criteria, one test per criterion, each reporting a PASS/FAIL line."""

from __future__ import annotations

import itertools
import math
import random
import sys
import time
from functools import lru_cache

from conftest import WORLD_NAMES, actions, world_path
from coverage import bloat_efficiency, cases, check_case
from pathscore.automaton import enumerate_goldens, run
from pathscore.baselines import state_check
from pathscore.cli import main
from pathscore.condense import condense
from pathscore.evaluate import TraceReport, evaluate_actions
from pathscore.hlr import generate_candidates, pc_hlr
from pathscore.metrics import (
    MetricConfig,
    efficiency,
    harm_rate,
    kendall_order_score,
    levenshtein,
    nld,
    path_correctness,
    pc_ktc,
    similarity,
)
from pathscore.report import aggregate, group_reports
from pathscore.synth import KINDS

TOL = 1e-3


def close(a, b, tol=TOL):
    return a is not None and abs(a - b) <= tol


def test_criterion_1_worked_hlr_example(toy, criterion):
    start = time.perf_counter()
    task = toy.task("abc")
    goldens = enumerate_goldens(task)
    cp = condense(run(task, actions(toy, list("ABXC"))))
    pc, _ = path_correctness(cp, goldens.paths)
    cands = generate_candidates(cp, task, goldens)
    score, best = pc_hlr(cp, cands)
    elapsed = time.perf_counter() - start
    repair = tuple(actions(toy, list("ABBC")))
    ok = close(pc, 0.750) and close(score, 0.778) and repair in cands.candidates and elapsed < 1.0
    criterion(1, "worked HLR example", ok, f"PC={pc:.3f} PC+HLR={score:.3f} time={elapsed:.3f}s")


def test_criterion_2_example_b(worlds, criterion):
    comm = worlds["communication"]
    task = comm.task("urgent_send")
    goldens = enumerate_goldens(task)
    raw = actions(comm, ["send_urgent"] * 3)
    metrics, hlr_score, *_ = evaluate_actions(task, raw, goldens, MetricConfig(beta=0.5))
    # the quoted 0.50 is the score against the HLR reference set; plain PC is 1/3
    ok = (metrics.harmful_count == 2 and close(metrics.efficiency, 1 / 3)
          and close(metrics.prefix_crit, 0.571) and close(hlr_score, 0.500)
          and close(metrics.pc, 1 / 3))
    criterion(2, "qualitative example B", ok,
              f"harmful={metrics.harmful_count} eff={metrics.efficiency:.3f} "
              f"PrefixCrit={metrics.prefix_crit:.3f} PC+HLR={hlr_score:.3f} plain PC={metrics.pc:.3f}")


def test_criterion_3_example_c(worlds, criterion):
    arm = worlds["arm"]
    task = arm.task("pick_box")
    goldens = enumerate_goldens(task)
    golden = goldens.paths[0]
    assert len(golden) == 6
    agent = [a for a in golden if a.name != "open"]
    cp = condense(run(task, agent))
    pc, _ = path_correctness(cp, goldens.paths)
    ktc = pc_ktc(cp, goldens.paths, 0.5)
    ok = close(pc, 0.833) and close(ktc, 0.917)
    criterion(3, "qualitative example C", ok, f"PC={pc:.3f} PC-KTC={ktc:.3f}")


def test_criterion_4_nld_axioms(criterion):
    rng = random.Random(2024)
    violations = 0
    n = 10_000
    for _ in range(n):
        x, y, z = ([rng.randrange(5) for _ in range(rng.randint(0, 12))] for _ in range(3))
        dxy, dyx, dxz, dyz = nld(x, y), nld(y, x), nld(x, z), nld(y, z)
        checks = (
            dxy == dyx,
            (dxy == 0) == (x == y),
            nld(x, x) == 0,
            dxz <= dxy + dyz + 1e-12,
            similarity(x, z) >= similarity(x, y) + similarity(y, z) - 1 - 1e-12,
        )
        violations += not all(checks)
    criterion(4, "NLD metric axioms", violations == 0, f"{n} triples, {violations} violations")


def _levenshtein_oracle(x):
    """Naive recursion over suffixes, memoized per fixed x."""

    @lru_cache(maxsize=None)
    def d(i, y):
        if i == len(x):
            return len(y)
        if not y:
            return len(x) - i
        return min(d(i + 1, y) + 1, d(i, y[1:]) + 1, d(i + 1, y[1:]) + (x[i] != y[0]))

    return d


def _canonical_words(max_len, k):
    """Words with first-occurrence labelling: each new symbol is the next unused one."""
    out = [()]
    frontier = [((), 0)]
    for _ in range(max_len):
        nxt = []
        for w, used in frontier:
            for s in range(min(used + 1, k)):
                nxt.append((w + (s,), max(used, s + 1)))
        out.extend(w for w, _ in nxt)
        frontier = nxt
    return out


def test_criterion_5_oracle_equivalence(criterion):
    # every pair up to renaming of symbols: LD is invariant under a bijection on the alphabet
    words = [w for n in range(7) for w in itertools.product(range(4), repeat=n)]
    mismatches = pairs = 0
    for x in _canonical_words(6, 4):
        oracle = _levenshtein_oracle(x)
        for y in words:
            pairs += 1
            mismatches += levenshtein(x, y) != oracle(0, y)
    rng = random.Random(5)
    for _ in range(2000):
        x, y = rng.choice(words), rng.choice(words)
        perm = rng.sample(range(4), 4)
        mismatches += levenshtein(x, y) != levenshtein([perm[s] for s in x], [perm[s] for s in y])

    kendall_bad = perms = 0
    for n in range(7):
        ref = list(range(n))
        for p in itertools.permutations(ref):
            perms += 1
            conc = sum(p[i] < p[j] for i in range(n) for j in range(i + 1, n))
            total = n * (n - 1) // 2
            expected = 0.0 if n == 0 else 0.5 if n == 1 else conc / total
            kendall_bad += not math.isclose(kendall_order_score(list(p), ref), expected, abs_tol=1e-12)
    ok = mismatches == 0 and kendall_bad == 0
    criterion(5, "oracle equivalence", ok,
              f"{pairs} Levenshtein pairs, {mismatches} mismatches; {perms} permutations, {kendall_bad} mismatches")


def test_criterion_6_coverage_matrix(worlds, criterion):
    failures = []
    counts = []
    for name in WORLD_NAMES:
        world = worlds[name]
        for kind in KINDS:
            got = list(cases(world, kind, n=100))
            counts.append(len(got))
            failures += [f"{name}/{kind}: {m}" for c in got if (m := check_case(kind, *c))]
        rng = random.Random(name)
        for _ in range(100):
            observed, expected, _ = bloat_efficiency(world, rng)
            if observed != expected:
                failures.append(f"{name}/bloat: {observed} != {expected}")
    ok = not failures and min(counts) >= 100
    criterion(6, "fault-injection coverage matrix", ok,
              f"{len(WORLD_NAMES)} worlds x {len(KINDS)} kinds, >= {min(counts)} cases each, "
              f"{len(failures)} failures")


def test_criterion_7_example_a(worlds, criterion):
    legal = worlds["legal"]
    task = legal.task("enforce_fraud")
    goldens = enumerate_goldens(task)
    raw = actions(legal, ["enforce_fraud"])
    result = run(task, raw)
    cp = condense(result)
    pc, _ = path_correctness(cp, goldens.paths)
    ktc = pc_ktc(cp, goldens.paths, 0.5)
    eff = efficiency(len(raw), goldens.lengths)
    metrics, score, best, trunc, size, baseline = evaluate_actions(task, raw, goldens)
    report = TraceReport("m", "legal", task.task_id, "0", True, metrics=metrics, pc_hlr=score, baseline=baseline)
    (row,) = aggregate(group_reports([report]))
    ok = (state_check(result, goldens) and harm_rate(cp.harm_mask)[2] == 1 and eff is None
          and row.eff_avg == 0.0 and close(pc, 0.500) and close(ktc, 0.250))
    criterion(7, "state check passes a harmful trace", ok,
              f"state_pass={state_check(result, goldens)} harmful={cp.harmful_count} eff={eff} "
              f"agg eff={row.eff_avg} PC={pc:.3f} PC-KTC={ktc:.3f}")


def test_criterion_8_end_to_end(tmp_path, worlds, criterion, capsys):
    start = time.perf_counter()
    trace_files = []
    for name in WORLD_NAMES:
        world = worlds[name]
        for i, task_id in enumerate(world.tasks):
            out = tmp_path / f"{name}_{task_id}.jsonl"
            rc = main(["synth", "--world", str(world_path(name)), "--task", task_id,
                       "--faults", "insert_self_loop*2,inject_harmful,transpose_adjacent",
                       "--seed", str(i), "--count", "10", "--model", "synthetic", "--out", str(out)])
            assert rc == 0
            trace_files.append((name, out))
    tables = []
    for name in WORLD_NAMES:
        files = [str(f) for n, f in trace_files if n == name]
        table = tmp_path / f"{name}.md"
        assert main(["eval", str(world_path(name)), *files, "--out", str(table)]) == 0
        tables.append(table.read_text())
    elapsed = time.perf_counter() - start
    header = tables[0].splitlines()[0]
    rows = [t.splitlines()[2] for t in tables]
    ok = (elapsed < 10.0 and len(tables) >= 3
          and all(t.splitlines()[0] == header for t in tables)
          and all(r.count("|") == header.count("|") for r in rows)
          and "PC+HLR" in header and "Harmful (total)" in header)
    with capsys.disabled():
        sys.stdout.write("\n" + header + "\n" + tables[0].splitlines()[1] + "\n" + "\n".join(rows) + "\n")
    criterion(8, "end-to-end table from synthesized traces", ok,
              f"{len(tables)} worlds in {elapsed:.2f}s")
