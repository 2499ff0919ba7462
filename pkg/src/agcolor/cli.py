"""Command-line front end: run, verify, sweep, report."""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from .linial import interval_table
from .scenario import ScenarioError, load_scenario, parse_scenario, run_scenario
from .verify import (CSV_FIELDS, OK, SCENARIO, TraceFormatError, check, csv_row, load_trace,
                     parse_trace)


def trace_text(outcome) -> str:
    return json.dumps({"header": outcome.header}, sort_keys=True) + "\n" + outcome.trace.to_jsonl()


def _write_summary(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _report_verdict(verdict, out=None) -> None:
    out = out or sys.stdout
    rows = [r for r in verdict.rows if r.get("proper") is not None]
    if rows:
        yes = all(r["proper"] for r in rows)
        print(f"proper every round: {'yes' if yes else 'no'}", file=out)
    for code, msg in verdict.violations:
        print(f"violation ({code}): {msg}", file=out)
    print(",".join(CSV_FIELDS), file=out)
    print(csv_row(verdict.summary), file=out)


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    outcome = run_scenario(sc, model=args.model, seed=args.seed,
                           known_ids=True if args.known_ids else None)
    text = trace_text(outcome)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / f"{sc.name}.jsonl"
    trace_path.write_text(text)
    verdict = check(parse_trace(text.splitlines()))
    _write_summary(out / f"{sc.name}.csv", [verdict.summary])
    print(f"trace: {trace_path}")
    _report_verdict(verdict)
    return verdict.code


def cmd_verify(args) -> int:
    verdict = check(load_trace(args.trace))
    _report_verdict(verdict)
    return verdict.code


# sweeps


def _grid_jobs(grid: dict, base: Path) -> list[tuple[str, str]]:
    """(scenario YAML text, base dir) for every grid point."""
    algs = grid.get("algorithms") or [grid.get("algorithm", "ag")]
    ns = grid.get("n", [32])
    deltas = grid.get("delta", [4])
    seeds = grid.get("seeds", [0])
    kind = grid.get("kind", "random-capped")
    model = grid.get("model", "local")
    params = grid.get("params", {})
    faults = grid.get("faults")
    jobs = []
    for alg, n, d, s in itertools.product(algs, ns, deltas, seeds):
        if d >= n:
            continue
        sc = {"name": f"{alg}-n{n}-d{d}-s{s}", "algorithm": alg, "model": model, "seed": s,
              "graph": {"kind": kind, "n": n, "delta": d, "seed": s}, "params": params}
        if faults and alg.startswith("ss-"):
            sc["faults"] = faults
        jobs.append((yaml.safe_dump(sc, sort_keys=True), str(base)))
    return jobs


def _sweep_one(job: tuple[str, str]) -> tuple[dict, list, str]:
    text, base = job
    try:
        outcome = run_scenario(parse_scenario(text, Path(base)))
    except ScenarioError as e:
        return {}, [(SCENARIO, str(e))], ""
    body = trace_text(outcome)
    verdict = check(parse_trace(body.splitlines()))
    return verdict.summary, verdict.violations, body


def cmd_sweep(args) -> int:
    path = Path(args.grid)
    try:
        grid = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as e:
        raise ScenarioError(f"cannot read grid {path}: {e}") from None
    if not isinstance(grid, dict):
        raise ScenarioError("grid must be a mapping", 1)
    jobs = _grid_jobs(grid, path.parent)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.jobs == 1:
        results = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_one, jobs))
    rows, code = [], OK
    for summary, violations, body in results:
        for c, msg in violations:
            print(f"violation ({c}) in {summary.get('scenario', '?')}: {msg}")
            code = max(code, c)
        if summary:
            rows.append(summary)
            if args.traces:
                (out / f"{summary['scenario']}.jsonl").write_text(body)
    _write_summary(out / "summary.csv", rows)
    print(f"{len(rows)} runs -> {out / 'summary.csv'}")
    return code


# reports


def interval_count(n: int, delta: int) -> int:
    d = min(delta, n - 1)
    return interval_table(n, d).r if d >= 1 else 0


def fit_rounds(rows: list[dict]) -> tuple[np.ndarray, float]:
    """Least-squares (alpha, beta, gamma) for rounds ~ alpha*delta + beta*r + gamma,
    and the largest absolute residual."""
    a = np.array([[float(r["delta"]), float(interval_count(int(r["n"]), int(r["delta"]))), 1.0]
                  for r in rows])
    y = np.array([float(r["rounds"]) for r in rows])
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = float(np.max(np.abs(a @ coef - y))) if len(rows) else 0.0
    return coef, resid


def cmd_report(args) -> int:
    src = Path(args.input)
    files = sorted(src.glob("*.csv"))
    if not files:
        raise ScenarioError(f"no summary CSV files in {src}")
    rows = []
    for f in files:
        with open(f, newline="") as fh:
            rows.extend(csv.DictReader(fh))
    by_alg: dict[str, list[dict]] = {}
    for r in rows:
        by_alg.setdefault(r["algorithm"], []).append(r)
    print("algorithm,runs,alpha,beta,gamma,max_residual,max_rounds,max_bits_per_edge")
    for alg, rs in sorted(by_alg.items()):
        coef, resid = fit_rounds(rs)
        print(f"{alg},{len(rs)},{coef[0]:.3f},{coef[1]:.3f},{coef[2]:.3f},{resid:.3f},"
              f"{max(int(r['rounds']) for r in rs)},{max(int(r['max_bits_per_edge']) for r in rs)}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="agcolor", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario and write its trace")
    r.add_argument("--scenario", required=True)
    r.add_argument("--model", help="local | congest:B | bit | set-local")
    r.add_argument("--seed", type=int)
    r.add_argument("--known-ids", action="store_true")
    r.add_argument("--out", default="out")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="re-check a trace with the oracles")
    v.add_argument("--trace", required=True)
    v.set_defaults(func=cmd_verify)
    s = sub.add_parser("sweep", help="run a grid of scenarios into a summary CSV")
    s.add_argument("--grid", required=True)
    s.add_argument("--out", default="sweep")
    s.add_argument("--jobs", type=int, default=None)
    s.add_argument("--traces", action="store_true", help="also keep every trace")
    s.set_defaults(func=cmd_sweep)
    p = sub.add_parser("report", help="fit rounds to alpha*delta + beta*r + gamma")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, TraceFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return SCENARIO


if __name__ == "__main__":
    sys.exit(main())
