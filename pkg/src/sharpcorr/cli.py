"""Command-line front end: ``sharpcorr {compute,bench,nist,scenarios}``.

Exit codes: 0 success, 2 usage or contract error, 3 data error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .accuracy import AccuracyReport, build_report, write_report
from .measures import MeasureError, MeasureId, compute_all, parse_measures
from .nist import DATASETS, load_datasets, nist_benchmark, reference_R, score_datasets, write_dataset_scores
from .sampling import SampleError
from .scenarios import FAMILIES, ScenarioError, dump_scenarios, load_scenarios, scenario_registry
from .simulate import (
    RNG_IDENTITY,
    SimConfig,
    SimulationError,
    parse_r_grid,
    run_grid,
    write_score_csv,
    write_sidecar,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE) -> None:
        super().__init__(message)
        self.code = code


def _measures(spec: str) -> list[MeasureId]:
    try:
        return parse_measures(spec)
    except ValueError as exc:
        raise CliError(str(exc)) from None


# -- compute -----------------------------------------------------------------


def _read_table(path: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header and ``(line number, cells)`` rows of a comma or tab table."""
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"{path}: cannot read input: {exc}", EXIT_DATA) from None
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise CliError(f"{path}: missing header row")
    delim = "\t" if "\t" in lines[0] else ","
    rows = list(csv.reader(io.StringIO(text), delimiter=delim))
    header = [h.strip() for h in rows[0]]
    body = [(i, r) for i, r in enumerate(rows[1:], 2) if any(c.strip() for c in r)]
    return header, body


def _column(header: list[str], name: str, path: str) -> int:
    if name in header:
        return header.index(name)
    raise CliError(f"{path}: no column {name!r}; available columns: {', '.join(header)}")


def _numeric_columns(
    path: str, x_name: str, y_name: str, missing: str
) -> tuple[np.ndarray, np.ndarray, int]:
    header, body = _read_table(path)
    ix, iy = _column(header, x_name, path), _column(header, y_name, path)
    xs, ys, dropped = [], [], 0
    for line, row in body:
        values = []
        for idx, name in ((ix, x_name), (iy, y_name)):
            cell = row[idx].strip() if idx < len(row) else ""
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                if missing == "error":
                    raise CliError(f"{path}:{line}: column {name!r}: not a finite number: {cell!r}")
                break
            values.append(v)
        if len(values) < 2:
            dropped += 1
            continue
        xs.append(values[0])
        ys.append(values[1])
    if not xs:
        raise CliError(f"{path}: no rows with numeric {x_name!r} and {y_name!r}", EXIT_DATA)
    return np.array(xs), np.array(ys), dropped


def cmd_compute(args: argparse.Namespace) -> int:
    ids = _measures(args.measures)
    x, y, dropped = _numeric_columns(args.input, args.x, args.y, args.missing)
    try:
        scores = compute_all(x, y, ids, seed=args.seed)
    except MeasureError as exc:
        raise CliError(f"{args.input}: {exc}") from None
    if dropped:
        print(f"dropped {dropped} row(s) with missing or non-numeric cells", file=sys.stderr)
    if args.format == "json":
        doc = {
            "input": args.input,
            "x": args.x,
            "y": args.y,
            "n": int(x.size),
            "dropped": dropped,
            "scores": [{"measure": s.measure.value, "value": s.value, "signed": s.signed} for s in scores],
        }
        print(json.dumps(doc, indent=2))
    elif args.format == "csv":
        print("measure,value")
        for s in scores:
            print(f"{s.measure.value},{s.value!r}")
    else:
        for s in scores:
            print(f"{s.measure.value:<14} {s.value: .12g}")
    return EXIT_OK


# -- bench -------------------------------------------------------------------


def _print_ranking(report: AccuracyReport, out=None) -> None:
    out = out or sys.stdout
    print("rank  measure        MAE", file=out)
    for i, m in enumerate(report.ranking, 1):
        print(f"{i:>4}  {m.value:<14} {report.mae_by_measure[m]:.4f}", file=out)
    left_out = [m for m in report.mae_by_measure if m not in report.ranking]
    for m in left_out:
        print(f"   -  {m.value:<14} {report.mae_by_measure[m]:.4f}  (not ranked)", file=out)


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        levels = parse_r_grid(args.r_grid)
        cfg = SimConfig(n=args.n, reps=args.reps, r_levels=levels, seed=args.seed, measures=tuple(_measures(args.measures)))
    except SimulationError as exc:
        raise CliError(str(exc)) from None
    if args.threads < 1:
        raise CliError("--threads must be at least 1")
    try:
        if args.scenario_file:
            scenarios = load_scenarios(args.scenario_file)
            source = str(args.scenario_file)
        else:
            scenarios = scenario_registry(args.family)
            source = f"builtin:{args.family}"
    except OSError as exc:
        raise CliError(f"{args.scenario_file}: {exc.strerror or exc}", EXIT_DATA) from None
    except ScenarioError as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    if not scenarios:
        raise CliError("no scenarios to run", EXIT_DATA)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    table = run_grid(cfg, scenarios, threads=args.threads)
    elapsed = time.perf_counter() - started
    excluded = () if args.include_hsic else (MeasureId.HSIC,)
    report = build_report(table, exclude_from_ranking=excluded)

    write_score_csv(table, out / "scores.csv")
    write_sidecar(table.sidecar(scenarios=source, scenario_count=len(scenarios)), out / "scores.json")
    write_report(
        report,
        out / "report.csv",
        out / "report.json",
        tool="sharpcorr",
        version=__version__,
        rng=RNG_IDENTITY,
        config=cfg.to_json(),
        scenarios=source,
        include_hsic=args.include_hsic,
    )
    print(f"{len(scenarios)} scenarios, {len(table)} scores, {len(table.failures)} failed, {elapsed:.1f} s",
          file=sys.stderr)
    _print_ranking(report)
    return EXIT_OK


# -- nist --------------------------------------------------------------------


def cmd_nist(args: argparse.Namespace) -> int:
    ids = _measures(args.measures)
    if args.dir is not None and not Path(args.dir).is_dir():
        raise CliError(f"{args.dir}: not a directory", EXIT_DATA)
    datasets, problems = load_datasets(args.dir)
    for name, reason in problems.items():
        print(f"{name}: {reason}", file=sys.stderr)
    if not datasets:
        raise CliError("no datasets found" + (f" in {args.dir}" if args.dir else ""), EXIT_DATA)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scores = score_datasets(datasets, ids)
    write_dataset_scores(scores, out / "nist_scores.csv")
    excluded = () if args.include_hsic else (MeasureId.HSIC,)
    report = nist_benchmark(datasets, ids, exclude_from_ranking=excluded)
    write_report(
        report,
        out / "nist_report.csv",
        out / "nist_report.json",
        tool="sharpcorr",
        version=__version__,
        rng=RNG_IDENTITY,
        config={"dir": args.dir, "measures": [m.value for m in ids], "include_hsic": args.include_hsic},
        references={d.name: reference_R(d).R for d in datasets},
        missing={name: reason for name, reason in problems.items()},
    )
    _print_ranking(report)
    return EXIT_OK


# -- scenarios ---------------------------------------------------------------


def cmd_scenarios(args: argparse.Namespace) -> int:
    scenarios = [s for fam in ([args.family] if args.family != "all" else FAMILIES) for s in scenario_registry(fam)]
    if args.format == "json":
        sys.stdout.write(dump_scenarios(scenarios, "json"))
    elif args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["name", "family", "lo", "hi", "expression", "description"])
        for s in scenarios:
            w.writerow([s.name, s.family, repr(s.lo), repr(s.hi), s.expression, s.description])
    else:
        width = max(len(s.name) for s in scenarios)
        for s in scenarios:
            domain = f"[{s.lo:.6g}, {s.hi:.6g}]"
            print(f"{s.name:<{width}}  {s.family:<12}  {domain:<20}  {s.expression}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sharpcorr", description="Rearrangement correlation and comparators.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="score measures on two columns of a table")
    c.add_argument("input", help="comma or tab delimited file with a header row, '-' for stdin")
    c.add_argument("--x", required=True, help="column name of x")
    c.add_argument("--y", required=True, help="column name of y")
    c.add_argument("--measures", default="all", help="comma list of measure ids or 'all'")
    c.add_argument("--missing", choices=("drop", "error"), default="drop",
                   help="rows with missing or non-numeric cells: drop them or fail")
    c.add_argument("--format", choices=("table", "csv", "json"), default="table")
    c.add_argument("--seed", type=int, default=0, help="tie-breaking seed for xi")
    c.set_defaults(func=cmd_compute)

    b = sub.add_parser("bench", help="run the simulation benchmark")
    b.add_argument("--family", choices=FAMILIES, default="monotone")
    b.add_argument("--scenario-file", help="scenario definitions replacing the built-in family")
    b.add_argument("--n", type=int, default=512)
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--r-grid", default="0:1:0.05", help="lo:hi:step, both ends included")
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--measures", default="all")
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--include-hsic", action="store_true", help="rank raw HSIC alongside the others")
    b.add_argument("--out", default="bench-out", help="output directory")
    b.set_defaults(func=cmd_bench)

    n = sub.add_parser("nist", help="score measures on the NIST StRD datasets")
    n.add_argument("--dir", help=f"directory holding {', '.join(d + '.dat' for d in DATASETS)}; "
                                 "defaults to the bundled copies")
    n.add_argument("--measures", default="all")
    n.add_argument("--include-hsic", action="store_true")
    n.add_argument("--out", default="nist-out", help="output directory")
    n.set_defaults(func=cmd_nist)

    s = sub.add_parser("scenarios", help="list the built-in scenarios")
    s.add_argument("--family", choices=FAMILIES + ("all",), default="all")
    s.add_argument("--format", choices=("table", "csv", "json"), default="table")
    s.set_defaults(func=cmd_scenarios)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on usage errors
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sharpcorr {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except (SampleError, OSError) as exc:
        print(f"sharpcorr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
