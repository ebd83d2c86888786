"""Command-line front end.

    swarmsteer simulate <config.json> --out <dir> [--plots] [--seed N]
    swarmsteer compare <run.csv> <ideal.csv> --out <dir>
    swarmsteer presets list|run-all [--out <dir>] [--plots]

Exit status: 0 when every expected property holds, 2 when a run finished
but a property failed, 1 on any operational error.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import shutil
import sys
import tempfile
from importlib import resources
from pathlib import Path

from . import experiments, plots, trajio
from .config import load_config
from .errors import SwarmSteerError

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
DEFAULT_OUT = "swarmsteer_out"


def default_out():
    return os.environ.get("SWARMSTEER_OUT") or DEFAULT_OUT


def preset_paths():
    root = resources.files("swarmsteer") / "presets"
    return sorted((p for p in root.iterdir() if p.name.endswith(".json")), key=lambda p: p.name)


def preset_names():
    return [p.name[:-5] for p in preset_paths()]


def _csv_text(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _commit(files: dict, out: Path):
    """Write ``{relative name: text}`` into ``out`` via a staging directory."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".swarmsteer-", dir=out.parent))
    try:
        for name, text in files.items():
            p = stage / name
            p.parent.mkdir(parents=True, exist_ok=True)
            with open(p, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        out.mkdir(parents=True, exist_ok=True)
        for name in files:
            dest = out / name
            dest.parent.mkdir(parents=True, exist_ok=True)
            os.replace(stage / name, dest)
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def result_files(result, with_plots):
    files = {"trajectory.csv": trajio.dumps(result.table),
             "metrics.csv": _csv_text(experiments.metrics_table(result.metrics))}
    if result.ideal is not None:
        files["ideal.csv"] = trajio.dumps(result.ideal)
        files["error.csv"] = trajio.dumps(result.errors)
    if with_plots:
        # plots are drawn from the serialized logs, never from in-memory state
        files.update(_plot_files(files))
    return files


def _plot_files(files):
    with tempfile.TemporaryDirectory() as tmp:
        def reread(name, expected=None):
            p = Path(tmp) / name
            p.write_text(files[name], encoding="utf-8")
            return trajio.read_table(p, expected)
        table = reread("trajectory.csv")
        if table.is_mmc:
            ideal = reread("ideal.csv") if "ideal.csv" in files else None
            errors = (reread("error.csv", trajio.ERROR_COLUMNS + ("E_pct_err",))
                      if "error.csv" in files else None)
            figs = plots.mmc_figures(table, ideal, errors)
        else:
            figs = plots.tva_figures(table)
    return {f"plots/{k}": v for k, v in figs.items()}


def cmd_simulate(args):
    exp = load_config(args.config, seed=args.seed)
    result = experiments.run_experiment(exp)
    out = Path(args.out or default_out())
    _commit(result_files(result, args.plots), out)
    print(experiments.format_report(exp.name, result.metrics, result.verdicts))
    print(f"wrote {out}")
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_compare(args):
    run = trajio.read_table(args.run)
    ideal = trajio.read_table(args.ideal)
    if run.names != ideal.names:
        first = next((i for i, (a, b) in enumerate(zip(run.names, ideal.names)) if a != b),
                     min(len(run.names), len(ideal.names)))
        raise trajio.SchemaError(f"column layouts differ at column {first + 1}")
    trajio.align(run, ideal)
    e = experiments.position_errors(run, ideal)
    t = run.times()
    metrics = experiments.error_metrics(t, e)
    if run.is_mmc:
        metrics.update(experiments.energy_metrics(run))
    err = trajio.error_table(run, ideal, e, with_energy=run.is_mmc)
    out = Path(args.out or default_out())
    _commit({"error.csv": trajio.dumps(err),
             "metrics.csv": _csv_text(experiments.metrics_table(metrics))}, out)
    print(experiments.format_report(f"{Path(args.run).name} vs {Path(args.ideal).name}", metrics, []))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_presets(args):
    if args.action == "list":
        for name in preset_names():
            print(name)
        return EXIT_OK
    out = Path(args.out or default_out())
    rows = []
    code = EXIT_OK
    for path in preset_paths():
        name = path.name[:-5]
        try:
            with resources.as_file(path) as p:
                exp = load_config(p)
            result = experiments.run_experiment(exp)
            _commit(result_files(result, args.plots), out / name)
        except SwarmSteerError as exc:
            rows.append((name, "ERROR", str(exc)))
            code = EXIT_ERROR
            continue
        print(experiments.format_report(name, result.metrics, result.verdicts))
        failed = [str(ex) for ex, _, ok in result.verdicts if not ok]
        rows.append((name, "pass" if not failed else "FAIL", "; ".join(failed)))
        if failed and code == EXIT_OK:
            code = EXIT_FAIL
    width = max(len(r[0]) for r in rows)
    print()
    for name, verdict, note in rows:
        print(f"{name:<{width}}  {verdict:<5}  {note}".rstrip())
    return code


def build_parser():
    ap = argparse.ArgumentParser(prog="swarmsteer", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one JSON experiment config")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (default: $SWARMSTEER_OUT or ./swarmsteer_out)")
    s.add_argument("--plots", action="store_true", help="also write SVG plots")
    s.add_argument("--seed", type=int, help="override the config seed")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="position/energy error of a run log against an ideal log")
    c.add_argument("run")
    c.add_argument("ideal")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    p = sub.add_parser("presets", help="list or run the bundled presets")
    p.add_argument("action", choices=("list", "run-all"))
    p.add_argument("--out")
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SwarmSteerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
