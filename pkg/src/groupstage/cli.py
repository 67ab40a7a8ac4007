"""Command-line front end: ``groupstage <command> ...``.

Exit status: 0 on success, 1 on usage errors, 2 on bad input data.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .calibration import PER_EDITION, POOLED, FitDataset, fit
from .classification import classify, context_from_dict
from .dataio import (
    REPORT_KINDS,
    HistoryFormatError,
    history_report,
    load_history,
    model_validation,
    read_games,
)
from .formats import FormatKind, FormatSpec, SettingChoice, parse_pot
from .montecarlo import TABLES, VERDICTS, ExperimentConfig, ExperimentError, run, sweep, table_configs
from .score_models import FAMILIES, FITTED_GAP, FITTED_POISSON, model_from_dict, model_to_dict
from .standings import PointsSystem

log = logging.getLogger("groupstage")

DEFAULT_SEED = 20190610
USAGE_ERROR, DATA_ERROR = 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    env = os.environ.get("GROUPSTAGE_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"GROUPSTAGE_SEED must be an integer, got {env!r}") from None


# I/O helpers ----------------------------------------------------------------

def _dump_json(doc, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _load_params(path: str | None):
    if path is None:
        return FITTED_POISSON, FITTED_GAP
    try:
        doc = json.loads(Path(path).read_text())
        model, gap = model_from_dict(doc)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise DataError(f"invalid params {path}: {exc}") from None
    if gap is None:
        raise DataError(f"params {path} must record the gap used for rescaling")
    return model, gap


def _parse_points(text: str) -> PointsSystem:
    try:
        return PointsSystem.parse(text)
    except ValueError as exc:
        raise UsageError(f"--points expects W,D with W > D >= 0: {exc}") from None


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# commands -------------------------------------------------------------------

def cmd_calibrate(args) -> int:
    try:
        records = [r for r in read_games(args.data) if r.stage_round <= 2]
        data = FitDataset(records, args.pool)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    result = fit(args.family, data, restarts=args.restarts, tolerance=args.tolerance,
                 max_iterations=args.max_iterations)
    _dump_json(result.to_dict(), args.out)
    return 0


def _experiment(args) -> ExperimentConfig:
    fmt = FormatSpec(FormatKind(args.format))
    passive = None
    if args.passive_pot is not None:
        try:
            passive = parse_pot(args.passive_pot)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    model, gap = _load_params(args.params)
    try:
        choice = SettingChoice.for_format(fmt, args.setting, passive)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return ExperimentConfig(fmt, choice, model, gap, _parse_points(args.points), args.iterations,
                            args.seed, args.unit)


def cmd_simulate(args) -> int:
    report = run(_experiment(args), workers=args.threads)
    _dump_json(report.to_dict(), args.out)
    return 0


def cmd_sweep(args) -> int:
    model, gap = _load_params(args.params)
    configs = table_configs(args.table, model, gap, args.iterations, args.seed, args.unit)
    reports = sweep(configs, workers=args.threads)
    _dump_json({"table": args.table, "reports": [r.to_dict() for r in reports]}, args.out)
    if args.csv:
        _write_csv(table_layout(args.table, reports), args.csv)
    return 0


def cmd_classify(args) -> int:
    try:
        text = sys.stdin.read() if args.context == "-" else Path(args.context).read_text()
        ctx = context_from_dict(json.loads(text))
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise DataError(f"invalid context: {exc}") from None
    _dump_json(classify(ctx).to_dict(), args.out)
    return 0


def cmd_history(args) -> int:
    try:
        ds = load_history(args.data)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    if args.report == "validation":
        model, gap = _load_params(args.params)
        rep = model_validation(ds.fit_dataset(args.pool), model, gap, args.iterations, args.seed)
        _dump_json(rep.to_dict(), args.out)
        if args.histogram_out:
            Path(args.histogram_out).write_text(rep.histogram_csv())
        return 0
    rows = history_report(ds, args.report)
    if args.out and args.out.endswith(".csv"):
        _write_csv(rows, args.out)
    else:
        _dump_json(rows, args.out)
    return 0


# reproduce ------------------------------------------------------------------

def _pct(x: float) -> str:
    return f"{100 * x:.2f}"


def table_layout(name: str, reports) -> list[dict]:
    """Rows mirroring the published table layout (percentages)."""
    rows = []
    if name == "table5":
        for i in range(0, len(reports), 3):
            ps = reports[i].config.ps
            for label, v in zip(("competitive", "collusive", "stakeless"), VERDICTS):
                row = {"points": f"{ps.win_pts},{ps.draw_pts}", "type": label}
                for r in reports[i:i + 3]:
                    row[f"setting_{r.config.choice.setting}"] = _pct(r.frequency(v))
                rows.append(row)
    elif name == "groups3":
        for label, v in zip(("competitive", "collusive", "stakeless"), VERDICTS):
            row = {"type": label}
            for r in reports:
                row[f"setting_{r.config.choice.setting}"] = _pct(r.frequency(v))
            rows.append(row)
    elif name == "uefa":
        for r in reports:
            rows.append({"setting": r.config.choice.setting,
                         **{label: _pct(r.frequency(v)) for label, v in zip(
                             ("competitive", "collusive", "stakeless"), VERDICTS)}})
    else:
        for i in range(0, len(reports), 3):
            row = {"passive_pot": "ABCDE"[reports[i].config.choice.passive_pot - 1]}
            for r in reports[i:i + 3]:
                s = r.config.choice.setting
                for label, v in zip(("comp", "col", "stkless"), VERDICTS):
                    row[f"s{s}_{label}"] = _pct(r.frequency(v))
            rows.append(row)
    return rows


def cmd_reproduce(args) -> int:
    outdir = Path(args.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create {outdir}: {exc}") from None
    model, gap = _load_params(args.params)
    manifest = {
        "command": "reproduce",
        "version": __version__,
        "seed": args.seed,
        "iterations": args.iterations,
        "validation_iterations": args.validation_iterations,
        "params": model_to_dict(model, gap),
        "inputs": {},
        "outputs": [],
        "skipped": [],
    }
    if args.params:
        manifest["inputs"]["params_sha256"] = _sha256(args.params)

    for name in TABLES:
        log.info("simulating %s", name)
        reports = sweep(table_configs(name, model, gap, args.iterations, args.seed), workers=args.threads)
        _dump_json({"table": name, "reports": [r.to_dict() for r in reports]}, outdir / f"{name}.json")
        _write_csv(table_layout(name, reports), outdir / f"{name}.csv")
        manifest["outputs"] += [f"{name}.json", f"{name}.csv"]

    data_outputs = ["table3", "table2_edition_goals", "table4_score_grid", "table6_settings",
                    "table7_classes", "validation"]
    if args.data is None:
        for name in data_outputs:
            log.warning("skipping %s: needs --data", name)
        manifest["skipped"] = data_outputs
    else:
        try:
            ds = load_history(args.data)
        except (OSError, ValueError) as exc:
            raise DataError(str(exc)) from None
        manifest["inputs"]["data_sha256"] = _sha256(args.data)
        data = ds.fit_dataset()
        fits = [fit(f, data) for f in FAMILIES]
        _dump_json([f.to_dict() for f in fits], outdir / "table3.json")
        _write_csv([{"family": f.model.family, "gap": f.gap, "log_likelihood": f.log_likelihood,
                     "n_params": f.n_params, "aic": f.aic, "bic": f.bic, "logloss": f.logloss,
                     "brier": f.brier} for f in fits], outdir / "table3.csv")
        for stem, kind in (("table2_edition_goals", "edition_goals"), ("table4_score_grid", "score_grid"),
                           ("table6_settings", "settings"), ("table7_classes", "classes")):
            _write_csv(history_report(ds, kind), outdir / f"{stem}.csv")
        rep = model_validation(data, model, gap, args.validation_iterations, args.seed)
        _dump_json(rep.to_dict(), outdir / "validation.json")
        (outdir / "validation_gd_histogram.csv").write_text(rep.histogram_csv())
        manifest["outputs"] += ["table3.json", "table3.csv"] + [f"{s}.csv" for s in data_outputs[1:5]] + [
            "validation.json", "validation_gd_histogram.csv"]
    _dump_json(manifest, outdir / "manifest.json")
    return 0


# parser ---------------------------------------------------------------------

def _add_sim_common(p, seed_default):
    p.add_argument("--iterations", type=int, default=15000, help="group iterations per cell (default 15000)")
    p.add_argument("--seed", type=int, default=seed_default, help="master seed (default $GROUPSTAGE_SEED)")
    p.add_argument("--params", help="model parameter JSON (default: fitted simple Poisson)")
    p.add_argument("--unit", choices=("game", "group"), default="game",
                   help="count each last-round game, or each group once by its worst verdict")
    p.add_argument("--threads", type=int, default=1, help="worker processes; results do not depend on it")


def build_parser(seed_default: int = DEFAULT_SEED) -> argparse.ArgumentParser:
    parser = _Parser(prog="groupstage", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="fit a score model by maximum likelihood")
    p.add_argument("--data", required=True, help="games CSV; rounds 1-2 are used")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--max-iterations", type=int, default=4000)
    p.add_argument("--pool", choices=(POOLED, PER_EDITION), default=POOLED,
                   help="Elo rescaling range: all games pooled or per edition")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="Monte Carlo frequencies for one format/setting")
    p.add_argument("--format", required=True, choices=[k.value for k in FormatKind])
    p.add_argument("--setting", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--passive-pot", help="A..E, required for groups of 5")
    p.add_argument("--points", default="3,1", help="W,D points (default 3,1)")
    _add_sim_common(p, seed_default)
    p.add_argument("--out", help="report JSON (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run every cell of one results table")
    p.add_argument("--table", required=True, choices=TABLES)
    _add_sim_common(p, seed_default)
    p.add_argument("--out", help="reports JSON (default stdout)")
    p.add_argument("--csv", help="also write the table layout as CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classify", help="classify one last-round game")
    p.add_argument("--context", required=True, help="GroupContext JSON file, or - for stdin")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("history", help="reports on a historical games file")
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True, choices=REPORT_KINDS)
    p.add_argument("--iterations", type=int, default=15000, help="validation only")
    p.add_argument("--seed", type=int, default=seed_default, help="validation only")
    p.add_argument("--params", help="validation only; default fitted simple Poisson")
    p.add_argument("--pool", choices=(POOLED, PER_EDITION), default=POOLED)
    p.add_argument("--out", help="output file (.csv for CSV, else JSON; default stdout)")
    p.add_argument("--histogram-out", help="validation only: |goal difference| histogram CSV")
    p.set_defaults(func=cmd_history)

    p = sub.add_parser("reproduce", help="regenerate every results table into a directory")
    p.add_argument("--outdir", required=True)
    p.add_argument("--params", help="model parameter JSON (default: fitted simple Poisson)")
    p.add_argument("--data", help="historical games CSV; enables the data-driven tables")
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--iterations", type=int, default=15000)
    p.add_argument("--validation-iterations", type=int, default=15000)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_seed())
    except UsageError as exc:
        print(f"groupstage: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    for name in ("iterations", "threads", "restarts"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            print(f"groupstage: error: --{name} must be >= 1", file=sys.stderr)
            return USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"groupstage: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DataError, HistoryFormatError, ExperimentError) as exc:
        print(f"groupstage: data error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
