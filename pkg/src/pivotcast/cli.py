"""Batch entry point: ingest, fit, correct, bayes, report, serve.

Every flag can also come from a JSON config file (--config); explicit
flags win over the file, which wins over built-in defaults. All
randomness flows from --seed, so identical invocations write identical
bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import date
from pathlib import Path

from .bayes import diagnostics, export_chains_csv
from .correction import PivotSet
from .errors import PivotcastError, UsageError
from .evaluate import (
    DEFAULT_FEATURES,
    ExperimentOptions,
    export_predictions_csv,
    run_experiment,
)
from .ingest import AlignPolicy, load_dataset_dir

DEFAULTS = {
    "data": None,
    "target": "price",
    "features": ",".join(DEFAULT_FEATURES),
    "lambda": 0.01,
    "lambda_grid": None,
    "folds": 5,
    "pivots": None,
    "split": None,
    "seed": 0,
    "chains": 4,
    "samples": 1000,
    "warmup": 1000,
    "fast": False,
    "policy": "intersect",
    "max_gap": 3,
    "var_level": 0.05,
    "var_draws": 10_000,
    "host": None,  # env PIVOTCAST_HOST, then 127.0.0.1
    "port": None,  # env PIVOTCAST_PORT, then 8000
    "ui": None,
    "snapshot": None,
    "series_out": None,
    "summary_out": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pivotcast",
        description="Lasso price regression with expert correction and Bayesian risk",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_required: bool = True):
        p.add_argument("--data", help="directory of per-series CSV files (date,value)")
        p.add_argument("--config", help="JSON file supplying any flag; flags override it")
        p.add_argument("--target", help="target column name (default price)")
        p.add_argument("--features", help="comma-separated regressor names, in order")
        p.add_argument("--out", required=out_required, help="output file path")
        p.add_argument("--seed", type=int, help="master seed (default 0)")

    def model(p: argparse.ArgumentParser):
        p.add_argument("--lambda", dest="lambda_", type=float, help="L1 penalty weight")
        p.add_argument("--lambda-grid", dest="lambda_grid",
                       help="comma list; picks by forward-chaining CV instead of --lambda")
        p.add_argument("--folds", type=int, help="CV folds for --lambda-grid")
        p.add_argument("--pivots", help="pivot JSON file (expert correction)")
        p.add_argument("--split", help="train/test boundary date YYYY-MM-DD")

    def mcmc(p: argparse.ArgumentParser):
        p.add_argument("--chains", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--warmup", type=int)

    p_ingest = sub.add_parser("ingest", help="align raw series into one dataset CSV")
    common(p_ingest)
    p_ingest.add_argument("--policy", choices=["intersect", "forward_fill"])
    p_ingest.add_argument("--max-gap", dest="max_gap", type=int,
                          help="max forward-fill gap in days")

    p_fit = sub.add_parser("fit", help="fit the Lasso model, write the coefficient table")
    common(p_fit)
    model(p_fit)

    p_correct = sub.add_parser("correct", help="fit base and expert-corrected models (no MCMC)")
    common(p_correct)
    model(p_correct)

    p_bayes = sub.add_parser("bayes", help="sample the posterior, write draws as CSV")
    common(p_bayes)
    model(p_bayes)
    mcmc(p_bayes)
    p_bayes.add_argument("--summary-out", dest="summary_out",
                         help="also write summaries + diagnostics JSON here")

    p_report = sub.add_parser("report", help="full pipeline report (fit, correct, sample)")
    common(p_report)
    model(p_report)
    mcmc(p_report)
    p_report.add_argument("--fast", action=argparse.BooleanOptionalAction, default=None,
                          help="skip the Bayesian stage (partial report)")
    p_report.add_argument("--series-out", dest="series_out",
                          help="also write per-date actual/predicted CSV here")

    p_serve = sub.add_parser("serve", help="run the expert-correction HTTP service")
    common(p_serve, out_required=False)
    model(p_serve)
    mcmc(p_serve)
    p_serve.add_argument("--host")
    p_serve.add_argument("--port", type=int)
    p_serve.add_argument("--fast", action=argparse.BooleanOptionalAction, default=None)
    p_serve.add_argument("--ui", help="directory of static UI assets to mount at /ui")
    p_serve.add_argument("--snapshot", help="JSON file for session persistence on shutdown")

    return parser


def _merged(args: argparse.Namespace) -> dict:
    """flags > config file > defaults; returns a flat option dict."""
    merged = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise UsageError(f"--config file not found: {path}")
        try:
            file_values = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config is not valid JSON: {exc}") from exc
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"--config has unknown keys: {sorted(unknown)}")
        merged.update(file_values)
    for key, value in vars(args).items():
        name = "lambda" if key == "lambda_" else key
        if name in ("command", "config"):
            continue
        if value is not None:
            merged[name] = value
    return merged


def _features(opts: dict) -> list[str]:
    raw = opts["features"]
    names = [f.strip() for f in str(raw).split(",") if f.strip()]
    if not names:
        raise UsageError("--features must name at least one column")
    return names


def _require_data(opts: dict) -> Path:
    data = opts.get("data")
    if not data:
        raise UsageError("--data is required")
    return Path(data)


def _load_dataset(opts: dict):
    policy = AlignPolicy(mode=opts["policy"], max_gap_days=int(opts["max_gap"]))
    return load_dataset_dir(_require_data(opts), _features(opts), opts["target"], policy)


def _experiment_options(opts: dict, run_bayes: bool) -> ExperimentOptions:
    lam = float(opts["lambda"])
    if lam < 0:
        raise UsageError(f"--lambda must be >= 0, got {lam}")
    grid = opts["lambda_grid"]
    if grid is not None:
        if isinstance(grid, str):
            grid = [float(x) for x in grid.split(",") if x.strip()]
        grid = tuple(float(x) for x in grid)
        if any(g < 0 for g in grid):
            raise UsageError("--lambda-grid values must be >= 0")
    split = opts["split"]
    if isinstance(split, str):
        try:
            split = date.fromisoformat(split)
        except ValueError as exc:
            raise UsageError(f"--split must be YYYY-MM-DD: {exc}") from exc
    return ExperimentOptions(
        features=tuple(_features(opts)),
        lambda_=lam,
        lambda_grid=grid,
        n_folds=int(opts["folds"]),
        split=split,
        seed=int(opts["seed"]),
        run_bayes=run_bayes,
        n_chains=int(opts["chains"]),
        n_samples=int(opts["samples"]),
        n_warmup=int(opts["warmup"]),
        var_level=float(opts["var_level"]),
        var_draws=int(opts["var_draws"]),
    )


def _load_pivots(opts: dict, required: bool = False) -> PivotSet | None:
    path = opts.get("pivots")
    if not path:
        if required:
            raise UsageError("--pivots is required for this command")
        return None
    path = Path(path)
    if not path.exists():
        raise UsageError(f"--pivots file not found: {path}")
    return PivotSet.from_json(path)


def cmd_ingest(opts: dict) -> int:
    dataset = _load_dataset(opts)
    names = [dataset.target_name, *[f for f in _features(opts) if f != dataset.target_name]]
    with Path(opts["out"]).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *names])
        for i, day in enumerate(dataset.dates):
            writer.writerow(
                [day.isoformat(), *(repr(float(dataset.columns[n][i])) for n in names)]
            )
    return 0


def cmd_fit(opts: dict) -> int:
    from .lasso import LassoConfig, fit_lasso, select_lambda
    from .preprocess import build_design

    dataset = _load_dataset(opts)
    options = _experiment_options(opts, run_bayes=False)
    design = build_design(dataset, list(options.features))
    lam = options.lambda_
    if options.lambda_grid is not None:
        lam = select_lambda(design, list(options.lambda_grid), options.n_folds)
    fit = fit_lasso(design, LassoConfig(lambda_=lam))
    payload = {
        "lambda": fit.lambda_,
        "intercept": fit.intercept,
        "coefficients": fit.coefficients,
        "n_iter": fit.n_iter,
        "converged": fit.converged,
    }
    Path(opts["out"]).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_correct(opts: dict) -> int:
    dataset = _load_dataset(opts)
    pivots = _load_pivots(opts, required=True)
    result = run_experiment(dataset, pivots, _experiment_options(opts, run_bayes=False))
    Path(opts["out"]).write_text(result.report.to_json())
    return 0


def cmd_bayes(opts: dict) -> int:
    dataset = _load_dataset(opts)
    pivots = _load_pivots(opts)
    result = run_experiment(dataset, pivots, _experiment_options(opts, run_bayes=True))
    chains = result.chains_corrected if result.chains_corrected is not None else result.chains_base
    export_chains_csv(chains, opts["out"])
    if opts.get("summary_out"):
        summaries = result.summaries_corrected or result.summaries_base
        payload = {
            "summaries": [vars(s) for s in summaries],
            "diagnostics": {
                name: {"rhat": r, "ess": e} for name, (r, e) in diagnostics(chains).items()
            },
        }
        Path(opts["summary_out"]).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_report(opts: dict) -> int:
    dataset = _load_dataset(opts)
    pivots = _load_pivots(opts)
    run_bayes = not bool(opts["fast"])
    result = run_experiment(dataset, pivots, _experiment_options(opts, run_bayes=run_bayes))
    Path(opts["out"]).write_text(result.report.to_json())
    if opts.get("series_out"):
        export_predictions_csv(result, opts["series_out"])
    return 0


def cmd_serve(opts: dict) -> int:
    import os

    import uvicorn

    from .service import create_app

    host = opts["host"] or os.environ.get("PIVOTCAST_HOST") or "127.0.0.1"
    port = int(opts["port"] or os.environ.get("PIVOTCAST_PORT") or 8000)
    app = create_app(
        data_root=_require_data(opts),
        defaults=_experiment_options(opts, run_bayes=not bool(opts["fast"])),
        fast=bool(opts["fast"]),
        target=opts["target"],
        ui_dir=Path(opts["ui"]) if opts.get("ui") else None,
        snapshot_path=Path(opts["snapshot"]) if opts.get("snapshot") else None,
    )
    uvicorn.run(app, host=host, port=port)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "fit": cmd_fit,
    "correct": cmd_correct,
    "bayes": cmd_bayes,
    "report": cmd_report,
    "serve": cmd_serve,
}


def run_cli(argv: list[str] | None = None) -> int:
    """Parse and dispatch; 0 = ok, 1 = validation/pipeline error, 2 = usage error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits itself on usage errors / --help
        return int(exc.code or 0)
    try:
        opts = _merged(args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PivotcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
