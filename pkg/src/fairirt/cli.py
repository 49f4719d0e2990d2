"""Command-line interface.

Subcommands::

    fairirt metrics     --input pairs.csv --output matrix.csv [--task ...] [--metric ...]
    fairirt fit         --input matrix.csv --output fit.json [--rasch] [--epochs N] [--lr R] [--seed S]
    fairirt simulate    --output DIR [--seed S] [--n-models N] [--n-individuals M] [--noiseless]
    fairirt analyze     --input fit.json --output DIR [--matrix matrix.csv] [--top-k K]
    fairirt disentangle --input rasch_fit.json --output disentangle.csv
    fairirt curves      --input fit.json --output curves.csv [--grid G]
    fairirt pipeline    --input manifest.json [--output DIR]

Failures exit with status 1 and print one line ``error[<category>]: <message>``
to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from fairirt import analysis, io
from fairirt.errors import FairIRTError, FormatError
from fairirt.fit import FitConfig, fit_beta_irt
from fairirt.metrics import MetricConfig, build_response_matrix
from fairirt.simulate import SimulationSpec, individual_labels, model_labels, simulate

def _lambda_arg(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a positive number, got {text!r}") from None


def _metric_config(args) -> MetricConfig:
    return MetricConfig(task=args.task, metric=args.metric, epsilon=args.epsilon,
                        lambda_mode=args.lam, conditioning=args.conditioning)


def _fit_config(args, rasch=None) -> FitConfig:
    defaults = FitConfig()
    return FitConfig(
        epochs=args.epochs if args.epochs is not None else defaults.epochs,
        learning_rate=args.lr if args.lr is not None else defaults.learning_rate,
        seed=args.seed if args.seed is not None else defaults.seed,
        rasch=args.rasch if rasch is None else rasch,
    )


# ---------------------------------------------------------------------------
# analysis artifacts shared by `analyze` and `pipeline`
# ---------------------------------------------------------------------------

def _write_analysis(report, outdir: Path, top_k, matrix=None, flatness_grid=None):
    io.write_model_summaries(analysis.model_summaries(report, matrix), outdir / "models.csv")
    io.write_individual_summaries(analysis.individual_summaries(report, flatness_grid), outdir / "individuals.csv")
    special = analysis.special_individuals(report)
    io.write_individual_summaries(special, outdir / "special.csv")
    k = min(top_k, report.parameters.n_individuals)
    flattest = analysis.flattest_individuals(report, k, flatness_grid)
    io.write_individual_summaries(flattest, outdir / "flattest.csv")
    return special, flattest


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_metrics(args):
    records = io.read_prediction_pairs(args.input)
    matrix = build_response_matrix(records, _metric_config(args))
    io.write_response_matrix(matrix, args.output)
    print(f"matrix {matrix.n_models}x{matrix.n_individuals} clamped={matrix.clamp_count} "
          f"excluded={len(matrix.excluded_cells)} -> {args.output}")


def cmd_fit(args):
    matrix = io.read_response_matrix(args.input)
    report = fit_beta_irt(matrix, _fit_config(args))
    io.write_fit_report(report, args.output)
    print(f"fit epochs={report.epochs_run} loss={report.final_loss!r} converged={report.converged} "
          f"rasch={report.config.rasch} -> {args.output}")


def cmd_simulate(args):
    spec = SimulationSpec(
        n_models=args.n_models, n_individuals=args.n_individuals,
        seed=args.seed if args.seed is not None else 0,
        discrimination=args.discrimination, negative_fraction=args.negative_fraction,
        noiseless=args.noiseless,
    )
    truth, matrix = simulate(spec)
    out = Path(args.output)
    io.write_parameters(truth, out / "truth.json", model_labels(spec.n_models), individual_labels(spec.n_individuals))
    io.write_response_matrix(matrix, out / "matrix.csv")
    print(f"simulated {spec.n_models}x{spec.n_individuals} (clamped={matrix.clamp_count}) -> {out}")


def cmd_analyze(args):
    report = io.read_fit_report(args.input)
    matrix = io.read_response_matrix(args.matrix) if args.matrix else None
    special, flattest = _write_analysis(report, Path(args.output), args.top_k, matrix)
    print(f"special={len(special)} flattest={[r.individual_id for r in flattest]} -> {args.output}")


def cmd_disentangle(args):
    report = io.read_fit_report(args.input)
    io.write_disentangle(analysis.disentangle(report), args.output)
    print(f"disentangled {report.parameters.n_models}x{report.parameters.n_individuals} -> {args.output}")


def cmd_curves(args):
    report = io.read_fit_report(args.input)
    io.export_curves(report, args.grid, args.output)
    print(f"curves grid={args.grid} -> {args.output}")


def run_pipeline(manifest_path, output_dir=None) -> dict:
    """Run every stage described by a manifest; returns the summary dict."""
    man = io.read_manifest(manifest_path)
    out = Path(output_dir) if output_dir is not None else Path(man["output_dir"])
    truth = None
    if not man["inputs"]:
        sim = dict(man["simulate"])
        for key in ("ability_range", "difficulty_range"):
            if key in sim:
                sim[key] = tuple(sim[key])
        try:
            spec = SimulationSpec(**sim)
        except TypeError as exc:
            raise FormatError(f"{manifest_path}: bad simulate section ({exc})") from None
        truth, matrix = simulate(spec)
        io.write_parameters(truth, out / "truth.json", matrix.model_ids, matrix.individual_ids)
    elif "pairs" in man["inputs"]:
        metric = dict(man["metric"])
        if "lambda" in metric:
            metric["lambda_mode"] = metric.pop("lambda")
        try:
            cfg = MetricConfig(**metric)
        except TypeError as exc:
            raise FormatError(f"{manifest_path}: bad metric section ({exc})") from None
        matrix = build_response_matrix(io.read_prediction_pairs(man["inputs"]["pairs"]), cfg)
    else:
        matrix = io.read_response_matrix(man["inputs"]["matrix"])
    io.write_response_matrix(matrix, out / "matrix.csv")

    fit_section = dict(man["fit"])
    fit_section.pop("rasch", None)
    try:
        full_cfg = FitConfig(**fit_section, rasch=False)
    except TypeError as exc:
        raise FormatError(f"{manifest_path}: bad fit section ({exc})") from None
    rasch_cfg = FitConfig(**fit_section, rasch=True)
    report = fit_beta_irt(matrix, full_cfg)
    rasch = fit_beta_irt(matrix, rasch_cfg)
    io.write_fit_report(report, out / "fit.json")
    io.write_fit_report(rasch, out / "rasch_fit.json")

    opts = man["analysis"]
    top_k = int(opts.get("top_k", 5))
    grid = int(opts.get("grid", 200))
    flat_grid = opts.get("flatness_grid")
    special, flattest = _write_analysis(report, out, top_k, matrix, flat_grid)
    io.write_disentangle(analysis.disentangle(rasch), out / "disentangle.csv")
    io.export_curves(report, grid, out / "curves.csv")

    summary = {
        "format_version": io.FORMAT_VERSION,
        "kind": "pipeline_summary",
        "n_models": matrix.n_models,
        "n_individuals": matrix.n_individuals,
        "clamp_count": matrix.clamp_count,
        "excluded_cells": [list(c) for c in matrix.excluded_cells],
        "fit": {"final_loss": report.final_loss, "epochs_run": report.epochs_run, "converged": report.converged},
        "rasch_fit": {"final_loss": rasch.final_loss, "epochs_run": rasch.epochs_run, "converged": rasch.converged},
        "special_individuals": [r.individual_id for r in special],
        "flattest_individuals": [r.individual_id for r in flattest],
    }
    if truth is not None:
        summary["recovery"] = analysis.recovery_summary(truth, report.parameters)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    return summary


def cmd_pipeline(args):
    summary = run_pipeline(args.input, args.output)
    print(f"pipeline {summary['n_models']}x{summary['n_individuals']} "
          f"special={len(summary['special_individuals'])} -> {args.output or 'manifest output_dir'}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairirt", description="Fairness evaluation with beta item response theory.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, output_help):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--input", required=name != "simulate", help="input file")
        p.add_argument("--output", required=name != "pipeline", help=output_help)
        p.set_defaults(func=func)
        return p

    def fit_flags(p):
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--lr", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)

    p = add("metrics", cmd_metrics, "prediction pairs -> response matrix", "matrix CSV to write")
    p.add_argument("--task", choices=("classification", "regression"), default="classification")
    p.add_argument("--metric", choices=("sts", "es"), default="sts")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=_lambda_arg, default="auto")
    p.add_argument("--conditioning", choices=("eodd", "eopp"), default="eodd")

    p = add("fit", cmd_fit, "response matrix -> fit report", "fit report JSON to write")
    fit_flags(p)
    p.add_argument("--rasch", action="store_true", help="fix every discrimination at 1")

    p = add("simulate", cmd_simulate, "write simulated truth.json and matrix.csv", "output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-models", type=int, default=20)
    p.add_argument("--n-individuals", type=int, default=50)
    p.add_argument("--discrimination", choices=("mixed", "positive_only", "fixed"), default="mixed")
    p.add_argument("--negative-fraction", type=float, default=0.15)
    p.add_argument("--noiseless", action="store_true")

    p = add("analyze", cmd_analyze, "fit report -> rankings, special and flattest individuals", "output directory")
    p.add_argument("--matrix", default=None, help="observed matrix, adds observed row means to models.csv")
    p.add_argument("--top-k", type=int, default=5)

    add("disentangle", cmd_disentangle, "Rasch fit report -> decomposition table", "CSV to write")

    p = add("curves", cmd_curves, "fit report -> long-format ICC table", "CSV to write")
    p.add_argument("--grid", type=int, default=200)

    add("pipeline", cmd_pipeline, "run every stage from a manifest", "output directory (overrides manifest)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        args.func(args)
    except FairIRTError as exc:
        print(f"error[{exc.category}]: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
