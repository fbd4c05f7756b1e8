"""Command line front end: estimation on CSV data, simulation batteries,
breakdown sweeps, and precision-based regression."""

import json
import time

import click
import numpy as np

from . import dataio
from .estimators import METHODS, RobustGraphicalLasso
from .regression import regression_from_precision
from .simulate import (
    ContaminationSpec,
    SchemeSpec,
    breakdown_sweep,
    run_experiment,
)

_SCHEMES = ("banded", "sparse", "dense", "diagonal")


def _parse_estimators(text):
    ids = tuple(s.strip() for s in text.split(",") if s.strip())
    if not ids:
        raise click.UsageError("no estimator ids given")
    for est in ids:
        if est not in METHODS:
            raise click.UsageError(
                f"unknown estimator id {est!r}; valid ids: {', '.join(METHODS)}"
            )
    return ids


def _parse_floats(text, option):
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise click.UsageError(f"{option} must be a comma-separated list of numbers")


@click.group()
def main():
    """Cellwise-robust sparse precision matrix estimation."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--header/--no-header", default=False, show_default=True,
              help="Whether the first CSV line holds column names.")
@click.option("--method", type=click.Choice(METHODS), default="GlassoGaussQn",
              show_default=True)
@click.option("--selection", type=click.Choice(["cv", "bic", "fixed"]), default="cv",
              show_default=True)
@click.option("--rho", type=float, default=None,
              help="Penalty value, required when --selection fixed.")
@click.option("--cv-folds", type=int, default=5, show_default=True)
@click.option("--scale", type=click.Choice(["qn", "mad", "sd"]), default="qn",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the cross-validation shuffle; echoed in the summary.")
@click.option("--zero-tol", type=float, default=1e-8, show_default=True)
@click.option("--center-median", is_flag=True,
              help="Subtract coordinatewise medians before estimation.")
@click.option("--out-prefix", required=True,
              help="Writes <prefix>.theta.csv, <prefix>.edges.tsv, <prefix>.summary.json")
def estimate(input_path, header, method, selection, rho, cv_folds, scale, seed,
             zero_tol, center_median, out_prefix):
    """Estimate a sparse precision matrix from a CSV file."""
    if selection == "fixed" and rho is None:
        raise click.UsageError("--selection fixed requires --rho")
    start = time.perf_counter()
    data = dataio.ingest_csv(input_path, has_header=header)
    X = data.values
    if center_median:
        X = X - np.median(X, axis=0)
    model = RobustGraphicalLasso(
        method=method, selection=selection, rho=rho, cv_folds=cv_folds,
        scale=scale, seed=seed, zero_tol=zero_tol,
    )
    model.fit(X)
    theta = model.precision_
    nonzeros = int(np.sum(np.abs(theta) > zero_tol))
    elapsed_ms = (time.perf_counter() - start) * 1e3
    dataio.write_matrix_csv(f"{out_prefix}.theta.csv", theta)
    dataio.write_edges_tsv(f"{out_prefix}.edges.tsv", theta, zero_tol=zero_tol)
    dataio.write_summary_json(f"{out_prefix}.summary.json", {
        "method": method,
        "rho": model.rho_,
        "kkt_residual": model.kkt_residual_,
        "nonzeros": nonzeros,
        "seed": seed,
        "n": data.n,
        "p": data.p,
        "elapsed_ms": elapsed_ms,
    })
    click.echo(f"wrote {out_prefix}.theta.csv, {out_prefix}.edges.tsv, "
               f"{out_prefix}.summary.json (seed={seed})")


@main.command()
@click.option("--scheme", type=click.Choice(_SCHEMES), required=True)
@click.option("--p", type=int, default=60, show_default=True)
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--m", "--M", "n_replications", type=int, default=100,
              show_default=True, help="Number of replications.")
@click.option("--contamination", type=click.Choice(["none", "cellwise", "alt-t"]),
              default="none", show_default=True)
@click.option("--epsilon", type=float, default=0.05, show_default=True)
@click.option("--spike-mean", type=float, default=10.0, show_default=True)
@click.option("--spike-var", type=float, default=0.2, show_default=True)
@click.option("--df", type=float, default=2.0, show_default=True)
@click.option("--estimators", default="GlassoGaussQn,GlassoClass", show_default=True,
              help="Comma-separated estimator ids.")
@click.option("--seed", type=int, required=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--cv-folds", type=int, default=5, show_default=True)
@click.option("--out", "out_prefix", required=True,
              help="Writes <out>.csv and <out>.jsonl")
def simulate(scheme, p, n, n_replications, contamination, epsilon, spike_mean,
             spike_var, df, estimators, seed, threads, cv_folds, out_prefix):
    """Run a seeded simulation battery and write aggregate and per-replication
    results."""
    ids = _parse_estimators(estimators)
    kind = contamination.replace("-", "_")
    spec = ContaminationSpec(kind=kind, epsilon=epsilon, spike_mean=spike_mean,
                             spike_var=spike_var, df=df)
    report = run_experiment(
        SchemeSpec(scheme, p), spec, ids, n=n, n_replications=n_replications,
        seed=seed, threads=threads, cv_folds=cv_folds,
    )
    dataio.write_report_csv(f"{out_prefix}.csv", report)
    dataio.write_report_jsonl(f"{out_prefix}.jsonl", report)
    click.echo(f"wrote {out_prefix}.csv and {out_prefix}.jsonl")


@main.command()
@click.option("--scheme", type=click.Choice(_SCHEMES), required=True)
@click.option("--p", type=int, default=60, show_default=True)
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--m", "--M", "n_replications", type=int, default=5, show_default=True)
@click.option("--epsilons", default="0,0.1,0.2,0.3,0.4", show_default=True)
@click.option("--magnitude", type=float, default=1e8, show_default=True)
@click.option("--spike-var", type=float, default=None,
              help="Spike variance; defaults to 0.2 * magnitude.")
@click.option("--estimators", default="GlassoGaussQn,GlassoNPDQn,GlassoClass",
              show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--cv-folds", type=int, default=5, show_default=True)
@click.option("--out", "out_prefix", required=True,
              help="Writes <out>.kl.csv, <out>.d.csv and <out>.jsonl")
def sweep(scheme, p, n, n_replications, epsilons, magnitude, spike_var, estimators,
          seed, threads, cv_folds, out_prefix):
    """Breakdown sweep: contamination level versus accuracy and estimate
    displacement."""
    ids = _parse_estimators(estimators)
    eps = _parse_floats(epsilons, "--epsilons")
    report = breakdown_sweep(
        SchemeSpec(scheme, p), eps, ids, n=n, n_replications=n_replications,
        magnitude=magnitude, seed=seed, threads=threads, cv_folds=cv_folds,
        spike_var=spike_var,
    )
    dataio.write_sweep_csv(f"{out_prefix}.kl.csv", f"{out_prefix}.d.csv", report)
    dataio.write_sweep_jsonl(f"{out_prefix}.jsonl", report)
    click.echo(f"wrote {out_prefix}.kl.csv, {out_prefix}.d.csv and {out_prefix}.jsonl")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--header/--no-header", default=False, show_default=True)
@click.option("--target", required=True,
              help="Response column: a name (with --header) or a 0-based index.")
@click.option("--method", type=click.Choice(METHODS), default="GlassoGaussQn",
              show_default=True)
@click.option("--selection", type=click.Choice(["cv", "bic", "fixed"]), default="cv",
              show_default=True)
@click.option("--rho", type=float, default=None)
@click.option("--cv-folds", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, help="Coefficient CSV path.")
def regress(input_path, header, target, method, selection, rho, cv_folds, seed,
            out_path):
    """Sparse regression coefficients through the joint precision matrix."""
    if selection == "fixed" and rho is None:
        raise click.UsageError("--selection fixed requires --rho")
    data = dataio.ingest_csv(input_path, has_header=header)
    if data.column_names and target in data.column_names:
        target_idx = data.column_names.index(target)
    else:
        try:
            target_idx = int(target)
        except ValueError:
            raise click.UsageError(f"unknown target column {target!r}")
        if not 0 <= target_idx < data.p:
            raise click.UsageError(f"target index {target_idx} out of range")
    y = data.values[:, target_idx]
    X = np.delete(data.values, target_idx, axis=1)
    beta = regression_from_precision(
        X, y, method=method, selection=selection, rho=rho, cv_folds=cv_folds,
        seed=seed,
    )
    names = None
    if data.column_names:
        names = [c for i, c in enumerate(data.column_names) if i != target_idx]
    with open(out_path, "w") as fh:
        fh.write("variable,coefficient\n")
        for i, b in enumerate(beta):
            label = names[i] if names else str(i)
            fh.write(f"{label},{dataio.FLOAT_FMT % b}\n")
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
