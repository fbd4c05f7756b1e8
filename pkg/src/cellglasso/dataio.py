"""CSV/TSV/JSON input and output for the command line front end.

All numeric output uses 17 significant digits so repeated runs are
byte-comparable.
"""

import csv
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

FLOAT_FMT = "%.17g"


@dataclass
class DataMatrix:
    """An observations-by-variables matrix with optional column names."""

    values: np.ndarray
    column_names: Optional[list] = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def ingest_csv(path, has_header=False) -> DataMatrix:
    """Read a rectangular numeric CSV; rows are observations.

    Ragged rows, non-numeric cells and missing cells are rejected with the
    offending 1-based row/column coordinates (header line included in row
    numbering).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [(i + 1, row) for i, row in enumerate(reader) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")
    column_names = None
    if has_header:
        column_names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: no data rows after header")
    width = len(rows[0][1])
    data = np.empty((len(rows), width))
    for r, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise ValueError(
                f"{path}: row {lineno} has {len(row)} cells, expected {width}"
            )
        for c, cell in enumerate(row):
            text = cell.strip()
            if not text:
                raise ValueError(f"{path}: missing cell at row {lineno}, column {c + 1}")
            try:
                value = float(text)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell {text!r} at row {lineno}, column {c + 1}"
                ) from None
            if not np.isfinite(value):
                raise ValueError(
                    f"{path}: non-finite cell at row {lineno}, column {c + 1}"
                )
            data[r, c] = value
    if column_names is not None and len(column_names) != width:
        raise ValueError(f"{path}: header has {len(column_names)} names for {width} columns")
    return DataMatrix(values=data, column_names=column_names)


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return "nan"
    return FLOAT_FMT % x


def write_matrix_csv(path, matrix):
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        for row in matrix:
            fh.write(",".join(FLOAT_FMT % v for v in row))
            fh.write("\n")


def write_edges_tsv(path, theta, zero_tol=1e-8):
    """Upper-triangle nonzeros as 0-based (i, j, weight) rows."""
    theta = np.asarray(theta, dtype=float)
    p = theta.shape[0]
    with open(path, "w", newline="") as fh:
        fh.write("i\tj\tweight\n")
        for i in range(p):
            for j in range(i + 1, p):
                if abs(theta[i, j]) > zero_tol:
                    fh.write(f"{i}\t{j}\t{FLOAT_FMT % theta[i, j]}\n")


def write_summary_json(path, summary: dict):
    """Fixed-key-order JSON summary; 'elapsed_ms' is the only timing field."""
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, allow_nan=True)
        fh.write("\n")


REPORT_COLUMNS = ("scheme", "contamination", "estimator", "mean_kl", "mean_fp",
                  "mean_fn", "mean_time_ms", "M", "seed")


def write_report_csv(path, report):
    agg = report.aggregates()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for est in report.estimators:
            a = agg[est]
            writer.writerow([
                report.scheme, report.contamination, est,
                _fmt(a["mean_kl"]), _fmt(a["mean_fp"]), _fmt(a["mean_fn"]),
                _fmt(a["mean_time_ms"]), report.n_replications, report.seed,
            ])


def write_report_jsonl(path, report):
    with open(path, "w") as fh:
        for r in report.records:
            fh.write(json.dumps({
                "replication": r.replication,
                "estimator": r.estimator,
                "kl": None if np.isnan(r.kl) else r.kl,
                "fp": None if np.isnan(r.fp) else r.fp,
                "fn": None if np.isnan(r.fn) else r.fn,
                "time_ms": r.time_ms,
                "rho": r.rho,
                "converged": r.converged,
                "error": r.error,
            }))
            fh.write("\n")


def write_sweep_csv(kl_path, d_path, sweep):
    """One row per (epsilon, estimator) in each table, epsilon-major order."""
    kl = sweep.kl_table()
    d = sweep.d_table()
    for path, table, column in ((kl_path, kl, "mean_kl"), (d_path, d, "mean_d")):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scheme", "epsilon", "estimator", column, "M", "seed"])
            for eps in sweep.epsilons:
                for est in sweep.estimators:
                    writer.writerow([
                        sweep.scheme, _fmt(eps), est, _fmt(table[eps][est]),
                        sweep.n_replications, sweep.seed,
                    ])


def write_sweep_jsonl(path, sweep):
    with open(path, "w") as fh:
        for r in sweep.records:
            fh.write(json.dumps({
                "epsilon": r.epsilon,
                "replication": r.replication,
                "estimator": r.estimator,
                "kl": None if np.isnan(r.kl) else r.kl,
                "d_value": None if np.isnan(r.d_value) else r.d_value,
                "rho_clean": r.rho_clean,
                "rho_contaminated": r.rho_contaminated,
                "error": r.error,
            }))
            fh.write("\n")
