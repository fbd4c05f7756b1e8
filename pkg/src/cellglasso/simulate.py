"""Monte-Carlo benchmarking harness.

Generates data from known precision structures, applies cellwise spike or
heavy-tail contamination, runs a battery of precision estimators with
cross-validated penalty selection, and scores them by the Kullback-Leibler
divergence and support recovery rates. All randomness flows from a single
master seed through spawned child sequences, so results are reproducible and
independent of worker count and execution order.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CellGlassoError
from .estimators import METHODS, RobustGraphicalLasso
from .linalg import cholesky_lower, eigen_sym, inverse_pd
from .validation import as_seed_sequence, check_symmetric

SCHEME_KINDS = ("banded", "sparse", "dense", "diagonal")
CONTAMINATION_KINDS = ("none", "cellwise", "alt_t")

#: Absolute slack in the smallest-eigenvalue inheritance check.
EIG_BOUND_SLACK = 1e-6


@dataclass(frozen=True)
class SchemeSpec:
    """A named true-precision structure of dimension p."""

    kind: str
    p: int
    seed: Optional[object] = None  # used by the random "sparse" scheme only

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme {self.kind!r}; choose from {SCHEME_KINDS}")
        if self.p < 2:
            raise ValueError("p must be at least 2")


@dataclass(frozen=True)
class ContaminationSpec:
    """What to corrupt: nothing, random cells, or per-coordinate heavy tails."""

    kind: str = "none"
    epsilon: float = 0.0
    spike_mean: float = 10.0
    spike_var: float = 0.2
    df: float = 2.0

    def __post_init__(self):
        if self.kind not in CONTAMINATION_KINDS:
            raise ValueError(
                f"unknown contamination {self.kind!r}; choose from {CONTAMINATION_KINDS}"
            )
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValueError("epsilon must lie in [0, 0.5]")
        if self.df <= 0:
            raise ValueError("df must be positive")

    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "cellwise":
            return f"cellwise:{self.epsilon:g}"
        return f"alt_t:{self.df:g}"


def _sparse_scheme_raw(p, rng):
    """Random sparse structure before standardization, or None if degenerate.

    Off-diagonal entries are 0.5 with probability 0.1; the diagonal shift is
    the exact closed-form value making the condition number equal p, since
    (l1 + d) / (lp + d) = p is linear in d.
    """
    B = np.zeros((p, p))
    upper = np.triu_indices(p, k=1)
    B[upper] = 0.5 * (rng.random(len(upper[0])) < 0.1)
    B = B + B.T
    values = np.linalg.eigvalsh(B)
    l1, lp = values[-1], values[0]
    if l1 - lp <= 1e-12:
        return None
    delta = (l1 - p * lp) / (p - 1)
    return B + delta * np.eye(p)


def make_theta0(spec: SchemeSpec) -> np.ndarray:
    """True precision matrix for a sampling scheme."""
    p = spec.p
    idx = np.arange(p)
    if spec.kind == "banded":
        return 0.6 ** np.abs(np.subtract.outer(idx, idx))
    if spec.kind == "dense":
        return np.full((p, p), 0.5) + 0.5 * np.eye(p)
    if spec.kind == "diagonal":
        return np.eye(p)
    # sparse: random support, conditioned shift, then unit-diagonal rescale
    ss = as_seed_sequence(spec.seed if spec.seed is not None else 0)
    for child in ss.spawn(20):
        raw = _sparse_scheme_raw(p, np.random.default_rng(child))
        if raw is not None:
            d = np.sqrt(np.diag(raw))
            theta = raw / np.outer(d, d)
            np.fill_diagonal(theta, 1.0)
            return theta
    raise CellGlassoError("sparse scheme generation failed after 20 attempts")


def sample_mvn(theta0, n, seed) -> np.ndarray:
    """n rows from a centered Gaussian whose precision matrix is theta0."""
    theta0 = check_symmetric(theta0, name="theta0")
    sigma = inverse_pd(theta0, name="theta0 inverse")
    L = cholesky_lower(sigma)
    if L is None:
        raise CellGlassoError("covariance implied by theta0 is not positive definite")
    rng = np.random.default_rng(as_seed_sequence(seed))
    return rng.standard_normal((n, theta0.shape[0])) @ L.T


def contaminate_cellwise(X, epsilon, mean=10.0, var=0.2, seed=0) -> np.ndarray:
    """Replace exactly floor(epsilon * n * p) cells, drawn uniformly without
    replacement over the whole matrix, by independent Gaussian spikes."""
    X = np.array(X, dtype=float, copy=True)
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 0.5]")
    m = int(np.floor(epsilon * X.size))
    if m == 0:
        return X
    rng = np.random.default_rng(as_seed_sequence(seed))
    cells = rng.choice(X.size, size=m, replace=False)
    X.flat[cells] = rng.normal(mean, np.sqrt(var), size=m)
    return X


def contaminate_cellwise_per_column(X, epsilon, mean=10.0, var=0.2, seed=0) -> np.ndarray:
    """Replace exactly floor(epsilon * n) cells in every column.

    This keeps each column's contaminated count at the nominal budget, the
    regime the breakdown sweep studies; whole-matrix sampling would let
    single columns randomly exceed the scale estimator's breakdown point.
    """
    X = np.array(X, dtype=float, copy=True)
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 0.5]")
    n, p = X.shape
    m = int(np.floor(epsilon * n))
    if m == 0:
        return X
    rng = np.random.default_rng(as_seed_sequence(seed))
    for j in range(p):
        rows = rng.choice(n, size=m, replace=False)
        X[rows, j] = rng.normal(mean, np.sqrt(var), size=m)
    return X


def sample_alternative_t(theta0, n, df, seed) -> np.ndarray:
    """Heavy-tailed draws with an independent Gamma divisor per coordinate.

    Each row starts as a Gaussian draw y with precision theta0; coordinate j
    is y_j / sqrt(tau_j) with tau_j ~ Gamma(shape df/2, rate df/2), drawn
    independently across coordinates and rows, so tail heaviness varies by
    coordinate instead of scaling whole rows.
    """
    theta0 = check_symmetric(theta0, name="theta0")
    if df <= 0:
        raise ValueError("df must be positive")
    rng = np.random.default_rng(as_seed_sequence(seed))
    sigma = inverse_pd(theta0, name="theta0 inverse")
    L = cholesky_lower(sigma)
    if L is None:
        raise CellGlassoError("covariance implied by theta0 is not positive definite")
    Y = rng.standard_normal((n, theta0.shape[0])) @ L.T
    tau = _gamma_divisors(rng, n, theta0.shape[0], df)
    return Y / np.sqrt(tau)


def _gamma_divisors(rng, n, p, df):
    return rng.gamma(shape=df / 2.0, scale=2.0 / df, size=(n, p))


def kl_divergence(theta_hat, theta0) -> float:
    """tr(inv(theta0) theta_hat) - log det(inv(theta0) theta_hat) - p.

    Returns +inf when theta_hat is numerically singular (or indefinite) on
    the log-det path; theta0 must be positive definite.
    """
    theta_hat = check_symmetric(theta_hat, name="theta_hat")
    theta0 = check_symmetric(theta0, name="theta0")
    sigma0 = inverse_pd(theta0, name="theta0")
    L_hat = cholesky_lower(theta_hat)
    if L_hat is None:
        return np.inf
    logdet_hat = 2.0 * float(np.sum(np.log(np.diag(L_hat))))
    logdet_sigma0 = 2.0 * float(np.sum(np.log(np.diag(cholesky_lower(sigma0)))))
    p = theta0.shape[0]
    return float(np.sum(sigma0 * theta_hat)) - (logdet_sigma0 + logdet_hat) - p


def fp_fn(theta_hat, theta0, zero_tol=1e-8):
    """False positive and false negative support rates over all p^2 positions.

    A rate whose denominator is empty (e.g. FP when theta0 has no zeros) is
    reported as nan.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    if theta_hat.shape != theta0.shape:
        raise ValueError("shape mismatch")
    hat_nonzero = np.abs(theta_hat) > zero_tol
    true_zero = theta0 == 0.0
    n_true_zero = int(true_zero.sum())
    n_true_nonzero = theta0.size - n_true_zero
    fp = (hat_nonzero & true_zero).sum() / n_true_zero if n_true_zero else np.nan
    fn = (~hat_nonzero & ~true_zero).sum() / n_true_nonzero if n_true_nonzero else np.nan
    return float(fp), float(fn)


def d_metric(theta_a, theta_b) -> float:
    """Breakdown distance: the larger of the top-eigenvalue gap and the gap
    of inverse smallest eigenvalues; +inf when either matrix is not PD."""
    va = np.linalg.eigvalsh(check_symmetric(theta_a))
    vb = np.linalg.eigvalsh(check_symmetric(theta_b))
    if va[0] <= 0.0 or vb[0] <= 0.0:
        return np.inf
    with np.errstate(over="ignore"):
        return float(max(abs(va[-1] - vb[-1]), abs(1.0 / va[0] - 1.0 / vb[0])))


def smallest_eig_bound_gap(cov_matrix, theta, rho) -> float:
    """Slack in 1/lambda_min(theta) <= lambda_max(S) + rho p (+ tolerance).

    Nonnegative values certify the inheritance bound; the penalized solve
    keeps its smallest eigenvalue above 1/(lambda_max(S) + rho p) no matter
    how contaminated S is.
    """
    p = theta.shape[0]
    lam_max_s = float(np.linalg.eigvalsh(cov_matrix)[-1])
    lam_min_theta = float(np.linalg.eigvalsh(theta)[0])
    if lam_min_theta <= 0.0:
        return -np.inf
    return lam_max_s + rho * p + EIG_BOUND_SLACK - 1.0 / lam_min_theta


@dataclass
class ReplicationRecord:
    replication: int
    estimator: str
    kl: float = np.nan
    fp: float = np.nan
    fn: float = np.nan
    time_ms: float = np.nan
    rho: Optional[float] = None
    converged: Optional[bool] = None
    eig_bound_gap: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class EvaluationReport:
    """Per-replication records and their per-estimator aggregates."""

    scheme: str
    contamination: str
    n: int
    p: int
    n_replications: int
    seed: int
    estimators: tuple
    records: list = field(default_factory=list)

    def aggregates(self) -> dict:
        out = {}
        for est in self.estimators:
            recs = [r for r in self.records if r.estimator == est and r.ok]
            if recs:
                with np.errstate(invalid="ignore"):
                    out[est] = {
                        "mean_kl": float(np.mean([r.kl for r in recs])),
                        "mean_fp": float(np.nanmean([r.fp for r in recs]))
                        if not all(np.isnan(r.fp) for r in recs) else np.nan,
                        "mean_fn": float(np.mean([r.fn for r in recs])),
                        "mean_time_ms": float(np.mean([r.time_ms for r in recs])),
                        "n_ok": len(recs),
                    }
            else:
                out[est] = {"mean_kl": np.nan, "mean_fp": np.nan, "mean_fn": np.nan,
                            "mean_time_ms": np.nan, "n_ok": 0}
        return out

    def mean_kl(self, estimator) -> float:
        return self.aggregates()[estimator]["mean_kl"]

    def eig_bound_violations(self) -> int:
        return sum(
            1 for r in self.records
            if r.ok and r.eig_bound_gap is not None and r.eig_bound_gap < 0.0
        )

    def comparable(self) -> list:
        """Record tuples with timing stripped, for determinism checks."""
        return [
            (r.replication, r.estimator, r.kl, r.fp, r.fn, r.rho, r.error)
            for r in self.records
        ]


def _check_estimators(estimators):
    estimators = tuple(estimators)
    for est in estimators:
        if est not in METHODS:
            raise ValueError(f"unknown estimator id {est!r}; valid ids: {METHODS}")
    return estimators


def _fit_and_score(estimator_id, X, theta0, cv_seed, replication, cv_folds):
    record = ReplicationRecord(replication=replication, estimator=estimator_id)
    start = time.perf_counter()
    try:
        if estimator_id == "Classic":
            model = RobustGraphicalLasso(method="Classic")
        else:
            model = RobustGraphicalLasso(
                method=estimator_id, selection="cv", cv_folds=cv_folds, seed=cv_seed,
            )
        model.fit(X)
        record.kl = kl_divergence(model.precision_, theta0)
        record.fp, record.fn = fp_fn(model.precision_, theta0)
        record.rho = model.rho_
        record.converged = model.converged_
        if model.rho_ is not None:
            record.eig_bound_gap = smallest_eig_bound_gap(
                model.covariance_, model.precision_, model.rho_
            )
    except (CellGlassoError, ValueError, FloatingPointError) as exc:
        record.error = f"{type(exc).__name__}: {exc}"
    record.time_ms = (time.perf_counter() - start) * 1e3
    return record


def _replication_inputs(scheme, contamination, n, rep_seed, theta0_fixed):
    kids = rep_seed.spawn(4)
    if theta0_fixed is None:
        theta0 = make_theta0(SchemeSpec(scheme.kind, scheme.p, seed=kids[0]))
    else:
        theta0 = theta0_fixed
    if contamination.kind == "alt_t":
        X = sample_alternative_t(theta0, n, contamination.df, kids[1])
    else:
        X = sample_mvn(theta0, n, kids[1])
        if contamination.kind == "cellwise":
            X = contaminate_cellwise(
                X, contamination.epsilon, contamination.spike_mean,
                contamination.spike_var, kids[2],
            )
    cv_seed = int(kids[3].generate_state(1)[0])
    return theta0, X, cv_seed


def run_experiment(scheme, contamination, estimators, n=100, n_replications=100,
                   seed=0, threads=1, cv_folds=5) -> EvaluationReport:
    """Run the estimator battery over seeded replications and aggregate.

    The true precision matrix is fixed across replications except for the
    random "sparse" scheme, which is regenerated per replication. Individual
    estimator failures are recorded without aborting the run.
    """
    estimators = _check_estimators(estimators)
    theta0_fixed = None if scheme.kind == "sparse" else make_theta0(scheme)
    rep_seeds = as_seed_sequence(seed).spawn(n_replications)

    def one(replication):
        theta0, X, cv_seed = _replication_inputs(
            scheme, contamination, n, rep_seeds[replication], theta0_fixed
        )
        return [
            _fit_and_score(est, X, theta0, cv_seed, replication, cv_folds)
            for est in estimators
        ]

    report = EvaluationReport(
        scheme=scheme.kind, contamination=contamination.label(), n=n, p=scheme.p,
        n_replications=n_replications, seed=seed, estimators=estimators,
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(one, range(n_replications)))
    else:
        batches = [one(r) for r in range(n_replications)]
    for batch in batches:
        report.records.extend(batch)
    return report


@dataclass
class SweepRecord:
    epsilon: float
    replication: int
    estimator: str
    kl: float = np.nan
    d_value: float = np.nan
    rho_clean: Optional[float] = None
    rho_contaminated: Optional[float] = None
    eig_bound_gap: Optional[float] = None
    top_cov_clean: Optional[float] = None
    top_cov_contaminated: Optional[float] = None
    top_theta_contaminated: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepReport:
    """Breakdown sweep output: KL and breakdown distance per contamination level."""

    scheme: str
    n: int
    p: int
    n_replications: int
    seed: int
    magnitude: float
    spike_var: float
    epsilons: tuple
    estimators: tuple
    records: list = field(default_factory=list)

    def _table(self, attr) -> dict:
        table = {}
        for eps in self.epsilons:
            row = {}
            for est in self.estimators:
                vals = [
                    getattr(r, attr) for r in self.records
                    if r.ok and r.estimator == est and r.epsilon == eps
                ]
                row[est] = float(np.mean(vals)) if vals else np.nan
            table[eps] = row
        return table

    def kl_table(self) -> dict:
        return self._table("kl")

    def d_table(self) -> dict:
        return self._table("d_value")

    def d_values(self, estimator, epsilon) -> list:
        return [
            r.d_value for r in self.records
            if r.ok and r.estimator == estimator and r.epsilon == epsilon
        ]

    def eig_bound_violations(self) -> int:
        return sum(
            1 for r in self.records
            if r.ok and r.eig_bound_gap is not None and r.eig_bound_gap < 0.0
        )


def _fit_for_sweep(estimator_id, X, cv_seed, cv_folds):
    if estimator_id == "Classic":
        model = RobustGraphicalLasso(method="Classic")
    else:
        model = RobustGraphicalLasso(
            method=estimator_id, selection="cv", cv_folds=cv_folds, seed=cv_seed,
        )
    return model.fit(X)


def breakdown_sweep(scheme, epsilons, estimators, n=100, n_replications=5,
                    magnitude=1e8, seed=0, threads=1, cv_folds=5,
                    spike_var=None) -> SweepReport:
    """Contamination sweep comparing clean and contaminated fits.

    For each replication one clean sample is drawn, fitted once per
    estimator, then re-fitted after replacing floor(eps * n) cells per
    column with spikes of the given magnitude for every contamination level.
    Records the KL divergence of the contaminated fit and the breakdown
    distance between the clean and contaminated precision estimates.
    """
    estimators = _check_estimators(estimators)
    epsilons = tuple(float(e) for e in epsilons)
    for eps in epsilons:
        if not 0.0 <= eps < 0.5:
            raise ValueError("sweep epsilons must lie in [0, 0.5)")
    if spike_var is None:
        spike_var = 0.2 * magnitude
    theta0_fixed = None if scheme.kind == "sparse" else make_theta0(scheme)
    rep_seeds = as_seed_sequence(seed).spawn(n_replications)

    def one(replication):
        kids = rep_seeds[replication].spawn(3 + len(epsilons))
        if theta0_fixed is None:
            theta0 = make_theta0(SchemeSpec(scheme.kind, scheme.p, seed=kids[0]))
        else:
            theta0 = theta0_fixed
        X = sample_mvn(theta0, n, kids[1])
        cv_seed = int(kids[2].generate_state(1)[0])
        records = []
        clean_fits = {}
        for est in estimators:
            try:
                clean_fits[est] = _fit_for_sweep(est, X, cv_seed, cv_folds)
            except (CellGlassoError, ValueError, FloatingPointError) as exc:
                clean_fits[est] = f"{type(exc).__name__}: {exc}"
        for i, eps in enumerate(epsilons):
            Xm = contaminate_cellwise_per_column(
                X, eps, mean=magnitude, var=spike_var, seed=kids[3 + i]
            )
            for est in estimators:
                rec = SweepRecord(epsilon=eps, replication=replication, estimator=est)
                clean = clean_fits[est]
                if isinstance(clean, str):
                    rec.error = clean
                    records.append(rec)
                    continue
                try:
                    contaminated = _fit_for_sweep(est, Xm, cv_seed, cv_folds)
                    rec.kl = kl_divergence(contaminated.precision_, theta0)
                    rec.d_value = d_metric(clean.precision_, contaminated.precision_)
                    rec.rho_clean = clean.rho_
                    rec.rho_contaminated = contaminated.rho_
                    rec.top_cov_clean = float(np.linalg.eigvalsh(clean.covariance_)[-1])
                    rec.top_cov_contaminated = float(
                        np.linalg.eigvalsh(contaminated.covariance_)[-1]
                    )
                    rec.top_theta_contaminated = float(
                        np.linalg.eigvalsh(contaminated.precision_)[-1]
                    )
                    if contaminated.rho_ is not None:
                        rec.eig_bound_gap = smallest_eig_bound_gap(
                            contaminated.covariance_, contaminated.precision_,
                            contaminated.rho_,
                        )
                except (CellGlassoError, ValueError, FloatingPointError) as exc:
                    rec.error = f"{type(exc).__name__}: {exc}"
                records.append(rec)
        return records

    report = SweepReport(
        scheme=scheme.kind, n=n, p=scheme.p, n_replications=n_replications,
        seed=seed, magnitude=magnitude, spike_var=spike_var,
        epsilons=epsilons, estimators=estimators,
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(one, range(n_replications)))
    else:
        batches = [one(r) for r in range(n_replications)]
    for batch in batches:
        report.records.extend(batch)
    return report
