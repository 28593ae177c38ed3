"""Configuration-driven simulation sweeps: cells, summaries, CSV output and plots.

A sweep is the Cartesian product sample_sizes x machine_counts x repetitions
for one (scenario, method). Every cell draws its data from its own stream,
seeded by a stable hash of (master_seed, scenario, sample_size, machines,
repetition), so results do not depend on execution order or worker count.
The method is deliberately left out of the hash: two methods run on the same
cell see the same training and test data.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .algorithms import (
    FitConfig,
    RidgeConfig,
    dgdfl_fit,
    drk_fit,
    gdfl_fit,
    rls_fit,
    semi_dgdfl_fit,
)
from .evaluation import estimation_error, excess_risk
from .exceptions import ConfigError, FuncLearnError, InvalidArgumentError
from .funcspace import make_uniform_grid
from .simdata import (
    Sim1Config,
    Sim2Config,
    beta_star,
    draw_predictors,
    gen_dataset,
    gen_unlabeled,
    partition,
)

logger = logging.getLogger(__name__)

SCENARIOS = ("sim1", "sim2")
METHODS = ("gdfl", "dgdfl", "semi_dgdfl", "rk", "drk")
TOL_RULES = ("fixed", "sample_scaled")
DISTRIBUTED = ("dgdfl", "semi_dgdfl", "drk")


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep. ``None`` for a scenario parameter means the scenario default.

    ``tol_rule="sample_scaled"`` multiplies ``fit.tol`` by
    ``sqrt(100 / local_size)`` where ``local_size`` is the per-machine sample size.
    """

    scenario: str = "sim2"
    method: str = "gdfl"
    sample_sizes: tuple = (100,)
    machine_counts: tuple = (1,)
    repetitions: int = 1
    master_seed: int = 0
    fit: FitConfig = field(default_factory=FitConfig)
    ridge: RidgeConfig = field(default_factory=RidgeConfig)
    sigma: float | None = None
    unlabeled_multiplier: float = 0.0
    test_size: int = 1000
    grid_size: int = 201
    tol_rule: str = "fixed"
    bandwidth: float = 0.33
    theta: float = 0.1
    alpha_pred: float = 0.5
    nu: float = 1.1

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(s) for s in self.sample_sizes))
        object.__setattr__(self, "machine_counts", tuple(int(m) for m in self.machine_counts))
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.tol_rule not in TOL_RULES:
            raise ConfigError(f"tol_rule must be one of {TOL_RULES}, got {self.tol_rule!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.test_size < 1:
            raise ConfigError("test_size must be at least 1")
        if self.grid_size < 3:
            raise ConfigError("grid_size must be at least 3")
        if self.unlabeled_multiplier < 0:
            raise ConfigError("unlabeled_multiplier must be nonnegative")
        if any(m < 1 for m in self.machine_counts):
            raise ConfigError("machine counts must be positive")
        if self.machine_counts and self.sample_sizes:
            if min(self.sample_sizes) < max(self.machine_counts):
                raise ConfigError("every sample size must be at least the largest machine count")

    def scenario_config(self):
        grid = make_uniform_grid(self.grid_size)
        if self.scenario == "sim1":
            sigma = 1.0 if self.sigma is None else self.sigma
            return Sim1Config(alpha_pred=self.alpha_pred, theta=self.theta, sigma=sigma, grid=grid)
        sigma = 1.5 if self.sigma is None else self.sigma
        return Sim2Config(nu=self.nu, sigma=sigma, grid=grid, bandwidth=self.bandwidth)

    def cells(self):
        return [
            (n, m, r)
            for n in sorted(self.sample_sizes)
            for m in sorted(self.machine_counts)
            for r in range(self.repetitions)
        ]


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    method: str
    sample_size: int
    machines: int
    repetition: int
    estimation_error: float
    prediction_error: float
    iterations: int
    converged: bool
    wall_time_seconds: float
    error: str = ""


@dataclass(frozen=True)
class SummaryRow:
    scenario: str
    method: str
    sample_size: int
    machines: int
    count: int
    failed: int
    estimation_error_mean: float
    estimation_error_std: float
    prediction_error_mean: float
    prediction_error_std: float
    iterations_mean: float
    wall_time_seconds_mean: float
    wall_time_seconds_std: float


def cell_seed(master_seed, scenario, sample_size, machines, repetition):
    """Stable 64-bit seed for one cell (blake2b of the tuple, little endian)."""
    key = f"{int(master_seed)}|{scenario}|{int(sample_size)}|{int(machines)}|{int(repetition)}"
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


def local_tolerance(spec, sample_size, machines):
    if spec.tol_rule == "fixed":
        return spec.fit.tol
    local = sample_size / machines
    return spec.fit.tol * math.sqrt(100.0 / local)


def _fit_cell(spec, cfg, train, rng, machines, fit_cfg):
    kernel = cfg.kernel()
    if spec.method == "gdfl":
        return gdfl_fit(train, kernel, fit_cfg)
    if spec.method == "rk":
        return rls_fit(train, kernel, spec.ridge)
    parts = partition(train, machines, rng)
    if spec.method == "dgdfl":
        return dgdfl_fit(parts, kernel, fit_cfg)
    if spec.method == "drk":
        return drk_fit(parts, kernel, spec.ridge)
    counts = [int(round(spec.unlabeled_multiplier * s)) for s in parts.sizes]
    pool = gen_unlabeled(cfg, counts, rng)
    return semi_dgdfl_fit(parts, pool, kernel, fit_cfg)


def run_cell(spec, sample_size, machines, repetition):
    """Generate data for one cell, fit it with ``spec.method`` and score the fit.

    Fit errors are caught and reported in the row's ``error`` column.
    ``wall_time_seconds`` is the mean per-machine fit time for distributed
    methods and the whole fit time otherwise; data generation is excluded.
    """
    cfg = spec.scenario_config()
    seed = cell_seed(spec.master_seed, spec.scenario, sample_size, machines, repetition)
    rng = np.random.default_rng(seed)
    train = gen_dataset(cfg, sample_size, rng)
    test_X = draw_predictors(cfg, spec.test_size, rng)
    truth = beta_star(cfg)
    fit_cfg = replace(spec.fit, tol=local_tolerance(spec, sample_size, machines))
    base = dict(
        scenario=spec.scenario,
        method=spec.method,
        sample_size=int(sample_size),
        machines=int(machines),
        repetition=int(repetition),
    )
    try:
        result = _fit_cell(spec, cfg, train, rng, machines, fit_cfg)
    except (FuncLearnError, np.linalg.LinAlgError, FloatingPointError) as exc:
        logger.warning("cell %s failed: %s", base, exc)
        return ResultRow(
            **base,
            estimation_error=math.nan,
            prediction_error=math.nan,
            iterations=0,
            converged=False,
            wall_time_seconds=math.nan,
            error=f"{type(exc).__name__}: {exc}".replace("\n", " "),
        )
    if spec.method in DISTRIBUTED:
        wall = float(np.mean(result.local_wall_times))
    else:
        wall = result.wall_time
    logger.debug("cell %s done in %d iterations", base, result.iterations)
    return ResultRow(
        **base,
        estimation_error=estimation_error(result.beta, truth, cfg.grid),
        prediction_error=excess_risk(result.beta, truth, test_X, cfg.grid),
        iterations=int(result.iterations),
        converged=bool(result.converged),
        wall_time_seconds=float(wall),
    )


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(spec, parallelism=1):
    """Run every cell of the sweep; rows come back sorted by (size, machines, repetition)."""
    if int(parallelism) < 1:
        raise InvalidArgumentError("parallelism must be at least 1")
    tasks = [(spec, n, m, r) for n, m, r in spec.cells()]
    if parallelism == 1 or len(tasks) <= 1:
        rows = [run_cell(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=int(parallelism)) as pool:
            rows = list(pool.map(_run_cell_args, tasks, chunksize=1))
    return sorted(rows, key=lambda r: (r.sample_size, r.machines, r.repetition))


def _mean_std(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return math.nan, math.nan
    if values.size == 1:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1))


def summarize(rows):
    """Mean and sample standard deviation per (scenario, method, size, machines).

    Failed rows are counted but left out of the statistics.
    """
    rows = list(rows)
    if not rows:
        raise InvalidArgumentError("no rows to summarise")
    groups = {}
    for row in rows:
        key = (row.scenario, row.method, row.sample_size, row.machines)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups):
        group = groups[key]
        ok = [r for r in group if not r.error]
        est = _mean_std([r.estimation_error for r in ok])
        pred = _mean_std([r.prediction_error for r in ok])
        wall = _mean_std([r.wall_time_seconds for r in ok])
        out.append(
            SummaryRow(
                *key,
                count=len(group),
                failed=len(group) - len(ok),
                estimation_error_mean=est[0],
                estimation_error_std=est[1],
                prediction_error_mean=pred[0],
                prediction_error_std=pred[1],
                iterations_mean=_mean_std([r.iterations for r in ok])[0],
                wall_time_seconds_mean=wall[0],
                wall_time_seconds_std=wall[1],
            )
        )
    return out


def _render(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


TIMING_COLUMNS = ("wall_time_seconds", "wall_time_seconds_mean", "wall_time_seconds_std")


def write_csv(rows, path, row_type=None, timing=True):
    """Write result or summary rows with 6 significant digits.

    ``timing=False`` drops the wall-time columns, which are the only
    non-reproducible fields.
    """
    rows = list(rows)
    row_type = row_type or (type(rows[0]) if rows else ResultRow)
    columns = [f.name for f in fields(row_type)]
    if not timing:
        columns = [c for c in columns if c not in TIMING_COLUMNS]
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                data = asdict(row)
                writer.writerow([_render(data[c]) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _parse_value(kind, text):
    if kind is bool:
        return text.strip().lower() in ("true", "1", "yes")
    if kind is int:
        return int(text)
    if kind is float:
        return float(text) if text != "" else math.nan
    return text


def read_results_csv(path):
    """Read rows written by :func:`write_csv` back into :class:`ResultRow` objects."""
    kinds = {
        "sample_size": int, "machines": int, "repetition": int, "iterations": int,
        "estimation_error": float, "prediction_error": float,
        "wall_time_seconds": float, "converged": bool,
    }
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for rec in reader:
            values = {}
            for f in fields(ResultRow):
                if f.name in rec:
                    values[f.name] = _parse_value(kinds.get(f.name, str), rec[f.name])
                elif f.name == "wall_time_seconds":
                    values[f.name] = math.nan
            rows.append(ResultRow(**values))
    return rows


# Config files -------------------------------------------------------------

_LIST_KEYS = {"sample_sizes", "machine_counts"}
_FIT_KEYS = {"gamma0": "gamma0", "mu": "mu", "tol": "tol", "max_iter": "max_iter", "n_iter": "n_iter"}
_SCALAR_KEYS = {
    "scenario": str, "method": str, "repetitions": int, "master_seed": int,
    "sigma": float, "unlabeled_multiplier": float, "test_size": int,
    "grid_size": int, "tol_rule": str, "bandwidth": float, "theta": float,
    "alpha_pred": float, "nu": float,
}


def parse_config(text):
    """Parse flat ``key=value`` lines (``#`` comments, comma-separated lists)."""
    kwargs, fit, ridge = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                kwargs[key] = tuple(int(v) for v in value.split(",") if v.strip())
            elif key in _FIT_KEYS:
                if value.lower() in ("auto", "none", ""):
                    fit[_FIT_KEYS[key]] = None
                else:
                    conv = int if key in ("max_iter", "n_iter") else float
                    fit[_FIT_KEYS[key]] = conv(value)
            elif key == "lambda":
                ridge["lam"] = float(value)
            elif key in _SCALAR_KEYS:
                kwargs[key] = _SCALAR_KEYS[key](value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    try:
        fit_cfg = FitConfig(**fit)
        ridge_cfg = RidgeConfig(**ridge)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentSpec(fit=fit_cfg, ridge=ridge_cfg, **kwargs)


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def select_ridge_lambda(spec, pilot_size=None, grid=None, seed=None, n_pilots=10, n_holdout=1000):
    """Pick lambda for the ridge baselines on held-out pilot splits.

    For each of ``n_pilots`` pilot draws, fits :func:`rls_fit` on a training
    set of size ``pilot_size`` (default: the smallest sweep size) for every
    candidate in ``grid`` (default 1e-8 ... 1e-2) and scores the held-out mean
    squared prediction error. Returns the candidate with the lowest average
    score and the score table.
    """
    grid = tuple(grid or (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2))
    pilot_size = pilot_size or min(spec.sample_sizes)
    cfg = spec.scenario_config()
    kernel = cfg.kernel()
    master = spec.master_seed if seed is None else seed
    scores = {lam: 0.0 for lam in grid}
    for pilot in range(n_pilots):
        rng = np.random.default_rng(
            cell_seed(master, spec.scenario + "-pilot", pilot_size, 0, pilot)
        )
        train = gen_dataset(cfg, pilot_size, rng)
        holdout = gen_dataset(cfg, n_holdout, rng)
        for lam in grid:
            res = rls_fit(train, kernel, RidgeConfig(lam))
            resid = holdout.predictors @ (cfg.grid.weights * res.beta) - holdout.responses
            scores[lam] += float(np.mean(resid * resid)) / n_pilots
    best = min(scores, key=scores.get)
    return best, scores


def plot_summary(summary, path, metric="prediction_error"):
    """Log-log scatter with error bars of a summary metric against sample size."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    series = {}
    for row in summary:
        label = row.method if row.method in ("gdfl", "rk") else f"{row.method}[{row.machines}]"
        series.setdefault(label, []).append(row)
    for label, rows in sorted(series.items()):
        rows = sorted(rows, key=lambda r: r.sample_size)
        x = [r.sample_size for r in rows]
        y = [getattr(r, f"{metric}_mean") for r in rows]
        err = [getattr(r, f"{metric}_std", 0.0) for r in rows]
        ax.errorbar(x, y, yerr=err, marker="o", capsize=3, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sample size |D|")
    ax.set_ylabel(metric.replace("_", " "))
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
