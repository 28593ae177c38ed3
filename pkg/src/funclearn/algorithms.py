"""Gradient-descent functional learners and ridge baselines.

All learners work on grid samples. With ``A[i] = w * X_i`` (quadrature-weighted
predictors) and ``B[i] = L_K X_i`` (kernel images, computed once per fit), one
gradient step costs two ``n x G`` matrix-vector products:

    beta <- beta - gamma_t / n * sum_i (<beta, X_i> - Y_i) L_K X_i

Distributed variants fit each block independently and average the local
slopes with weights proportional to block sizes.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import (
    DegenerateDataError,
    DivergenceError,
    InvalidArgumentError,
    NumericalError,
)
from .funcspace import apply_kernel_operator, check_func

logger = logging.getLogger(__name__)

DIVERGENCE_THRESHOLD = 1e12


@dataclass(frozen=True)
class FitConfig:
    """Step-size schedule ``gamma0 / (k + 1)**mu`` and stopping rule.

    ``gamma0=None`` means "estimate from the data" (see
    :func:`estimate_step_constant`). When ``n_iter`` is set, exactly that many
    steps are taken and the tolerance is ignored.
    """

    gamma0: float | None = None
    mu: float = 0.0
    tol: float = 1e-4
    max_iter: int = 100_000
    n_iter: int | None = None
    track_risk: bool = False

    def __post_init__(self):
        if self.gamma0 is not None and not self.gamma0 > 0:
            raise InvalidArgumentError(f"gamma0 must be positive, got {self.gamma0}")
        if not 0 <= self.mu < 1:
            raise InvalidArgumentError(f"mu must lie in [0, 1), got {self.mu}")
        if not self.tol > 0:
            raise InvalidArgumentError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be a positive integer, got {self.max_iter}")
        if self.n_iter is not None and (int(self.n_iter) != self.n_iter or self.n_iter < 1):
            raise InvalidArgumentError(f"n_iter must be a positive integer, got {self.n_iter}")


@dataclass(frozen=True)
class RidgeConfig:
    lam: float = 1e-4

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")


@dataclass
class FitResult:
    """A fitted slope function plus fit metadata.

    For distributed fits ``iterations`` is the maximum over machines,
    ``converged`` is true only if every machine converged and
    ``local_wall_times`` holds the per-machine fit times.
    """

    beta: np.ndarray
    iterations: int
    converged: bool
    wall_time: float
    gamma0: float | None = None
    coef: np.ndarray | None = None
    risk_trace: np.ndarray | None = None
    local_wall_times: list = field(default_factory=list)
    local_results: list = field(default_factory=list)


def _check_dataset(dataset):
    if dataset is None or len(dataset) < 1:
        raise InvalidArgumentError("dataset must contain at least one sample")


def _kernel_images(dataset, kernel):
    return apply_kernel_operator(kernel, dataset.predictors, dataset.grid)


def estimate_step_constant(dataset, kernel, rtol=1e-6, max_iter=10_000, kernel_images=None):
    """Return ``0.9 / lambda_max`` of the empirical composite operator.

    ``lambda_max`` is the top eigenvalue of ``M / n`` with ``M`` the Gram
    matrix, found by power iteration without forming ``M``.
    """
    _check_dataset(dataset)
    X = dataset.predictors
    if not np.any(X):
        raise DegenerateDataError("all predictors are identically zero")
    n = len(dataset)
    A = X * dataset.grid.weights
    B = _kernel_images(dataset, kernel) if kernel_images is None else kernel_images

    v = np.random.default_rng(0).uniform(0.5, 1.5, size=n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A @ (B.T @ v) / n
        lam_new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        v = w / norm
        if abs(lam_new - lam) <= rtol * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    if not lam > 0:
        raise DegenerateDataError("empirical operator has no positive eigenvalue")
    return 0.9 / lam


def gdfl_step(beta, dataset, kernel, gamma_t, kernel_images=None):
    """One gradient step from ``beta`` on ``dataset``."""
    beta = check_func(beta, dataset.grid, "beta")
    if beta.ndim != 1:
        raise InvalidArgumentError("beta must be a single function")
    B = _kernel_images(dataset, kernel) if kernel_images is None else kernel_images
    residual = (dataset.predictors * dataset.grid.weights) @ beta - dataset.responses
    return beta - gamma_t * (residual @ B) / len(dataset)


def gdfl_fit(dataset, kernel, cfg=FitConfig()):
    """Gradient descent from ``beta = 0`` until the L2 step size drops to ``cfg.tol``."""
    _check_dataset(dataset)
    start = time.perf_counter()
    grid = dataset.grid
    n = len(dataset)
    A = dataset.predictors * grid.weights
    B = _kernel_images(dataset, kernel)
    y = dataset.responses
    gamma0 = cfg.gamma0
    if gamma0 is None:
        gamma0 = estimate_step_constant(dataset, kernel, kernel_images=B)

    w = grid.weights
    tol_sq = cfg.tol**2
    n_steps = cfg.n_iter if cfg.n_iter is not None else cfg.max_iter
    beta = np.zeros(grid.size)
    risks = [] if cfg.track_risk else None
    converged = cfg.n_iter is not None
    # Triangle-inequality bound on ||beta||; the true norm is only computed
    # once the bound passes the divergence threshold.
    norm_bound = 0.0
    t = 0
    for t in range(n_steps):
        residual = A @ beta - y
        if risks is not None:
            risks.append(residual @ residual / n)
        step = (gamma0 / (t + 1) ** cfg.mu / n) * (residual @ B)
        beta = beta - step
        step_sq = w @ (step * step)
        if step_sq != step_sq:
            raise DivergenceError(f"non-finite iterate at iteration {t + 1}", iteration=t + 1)
        norm_bound += math.sqrt(step_sq)
        if norm_bound > DIVERGENCE_THRESHOLD:
            norm = math.sqrt(w @ (beta * beta))
            if not norm <= DIVERGENCE_THRESHOLD:
                raise DivergenceError(
                    f"iterate norm exceeded {DIVERGENCE_THRESHOLD:g} at iteration {t + 1}",
                    iteration=t + 1,
                )
            norm_bound = norm
        if cfg.n_iter is None and step_sq <= tol_sq:
            converged = True
            break
    iterations = t + 1
    if risks is not None:
        residual = A @ beta - y
        risks.append(residual @ residual / n)
    if not converged:
        logger.info("gdfl_fit hit max_iter=%d without reaching tol=%g", cfg.max_iter, cfg.tol)
    return FitResult(
        beta=beta,
        iterations=iterations,
        converged=converged,
        wall_time=time.perf_counter() - start,
        gamma0=gamma0,
        risk_trace=None if risks is None else np.array(risks),
    )


def _average(results, weights, start):
    beta = np.zeros_like(results[0].beta)
    for res, weight in zip(results, weights):
        beta = beta + weight * res.beta
    return FitResult(
        beta=beta,
        iterations=max(r.iterations for r in results),
        converged=all(r.converged for r in results),
        wall_time=time.perf_counter() - start,
        local_wall_times=[r.wall_time for r in results],
        local_results=list(results),
    )


def _fit_blocks(fit, blocks, kernel, cfg):
    results = []
    for j, block in enumerate(blocks):
        try:
            results.append(fit(block, kernel, cfg))
        except DivergenceError as exc:
            raise DivergenceError(
                f"machine {j}: {exc}", iteration=exc.iteration, machine=j
            ) from exc
    return results


def dgdfl_fit(partition, kernel, cfg=FitConfig()):
    """Run :func:`gdfl_fit` on every block and take the size-weighted average."""
    if partition is None or len(partition) < 1:
        raise InvalidArgumentError("partition must contain at least one block")
    start = time.perf_counter()
    total = sum(partition.sizes)
    results = _fit_blocks(gdfl_fit, partition.subsets, kernel, cfg)
    return _average(results, [s / total for s in partition.sizes], start)


def augment_with_unlabeled(dataset, unlabeled):
    """Build the local set with rescaled labels and zero responses for unlabelled curves.

    Labelled responses are multiplied by ``|D*| / |D|`` so that the first
    moment of the response-weighted predictors is unchanged.
    """
    from .simdata import Dataset

    unlabeled = np.asarray(unlabeled, dtype=float).reshape(-1, dataset.grid.size)
    n_lab = len(dataset)
    n_all = n_lab + unlabeled.shape[0]
    X = np.vstack([dataset.predictors, unlabeled])
    y = np.concatenate([(n_all / n_lab) * dataset.responses, np.zeros(unlabeled.shape[0])])
    return Dataset(X, y, dataset.grid)


def semi_dgdfl_fit(partition, pool, kernel, cfg=FitConfig()):
    """Distributed fit on labelled blocks augmented with per-machine unlabelled curves."""
    if len(pool) != len(partition):
        raise InvalidArgumentError(
            f"pool has {len(pool)} machines but partition has {len(partition)}"
        )
    start = time.perf_counter()
    blocks = [augment_with_unlabeled(d, u) for d, u in zip(partition.subsets, pool.predictors)]
    sizes = [len(b) for b in blocks]
    total = sum(sizes)
    results = _fit_blocks(gdfl_fit, blocks, kernel, cfg)
    return _average(results, [s / total for s in sizes], start)


def rls_fit(dataset, kernel, cfg=RidgeConfig()):
    """Regularised least squares via the representer system ``(M + n lam I) c = y``."""
    _check_dataset(dataset)
    start = time.perf_counter()
    n = len(dataset)
    B = _kernel_images(dataset, kernel)
    M = (dataset.predictors * dataset.grid.weights) @ B.T
    M = 0.5 * (M + M.T)
    y = dataset.responses
    system = M + n * cfg.lam * np.eye(n)
    try:
        factor = scipy.linalg.cho_factor(system)
        coef = scipy.linalg.cho_solve(factor, y)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(system)
        raise NumericalError(f"ridge system not positive definite (cond ~ {cond:.3g})", cond) from exc
    resid = np.linalg.norm(system @ coef - y)
    if resid > 1e-8 * max(np.linalg.norm(y), np.finfo(float).tiny):
        cond = np.linalg.cond(system)
        raise NumericalError(
            f"ridge solve residual {resid:.3g} too large (cond ~ {cond:.3g})", cond
        )
    return FitResult(
        beta=coef @ B,
        iterations=0,
        converged=True,
        wall_time=time.perf_counter() - start,
        coef=coef,
    )


def drk_fit(partition, kernel, cfg=RidgeConfig()):
    if partition is None or len(partition) < 1:
        raise InvalidArgumentError("partition must contain at least one block")
    start = time.perf_counter()
    total = sum(partition.sizes)
    results = [rls_fit(block, kernel, cfg) for block in partition.subsets]
    return _average(results, [s / total for s in partition.sizes], start)


def theoretical_iterations(n_samples, theta, capacity, mu=0.0):
    """Iteration count floor(n^(1 / ((2 theta + capacity + 1)(1 - mu)))) used by the rate theory."""
    return int(np.floor(n_samples ** (1.0 / ((2 * theta + capacity + 1) * (1 - mu)))))
