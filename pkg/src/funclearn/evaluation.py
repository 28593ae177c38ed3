"""Prediction, error metrics and spectral diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .funcspace import apply_kernel_operator, check_func, inner


@dataclass(frozen=True)
class MetricReport:
    estimation_error: float
    prediction_error: float
    n_test: int


def _slope(estimator):
    return getattr(estimator, "beta", estimator)


def predict(estimator, X, grid):
    """Linear functional <beta, X>; ``estimator`` is a fit result or a bare slope array.

    ``X`` may be one curve or a batch of rows.
    """
    beta = check_func(_slope(estimator), grid, "beta")
    return inner(check_func(X, grid, "X"), beta, grid)


def estimation_error(beta_hat, beta_star, grid):
    """L2 distance between the estimated and true slope."""
    d = check_func(beta_hat, grid, "beta_hat") - check_func(beta_star, grid, "beta_star")
    return float(np.sqrt(max(inner(d, d, grid), 0.0)))


def excess_risk(beta_hat, beta_star, test_X, grid):
    """Monte Carlo excess risk: mean squared gap between predicted and true responses."""
    test_X = np.atleast_2d(np.asarray(test_X, dtype=float))
    if test_X.size == 0:
        raise InvalidArgumentError("test set is empty")
    d = check_func(beta_hat, grid, "beta_hat") - check_func(beta_star, grid, "beta_star")
    gap = predict(d, test_X, grid)
    return float(np.mean(gap * gap))


def evaluate(beta_hat, beta_star, test_X, grid):
    test_X = np.atleast_2d(test_X)
    return MetricReport(
        estimation_error=estimation_error(beta_hat, beta_star, grid),
        prediction_error=excess_risk(beta_hat, beta_star, test_X, grid),
        n_test=test_X.shape[0],
    )


def empirical_tck_spectrum(dataset, kernel):
    """Eigenvalues of the empirical composite operator, in descending order.

    Computed as the eigenvalues of ``M / n`` with ``M`` the Gram matrix; the
    two operators share their nonzero spectrum. Round-off negatives are kept.
    """
    if len(dataset) < 1:
        raise InvalidArgumentError("dataset must contain at least one sample")
    B = apply_kernel_operator(kernel, dataset.predictors, dataset.grid)
    M = (dataset.predictors * dataset.grid.weights) @ B.T
    M = 0.5 * (M + M.T)
    return np.linalg.eigvalsh(M / len(dataset))[::-1]


def effective_dimension(spectrum, lam):
    """Trace of (lam I + T)^-1 T given the spectrum of T."""
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")
    spectrum = np.asarray(spectrum, dtype=float)
    if np.any(spectrum < -1e-10):
        raise InvalidArgumentError("spectrum entries must be nonnegative")
    spectrum = np.clip(spectrum, 0.0, None)
    return float(np.sum(spectrum / (lam + spectrum)))
