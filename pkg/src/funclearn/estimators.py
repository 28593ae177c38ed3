"""scikit-learn compatible wrappers around the functional learners.

Each row of ``X`` holds one predictor curve sampled on a grid over [0, 1]
(uniform with trapezoid weights unless ``grid`` is given). Fitted models
expose the slope function as ``beta_`` and the quadrature-weighted slope as
``coef_`` so that ``predict(X) == X @ coef_``.

>>> import numpy as np
>>> from funclearn.estimators import GDFLRegressor
>>> X = np.random.default_rng(0).normal(size=(20, 11))
>>> model = GDFLRegressor(kernel="bernoulli").fit(X, X.mean(axis=1))
>>> model.predict(X).shape
(20,)
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .algorithms import (
    FitConfig,
    RidgeConfig,
    dgdfl_fit,
    drk_fit,
    gdfl_fit,
    rls_fit,
    semi_dgdfl_fit,
)
from .exceptions import InvalidArgumentError
from .funcspace import (
    BernoulliQuarticKernel,
    GaussianKernel,
    Grid,
    Kernel,
    make_uniform_grid,
)
from .simdata import Dataset, UnlabeledPool, partition

__all__ = [
    "GDFLRegressor",
    "DGDFLRegressor",
    "SemiDGDFLRegressor",
    "FunctionalRidgeRegressor",
    "DistributedRidgeRegressor",
    "resolve_kernel",
]


def resolve_kernel(kernel, bandwidth=0.33):
    """Map ``"gaussian"`` / ``"bernoulli"`` or a :class:`Kernel` instance to a kernel object."""
    if isinstance(kernel, Kernel):
        return kernel
    if kernel == "gaussian":
        return GaussianKernel(bandwidth)
    if kernel == "bernoulli":
        return BernoulliQuarticKernel()
    raise InvalidArgumentError(f"unknown kernel {kernel!r}")


def _rng(random_state):
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


class _FunctionalRegressor(RegressorMixin, BaseEstimator):
    """Shared validation and prediction for slope-function regressors."""

    def _grid_for(self, n_features):
        if self.grid is None:
            return make_uniform_grid(n_features)
        if not isinstance(self.grid, Grid) or self.grid.size != n_features:
            raise InvalidArgumentError(
                f"X has {n_features} columns but the grid has "
                f"{getattr(self.grid, 'size', '?')} points"
            )
        return self.grid

    def _prepare(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64, y_numeric=True)
        grid = self._grid_for(X.shape[1])
        return Dataset(X, y, grid), resolve_kernel(self.kernel, self.bandwidth)

    def _store(self, result, grid):
        self.fit_result_ = result
        self.grid_ = grid
        self.beta_ = result.beta
        self.coef_ = grid.weights * result.beta
        self.intercept_ = 0.0
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.fit_time_ = result.wall_time
        return self

    def predict(self, X):
        """Predicted responses ``<beta_, X_i>`` for each curve (row) of ``X``."""
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X @ self.coef_


class _GradientMixin:
    def _fit_config(self):
        return FitConfig(
            gamma0=self.gamma0,
            mu=self.mu,
            tol=self.tol,
            max_iter=self.max_iter,
            n_iter=self.n_iter,
        )


class GDFLRegressor(_GradientMixin, _FunctionalRegressor):
    """Gradient descent functional learning on a single machine.

    Early stopping acts as the regulariser: iterations stop once the L2 norm
    of the update falls below ``tol`` (or after exactly ``n_iter`` steps).

    Parameters
    ----------
    kernel : {"gaussian", "bernoulli"} or Kernel, default="gaussian"
    bandwidth : float, default=0.33
        Gaussian kernel bandwidth; ignored for other kernels.
    grid : Grid, optional
        Sampling grid of the curves. Defaults to a uniform grid with one point
        per column of ``X``.
    gamma0 : float, optional
        Base step size. If omitted it is set to 0.9 over the largest
        eigenvalue of the empirical operator.
    mu : float, default=0.0
        Step sizes decay as ``gamma0 / (k + 1)**mu``.
    tol : float, default=1e-4
    max_iter : int, default=100000
    n_iter : int, optional
        Fixed number of iterations; overrides ``tol``.

    Attributes
    ----------
    beta_ : ndarray of shape (n_features,)
        Estimated slope function on the grid.
    coef_ : ndarray of shape (n_features,)
        ``beta_`` times the quadrature weights.
    n_iter_ : int
    converged_ : bool
    gamma0_ : float
        Step size actually used.
    """

    def __init__(
        self,
        kernel="gaussian",
        bandwidth=0.33,
        grid=None,
        gamma0=None,
        mu=0.0,
        tol=1e-4,
        max_iter=100_000,
        n_iter=None,
    ):
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.grid = grid
        self.gamma0 = gamma0
        self.mu = mu
        self.tol = tol
        self.max_iter = max_iter
        self.n_iter = n_iter

    def fit(self, X, y):
        dataset, kernel = self._prepare(X, y)
        result = gdfl_fit(dataset, kernel, self._fit_config())
        self.gamma0_ = result.gamma0
        return self._store(result, dataset.grid)


class DGDFLRegressor(_GradientMixin, _FunctionalRegressor):
    """Divide-and-conquer gradient descent: local GDFL fits averaged by block size.

    The sample is shuffled with ``random_state`` and cut into ``n_machines``
    blocks of near-equal size. Other parameters are as in
    :class:`GDFLRegressor`; when ``gamma0`` is omitted each machine estimates
    its own step size from its local data.
    """

    def __init__(
        self,
        n_machines=2,
        kernel="gaussian",
        bandwidth=0.33,
        grid=None,
        gamma0=None,
        mu=0.0,
        tol=1e-4,
        max_iter=100_000,
        n_iter=None,
        random_state=None,
    ):
        self.n_machines = n_machines
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.grid = grid
        self.gamma0 = gamma0
        self.mu = mu
        self.tol = tol
        self.max_iter = max_iter
        self.n_iter = n_iter
        self.random_state = random_state

    def fit(self, X, y):
        dataset, kernel = self._prepare(X, y)
        parts = partition(dataset, self.n_machines, _rng(self.random_state))
        self.partition_sizes_ = parts.sizes
        return self._store(dgdfl_fit(parts, kernel, self._fit_config()), dataset.grid)


class SemiDGDFLRegressor(DGDFLRegressor):
    """DGDFL that also uses unlabelled curves passed as ``X_unlabeled`` to :meth:`fit`.

    Unlabelled curves are shuffled and dealt to the machines in near-equal
    blocks. On each machine labelled responses are scaled by
    ``|D_j*| / |D_j|`` and unlabelled curves get response 0.
    """

    def fit(self, X, y, X_unlabeled=None):
        dataset, kernel = self._prepare(X, y)
        rng = _rng(self.random_state)
        parts = partition(dataset, self.n_machines, rng)
        if X_unlabeled is None:
            X_unlabeled = np.empty((0, dataset.grid.size))
        X_unlabeled = np.asarray(X_unlabeled, dtype=float).reshape(-1, dataset.grid.size)
        order = rng.permutation(X_unlabeled.shape[0])
        pool = UnlabeledPool(
            tuple(X_unlabeled[idx] for idx in np.array_split(order, self.n_machines))
        )
        self.partition_sizes_ = parts.sizes
        self.unlabeled_counts_ = pool.counts
        result = semi_dgdfl_fit(parts, pool, kernel, self._fit_config())
        return self._store(result, dataset.grid)


class FunctionalRidgeRegressor(_FunctionalRegressor):
    """Regularised least squares in the RKHS of ``kernel`` (the RK baseline).

    Solves ``(M + n * lam * I) c = y`` for the Gram matrix
    ``M[i, j] = <X_i, L_K X_j>``; the slope is ``sum_i c_i L_K X_i``.
    """

    def __init__(self, lam=1e-4, kernel="gaussian", bandwidth=0.33, grid=None):
        self.lam = lam
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.grid = grid

    def fit(self, X, y):
        dataset, kernel = self._prepare(X, y)
        result = rls_fit(dataset, kernel, RidgeConfig(self.lam))
        self.dual_coef_ = result.coef
        return self._store(result, dataset.grid)


class DistributedRidgeRegressor(_FunctionalRegressor):
    """Divide-and-conquer ridge (DRK): local ridge slopes averaged by block size."""

    def __init__(
        self, lam=1e-4, n_machines=2, kernel="gaussian", bandwidth=0.33, grid=None,
        random_state=None,
    ):
        self.lam = lam
        self.n_machines = n_machines
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.grid = grid
        self.random_state = random_state

    def fit(self, X, y):
        dataset, kernel = self._prepare(X, y)
        parts = partition(dataset, self.n_machines, _rng(self.random_state))
        self.partition_sizes_ = parts.sizes
        return self._store(drk_fit(parts, kernel, RidgeConfig(self.lam)), dataset.grid)
