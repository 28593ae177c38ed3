"""Synthetic functional regression data and dataset partitioning.

Two scenarios are provided:

* :class:`Sim1Config`: predictors with cosine scores decaying like ``k^-alpha``,
  a Sobolev-type kernel (Bernoulli quartic) and a slope function built from
  the composite operator with regularity exponent ``theta``.
* :class:`Sim2Config`: the classical Hall-Horowitz setting with the constant
  function included in the basis, compared against a Gaussian kernel.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError
from .funcspace import (
    BernoulliQuarticKernel,
    CosineSeriesKernel,
    GaussianKernel,
    Grid,
    check_func,
    cosine_basis,
    inner,
    make_uniform_grid,
)

SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class Dataset:
    """Labelled sample: one predictor curve per row of ``predictors``."""

    predictors: np.ndarray
    responses: np.ndarray
    grid: Grid

    def __post_init__(self):
        X = check_func(np.atleast_2d(self.predictors), self.grid, "predictors")
        y = np.asarray(self.responses, dtype=float).ravel()
        if X.shape[0] != y.size or y.size < 1:
            raise InvalidArgumentError(
                f"{X.shape[0]} predictors vs {y.size} responses; need equal nonzero counts"
            )
        object.__setattr__(self, "predictors", X)
        object.__setattr__(self, "responses", y)

    def __len__(self):
        return self.responses.size

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.predictors[idx], self.responses[idx], self.grid)


@dataclass(frozen=True)
class Partition:
    """Disjoint split of a dataset across ``m`` local machines."""

    subsets: tuple
    indices: tuple

    @property
    def sizes(self):
        return [len(s) for s in self.subsets]

    @property
    def grid(self):
        return self.subsets[0].grid

    def __len__(self):
        return len(self.subsets)


@dataclass(frozen=True)
class UnlabeledPool:
    """Unlabelled predictor curves per machine (one 2-d array each, possibly empty)."""

    predictors: tuple

    @property
    def counts(self):
        return [p.shape[0] for p in self.predictors]

    def __len__(self):
        return len(self.predictors)


@dataclass(frozen=True)
class Sim1Config:
    """Scenario with slope set through the composite operator's regularity exponent."""

    N: int = 50
    alpha_pred: float = 0.5
    theta: float = 0.1
    sigma: float = 1.0
    grid: Grid = field(default_factory=make_uniform_grid)

    def __post_init__(self):
        if self.N < 1 or not self.alpha_pred > 0 or self.theta < 0 or self.sigma < 0:
            raise InvalidArgumentError(f"invalid simulation-1 configuration: {self}")

    name = "sim1"

    def basis(self):
        return np.stack([cosine_basis(k, self.grid) for k in range(1, self.N + 1)])

    def score_scales(self):
        k = np.arange(1, self.N + 1, dtype=float)
        return (-1.0) ** (k + 1) * k ** (-self.alpha_pred)

    def kernel(self):
        return BernoulliQuarticKernel()

    def covariance_kernel(self):
        k = np.arange(1, self.N + 1, dtype=float)
        return CosineSeriesKernel(2.0 * k ** (-2.0 * self.alpha_pred))

    def composite_eigenvalues(self):
        """Eigenvalues (k pi)^-4 k^(-2 alpha) of the composite operator, k = 1..N."""
        k = np.arange(1, self.N + 1, dtype=float)
        return (k * np.pi) ** -4.0 * k ** (-2.0 * self.alpha_pred)


@dataclass(frozen=True)
class Sim2Config:
    """Scenario with basis 1, sqrt(2)cos(k pi x), ... and Gaussian-kernel learners."""

    nu: float = 1.1
    sigma: float = 1.5
    n_modes: int = 50
    grid: Grid = field(default_factory=make_uniform_grid)
    bandwidth: float = 0.33

    def __post_init__(self):
        if not self.nu > 0 or self.sigma < 0 or self.n_modes < 1:
            raise InvalidArgumentError(f"invalid simulation-2 configuration: {self}")

    name = "sim2"

    def basis(self):
        return np.stack([cosine_basis(k, self.grid) for k in range(self.n_modes)])

    def score_scales(self):
        k = np.arange(1, self.n_modes + 1, dtype=float)
        return (-1.0) ** (k + 1) * k ** (-self.nu / 2.0)

    def kernel(self):
        return GaussianKernel(self.bandwidth)


def _draw_scores(cfg, n, rng, z=None):
    n_modes = cfg.N if isinstance(cfg, Sim1Config) else cfg.n_modes
    if z is None:
        return rng.uniform(-SQRT3, SQRT3, size=(n, n_modes))
    z = np.array(z, dtype=float)
    return np.broadcast_to(z, (n, n_modes)) if z.ndim <= 1 else z


def draw_predictors(cfg, n, rng, z=None):
    """Draw ``n`` predictor curves; ``z`` overrides the uniform scores (test hook)."""
    scores = _draw_scores(cfg, n, rng, z)
    return (scores * cfg.score_scales()) @ cfg.basis()


def gen_predictor_sim1(cfg, rng, z=None):
    return draw_predictors(cfg, 1, rng, z)[0]


def gen_predictor_sim2(cfg, rng, z=None):
    return draw_predictors(cfg, 1, rng, z)[0]


def beta_star_sim1(cfg):
    """Slope sqrt(L_K) T^theta g* with g* = 4 pi^2 sum_k phi_k, via the shared eigenbasis."""
    k = np.arange(1, cfg.N + 1, dtype=float)
    coef = 4.0 * np.pi**2 * (k * np.pi) ** -2.0 * cfg.composite_eigenvalues() ** cfg.theta
    return coef @ cfg.basis()


def beta_star_sim2(grid):
    k = np.arange(1, 51, dtype=float)
    coef = 4.0 * (-1.0) ** (k + 1) * k**-2.0
    basis = np.stack([cosine_basis(j, grid) for j in range(50)])
    return coef @ basis


def beta_star(cfg):
    if isinstance(cfg, Sim1Config):
        return beta_star_sim1(cfg)
    return beta_star_sim2(cfg.grid)


def gen_dataset(cfg, n, rng, z=None):
    """Draw ``n`` labelled pairs Y = <X, beta*> + N(0, sigma^2)."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"sample size must be a positive integer, got {n}")
    X = draw_predictors(cfg, int(n), rng, z)
    signal = inner(X, beta_star(cfg), cfg.grid)
    noise = rng.normal(0.0, 1.0, size=int(n)) * cfg.sigma
    return Dataset(X, signal + noise, cfg.grid)


def partition(dataset, m, rng):
    """Shuffle, then cut into ``m`` contiguous blocks whose sizes differ by at most one.

    Indices inside a block are kept in their original order, so ``m=1``
    returns the dataset unchanged.
    """
    n = len(dataset)
    if int(m) != m or not 1 <= m <= n:
        raise InvalidArgumentError(f"need 1 <= m <= {n}, got m={m}")
    perm = rng.permutation(n)
    blocks = tuple(np.sort(b) for b in np.array_split(perm, int(m)))
    return Partition(tuple(dataset.subset(b) for b in blocks), blocks)


def gen_unlabeled(cfg, counts, rng):
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise InvalidArgumentError(f"unlabelled counts must be nonnegative: {counts}")
    return UnlabeledPool(
        tuple(
            draw_predictors(cfg, c, rng) if c else np.empty((0, cfg.grid.size))
            for c in counts
        )
    )


def _column_names(grid):
    width = max(3, len(str(grid.size - 1)))
    return ["y"] + [f"x{i:0{width}d}" for i in range(grid.size)]


def dump_dataset_csv(dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_column_names(dataset.grid))
        for y, x in zip(dataset.responses, dataset.predictors):
            writer.writerow([repr(float(y))] + [repr(float(v)) for v in x])


def load_dataset_csv(path, grid=None):
    """Read a dataset written by :func:`dump_dataset_csv`; a uniform grid is assumed by default."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "y":
        raise InvalidArgumentError(f"{path}: first column must be 'y'")
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    if grid is None:
        grid = make_uniform_grid(len(header) - 1)
    return Dataset(data[:, 1:], data[:, 0], grid)
