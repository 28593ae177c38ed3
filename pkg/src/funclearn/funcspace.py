"""Functions on a quadrature grid over [0, 1], Mercer kernels and integral operators.

A function is stored as its samples on a :class:`Grid` (a 1-d float array of
length ``grid.size``); a batch of functions is a 2-d array with one function
per row. Integrals are trapezoid-rule sums with the grid weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError

__all__ = [
    "Grid",
    "make_uniform_grid",
    "check_func",
    "inner",
    "l2_norm",
    "cosine_basis",
    "b4",
    "Kernel",
    "CosineSeriesKernel",
    "BernoulliQuarticKernel",
    "GaussianKernel",
    "GridMatrixKernel",
    "sobolev_cosine_weights",
    "kernel_eval",
    "kernel_matrix",
    "apply_kernel_operator",
    "gram_entry",
    "gram_matrix",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered quadrature nodes on [0, 1] with nonnegative weights summing to one."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if points.ndim != 1 or points.shape != weights.shape:
            raise InvalidArgumentError("points and weights must be 1-d arrays of equal length")
        if points.size < 2 or np.any(np.diff(points) <= 0):
            raise InvalidArgumentError("grid points must be strictly increasing")
        if points[0] != 0.0 or points[-1] != 1.0:
            raise InvalidArgumentError("grid must start at 0 and end at 1")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("weights must be nonnegative and sum to 1")
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self):
        return self.points.size

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash((self.points.tobytes(), self.weights.tobytes()))

    def __repr__(self):
        return f"Grid(size={self.size})"


def make_uniform_grid(n_points=201):
    """Uniform grid on [0, 1] with composite trapezoid weights.

    >>> g = make_uniform_grid(3)
    >>> g.points.tolist(), g.weights.tolist()
    ([0.0, 0.5, 1.0], [0.25, 0.5, 0.25])
    """
    if int(n_points) != n_points or n_points < 3:
        raise InvalidArgumentError(f"grid needs at least 3 points, got {n_points}")
    n_points = int(n_points)
    points = np.linspace(0.0, 1.0, n_points)
    weights = np.full(n_points, 1.0 / (n_points - 1))
    weights[0] = weights[-1] = 0.5 / (n_points - 1)
    return Grid(points, weights)


def check_func(f, grid, name="f"):
    """Validate grid samples (one function or a batch of rows) and return a float array."""
    arr = np.asarray(f, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[-1] != grid.size:
        raise InvalidArgumentError(
            f"{name} has shape {arr.shape}; expected trailing length {grid.size}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return arr


def inner(f, g, grid):
    """Quadrature approximation of the L2 inner product.

    Either argument may be a batch (rows); the result broadcasts accordingly.
    """
    f = check_func(f, grid, "f")
    g = check_func(g, grid, "g")
    return (f * grid.weights) @ g.T if g.ndim == 2 else (f * grid.weights) @ g


def l2_norm(f, grid):
    f = check_func(f, grid)
    return np.sqrt(np.sum(grid.weights * f * f, axis=-1))


def cosine_basis(k, grid):
    """Orthonormal cosine basis on [0, 1]: 1 for ``k == 0``, else sqrt(2) cos(k pi x)."""
    if int(k) != k or k < 0:
        raise InvalidArgumentError(f"basis index must be a nonnegative integer, got {k}")
    if k == 0:
        return np.ones(grid.size)
    return np.sqrt(2.0) * np.cos(k * np.pi * grid.points)


def b4(x):
    """Fourth Bernoulli polynomial x^4 - 2x^3 + x^2 - 1/30."""
    x = np.asarray(x, dtype=float)
    return x**4 - 2.0 * x**3 + x**2 - 1.0 / 30.0


def sobolev_cosine_weights(n_terms):
    """Series weights 2/(k pi)^4, k = 1..n_terms, of the Bernoulli quartic kernel."""
    k = np.arange(1, n_terms + 1, dtype=float)
    return 2.0 / (k * np.pi) ** 4


class Kernel:
    """Symmetric positive semi-definite kernel on [0, 1] x [0, 1].

    Subclasses implement ``__call__`` with numpy broadcasting. ``matrix``
    memoises the kernel matrix per grid; kernels are immutable so the cache
    never goes stale.
    """

    def __call__(self, x, y):
        raise NotImplementedError

    def matrix(self, grid):
        cache = self.__dict__.setdefault("_matrix_cache", {})
        key = hash(grid)
        if key not in cache:
            mat = self._matrix(grid)
            mat = 0.5 * (mat + mat.T)
            mat.flags.writeable = False
            cache.clear()
            cache[key] = mat
        return cache[key]

    def _matrix(self, grid):
        x = grid.points
        return self(x[:, None], x[None, :])

    def __getstate__(self):
        state = self.__dict__.copy()
        state.pop("_matrix_cache", None)
        return state


class CosineSeriesKernel(Kernel):
    """K(x, y) = sum_k w_k cos(k pi x) cos(k pi y), k = 1..len(weights)."""

    def __init__(self, weights):
        weights = np.array(weights, dtype=float).ravel()
        if weights.size == 0 or np.any(weights <= 0):
            raise InvalidArgumentError("cosine series weights must be positive")
        weights.flags.writeable = False
        self.weights = weights

    def __repr__(self):
        return f"CosineSeriesKernel(n_terms={self.weights.size})"

    @property
    def frequencies(self):
        return np.arange(1, self.weights.size + 1) * np.pi

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        xf, yf = x.ravel(), y.ravel()
        out = np.zeros(xf.size)
        freqs = self.frequencies
        block = max(1, int(4_000_000 // max(xf.size, 1)))
        for start in range(0, freqs.size, block):
            f = freqs[start:start + block]
            w = self.weights[start:start + block]
            out += (np.cos(np.outer(xf, f)) * np.cos(np.outer(yf, f))) @ w
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def _matrix(self, grid):
        c = np.cos(np.outer(grid.points, self.frequencies))
        return (c * self.weights) @ c.T


class BernoulliQuarticKernel(Kernel):
    """Closed form of the cosine series with weights 2/(k pi)^4."""

    def __repr__(self):
        return "BernoulliQuarticKernel()"

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = -(b4(np.abs(x - y) / 2.0) + b4((x + y) / 2.0)) / 3.0
        return out if out.ndim else float(out)


class GaussianKernel(Kernel):
    """exp(-(x - y)^2 / (2 h^2)) with bandwidth h."""

    def __init__(self, bandwidth=0.33):
        if not bandwidth > 0:
            raise InvalidArgumentError(f"bandwidth must be positive, got {bandwidth}")
        self.bandwidth = float(bandwidth)

    def __repr__(self):
        return f"GaussianKernel(bandwidth={self.bandwidth})"

    def __call__(self, x, y):
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        out = np.exp(-(d * d) / (2.0 * self.bandwidth**2))
        return out if out.ndim else float(out)


class GridMatrixKernel(Kernel):
    """Kernel given explicitly by its values on a grid; only grid points may be queried."""

    def __init__(self, values, grid):
        values = np.array(values, dtype=float)
        if values.shape != (grid.size, grid.size):
            raise InvalidArgumentError(
                f"kernel matrix has shape {values.shape}; grid has {grid.size} points"
            )
        if not np.allclose(values, values.T, rtol=0.0, atol=1e-12):
            raise InvalidArgumentError("kernel matrix is not symmetric")
        values.flags.writeable = False
        self.values = values
        self.grid = grid

    def __repr__(self):
        return f"GridMatrixKernel(size={self.grid.size})"

    def _index(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.grid.points, x), 0, self.grid.size - 1)
        if not np.array_equal(self.grid.points[idx], x):
            raise InvalidArgumentError("GridMatrixKernel queried off its grid")
        return idx

    def __call__(self, x, y):
        out = self.values[self._index(x), self._index(y)]
        return out if np.ndim(out) else float(out)

    def _matrix(self, grid):
        if grid != self.grid:
            idx = self._index(grid.points)
            return self.values[np.ix_(idx, idx)].copy()
        return self.values.copy()


def kernel_eval(kernel, x, y):
    return kernel(x, y)


def kernel_matrix(kernel, grid):
    """Kernel values on the grid product; symmetric by construction."""
    return kernel.matrix(grid)


def apply_kernel_operator(kernel, f, grid):
    """Quadrature discretisation of the integral operator: (L f)(x_i) = sum_l w_l R(x_i, x_l) f(x_l).

    ``f`` may be a batch of functions (rows); each row is mapped independently.
    """
    f = check_func(f, grid)
    return (f * grid.weights) @ kernel.matrix(grid)


def gram_entry(xi, kernel, xj, grid):
    """Double integral of Xi(x) K(x, y) Xj(y)."""
    xi = check_func(xi, grid, "xi")
    xj = check_func(xj, grid, "xj")
    if xi.ndim != 1 or xj.ndim != 1:
        raise InvalidArgumentError("gram_entry takes single functions")
    return float((xi * grid.weights) @ kernel.matrix(grid) @ (xj * grid.weights))


def gram_matrix(predictors, kernel, grid, kernel_images=None):
    """Gram matrix M[i, j] = <X_i, L_K X_j> for a batch of predictors.

    Pass precomputed ``kernel_images`` (rows L_K X_j) to skip recomputing them.
    """
    predictors = check_func(np.atleast_2d(predictors), grid, "predictors")
    if kernel_images is None:
        kernel_images = apply_kernel_operator(kernel, predictors, grid)
    mat = (predictors * grid.weights) @ kernel_images.T
    return 0.5 * (mat + mat.T)
