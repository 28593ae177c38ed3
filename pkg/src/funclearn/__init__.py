"""Gradient-descent functional linear regression with divide-and-conquer fitting."""
from .algorithms import (
    FitConfig,
    FitResult,
    RidgeConfig,
    dgdfl_fit,
    drk_fit,
    estimate_step_constant,
    gdfl_fit,
    gdfl_step,
    rls_fit,
    semi_dgdfl_fit,
)
from .estimators import (
    DGDFLRegressor,
    DistributedRidgeRegressor,
    FunctionalRidgeRegressor,
    GDFLRegressor,
    SemiDGDFLRegressor,
)
from .exceptions import (
    ConfigError,
    DegenerateDataError,
    DivergenceError,
    FuncLearnError,
    InvalidArgumentError,
    NumericalError,
)
from .funcspace import (
    BernoulliQuarticKernel,
    CosineSeriesKernel,
    GaussianKernel,
    Grid,
    GridMatrixKernel,
    make_uniform_grid,
)

__version__ = "0.1.0"
