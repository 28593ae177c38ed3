import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import cross_val_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from funclearn import (
    DGDFLRegressor,
    DistributedRidgeRegressor,
    FunctionalRidgeRegressor,
    GDFLRegressor,
    SemiDGDFLRegressor,
)
from funclearn.algorithms import FitConfig, RidgeConfig, gdfl_fit, rls_fit
from funclearn.estimators import resolve_kernel
from funclearn.exceptions import InvalidArgumentError
from funclearn.funcspace import BernoulliQuarticKernel, GaussianKernel, make_uniform_grid
from funclearn.simdata import Sim2Config, gen_dataset

ESTIMATORS = [
    GDFLRegressor(),
    DGDFLRegressor(n_machines=3, random_state=0),
    SemiDGDFLRegressor(n_machines=2, random_state=0),
    FunctionalRidgeRegressor(lam=1e-3),
    DistributedRidgeRegressor(lam=1e-3, n_machines=2, random_state=0),
]


@pytest.fixture(scope="module")
def data():
    d = gen_dataset(Sim2Config(), 80, np.random.default_rng(0))
    return d.predictors, d.responses


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_fit_predict(est, data):
    X, y = data
    model = clone(est).fit(X, y)
    pred = model.predict(X)
    assert pred.shape == y.shape
    assert np.allclose(pred, X @ model.coef_, rtol=0, atol=1e-14)
    assert model.n_features_in_ == X.shape[1]
    assert model.score(X, y) > 0.5


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_params_round_trip(est):
    params = est.get_params()
    twin = type(est)(**params)
    assert twin.get_params() == params
    assert clone(est).get_params() == params


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_not_fitted(est, data):
    with pytest.raises(NotFittedError):
        clone(est).predict(data[0])


def test_gdfl_matches_functional_api(data):
    X, y = data
    model = GDFLRegressor(kernel="gaussian").fit(X, y)
    d = gen_dataset(Sim2Config(), 80, np.random.default_rng(0))
    res = gdfl_fit(d, GaussianKernel(0.33), FitConfig())
    assert np.array_equal(model.beta_, res.beta)
    assert model.gamma0_ == res.gamma0
    assert model.converged_ and model.n_iter_ == res.iterations


def test_ridge_matches_functional_api(data):
    X, y = data
    model = FunctionalRidgeRegressor(lam=1e-3).fit(X, y)
    d = gen_dataset(Sim2Config(), 80, np.random.default_rng(0))
    res = rls_fit(d, GaussianKernel(0.33), RidgeConfig(1e-3))
    assert np.array_equal(model.beta_, res.beta)
    assert np.array_equal(model.dual_coef_, res.coef)


def test_dgdfl_single_machine_equals_gdfl(data):
    X, y = data
    a = DGDFLRegressor(n_machines=1, random_state=3).fit(X, y)
    b = GDFLRegressor().fit(X, y)
    assert np.array_equal(a.beta_, b.beta_)


def test_random_state_reproducible(data):
    X, y = data
    a = DGDFLRegressor(n_machines=4, random_state=7).fit(X, y)
    b = DGDFLRegressor(n_machines=4, random_state=7).fit(X, y)
    assert np.array_equal(a.beta_, b.beta_)
    assert a.partition_sizes_ == [20] * 4


def test_semi_uses_unlabeled(data):
    X, y = data
    extra = gen_dataset(Sim2Config(), 40, np.random.default_rng(1)).predictors
    model = SemiDGDFLRegressor(n_machines=2, random_state=0).fit(X, y, X_unlabeled=extra)
    assert model.unlabeled_counts_ == [20, 20]
    plain = DGDFLRegressor(n_machines=2, random_state=0).fit(X, y)
    assert not np.array_equal(model.beta_, plain.beta_)
    empty = SemiDGDFLRegressor(n_machines=2, random_state=0).fit(X, y)
    assert np.array_equal(empty.beta_, plain.beta_)


def test_pipeline_and_cross_val(data):
    X, y = data
    pipe = make_pipeline(FunctionTransformer(), FunctionalRidgeRegressor(lam=1e-3))
    scores = cross_val_score(pipe, X, y, cv=3)
    assert scores.shape == (3,) and np.all(np.isfinite(scores))


def test_grid_size_mismatch(data):
    X, y = data
    with pytest.raises(InvalidArgumentError):
        GDFLRegressor(grid=make_uniform_grid(11)).fit(X, y)


def test_predict_wrong_width(data):
    X, y = data
    model = FunctionalRidgeRegressor(lam=1e-3).fit(X, y)
    with pytest.raises(ValueError):
        model.predict(X[:, :50])


def test_rejects_nan(data):
    X, y = data
    X = X.copy()
    X[0, 0] = np.nan
    with pytest.raises(ValueError):
        GDFLRegressor().fit(X, y)


def test_resolve_kernel():
    assert isinstance(resolve_kernel("bernoulli"), BernoulliQuarticKernel)
    assert resolve_kernel("gaussian", 0.2).bandwidth == 0.2
    k = GaussianKernel(0.5)
    assert resolve_kernel(k) is k
    with pytest.raises(InvalidArgumentError):
        resolve_kernel("laplace")
