import numpy as np
import pytest

from funclearn.exceptions import InvalidArgumentError
from funclearn.funcspace import (
    CosineSeriesKernel,
    cosine_basis,
    inner,
    kernel_matrix,
    make_uniform_grid,
    sobolev_cosine_weights,
)
from funclearn.simdata import (
    Dataset,
    Sim1Config,
    Sim2Config,
    beta_star,
    beta_star_sim1,
    beta_star_sim2,
    draw_predictors,
    dump_dataset_csv,
    gen_dataset,
    gen_predictor_sim1,
    gen_predictor_sim2,
    gen_unlabeled,
    load_dataset_csv,
    partition,
)

SQRT3 = np.sqrt(3.0)


@pytest.fixture(scope="module")
def sim1():
    return Sim1Config()


@pytest.fixture(scope="module")
def sim2():
    return Sim2Config()


def test_sim1_zero_scores(sim1):
    rng = np.random.default_rng(0)
    assert np.array_equal(gen_predictor_sim1(sim1, rng, z=0.0), np.zeros(201))


def test_sim1_single_term():
    cfg = Sim1Config(N=1)
    x = gen_predictor_sim1(cfg, np.random.default_rng(0), z=SQRT3)
    assert np.allclose(x, SQRT3 * cosine_basis(1, cfg.grid), rtol=0, atol=1e-14)


def test_sim1_first_score_second_moment(sim1):
    rng = np.random.default_rng(11)
    X = draw_predictors(sim1, 100_000, rng)
    score = inner(X, cosine_basis(1, sim1.grid), sim1.grid)
    assert np.mean(score**2) == pytest.approx(1.0, abs=0.02)


def test_sim1_config_validation():
    with pytest.raises(InvalidArgumentError):
        Sim1Config(N=0)
    with pytest.raises(InvalidArgumentError):
        Sim1Config(sigma=-1)
    with pytest.raises(InvalidArgumentError):
        Sim2Config(nu=0)


def test_beta_star_sim1_theta_zero():
    cfg = Sim1Config(theta=0.0)
    b = beta_star_sim1(cfg)
    for k in (1, 2, 5):
        assert inner(b, cosine_basis(k, cfg.grid), cfg.grid) == pytest.approx(4 / k**2, abs=1e-10)


def test_beta_star_sim1_leading_coefficient(sim1):
    b = beta_star_sim1(sim1)
    assert inner(b, cosine_basis(1, sim1.grid), sim1.grid) == pytest.approx(
        4 * np.pi**-0.4, abs=1e-10
    )
    assert 4 * np.pi**-0.4 == pytest.approx(2.53046, abs=1e-5)


def test_beta_star_sim1_is_truncated(sim1):
    b = beta_star_sim1(sim1)
    for k in (0, 51, 60, 100):
        assert abs(inner(b, cosine_basis(k, sim1.grid), sim1.grid)) <= 1e-10


def _sym_power(mat, power, floor=1e-14):
    vals, vecs = np.linalg.eigh(mat)
    vals = np.where(vals > floor * vals.max(), vals, 0.0)
    scaled = np.power(vals, power, where=vals > 0, out=np.zeros_like(vals))
    return (vecs * scaled) @ vecs.T


def test_beta_star_sim1_matches_matrix_power_oracle(sim1):
    # Build sqrt(L_K) T^theta g* from eigendecompositions of the discretised
    # operators in the weighted inner product. The kernel is the cosine series
    # cut at 200 terms: on a 201-point grid higher terms alias onto low modes.
    g = sim1.grid
    rw = np.sqrt(g.weights)
    K = kernel_matrix(CosineSeriesKernel(sobolev_cosine_weights(200)), g)
    C = kernel_matrix(sim1.covariance_kernel(), g)
    Kd = rw[:, None] * K * rw[None, :]
    Cd = rw[:, None] * C * rw[None, :]
    root_K = _sym_power(Kd, 0.5)
    T = root_K @ Cd @ root_K
    g_star = 4 * np.pi**2 * sum(cosine_basis(k, g) for k in range(1, 51))
    oracle = (root_K @ _sym_power(T, sim1.theta) @ (rw * g_star)) / rw
    assert np.max(np.abs(oracle - beta_star_sim1(sim1))) <= 1e-8


def test_sim1_covariance_matches_analytic(sim1):
    rng = np.random.default_rng(5)
    sub = sim1.grid.points[::10]
    acc = np.zeros((sub.size, sub.size))
    draws = 10
    for _ in range(draws):
        X = draw_predictors(sim1, 100_000, rng)[:, ::10]
        acc += X.T @ X
    empirical = acc / (draws * 100_000)
    analytic = sim1.covariance_kernel()(sub[:, None], sub[None, :])
    assert np.max(np.abs(empirical - analytic)) <= 0.05


def test_sim2_predictor_hooks(sim2):
    rng = np.random.default_rng(0)
    assert np.array_equal(gen_predictor_sim2(sim2, rng, z=0.0), np.zeros(201))
    z = np.zeros(50)
    z[0] = SQRT3
    assert np.allclose(gen_predictor_sim2(sim2, rng, z=z), SQRT3, rtol=0, atol=1e-15)
    z = np.zeros(50)
    z[1] = 1.0
    x = gen_predictor_sim2(sim2, rng, z=z)
    coef = inner(x, cosine_basis(1, sim2.grid), sim2.grid)
    assert coef == pytest.approx(-(2**-0.55), abs=1e-12)
    assert abs(coef) == pytest.approx(0.683, abs=1e-3)


def test_beta_star_sim2_coefficients():
    g = make_uniform_grid(201)
    b = beta_star_sim2(g)
    assert inner(b, cosine_basis(0, g), g) == pytest.approx(4.0, abs=1e-10)
    assert inner(b, cosine_basis(1, g), g) == pytest.approx(-1.0, abs=1e-10)
    assert abs(inner(b, cosine_basis(59, g), g)) <= 1e-10


def test_noiseless_responses(sim2):
    cfg = Sim2Config(sigma=0.0)
    d = gen_dataset(cfg, 30, np.random.default_rng(1))
    assert np.array_equal(d.responses, inner(d.predictors, beta_star(cfg), cfg.grid))


def test_noise_is_centred():
    cfg = Sim1Config(sigma=1.0)
    d = gen_dataset(cfg, 100_000, np.random.default_rng(2))
    resid = d.responses - inner(d.predictors, beta_star(cfg), cfg.grid)
    assert np.mean(resid) == pytest.approx(0.0, abs=0.02)
    assert np.std(resid) == pytest.approx(1.0, abs=0.02)


def test_gen_dataset_rejects_empty(sim2):
    with pytest.raises(InvalidArgumentError):
        gen_dataset(sim2, 0, np.random.default_rng(0))


def test_dataset_validation(sim2):
    with pytest.raises(InvalidArgumentError):
        Dataset(np.zeros((3, 201)), np.zeros(2), sim2.grid)
    with pytest.raises(InvalidArgumentError):
        Dataset(np.zeros((3, 20)), np.zeros(3), sim2.grid)


def test_determinism(sim1, sim2):
    for cfg in (sim1, sim2):
        a = gen_dataset(cfg, 40, np.random.default_rng(7))
        b = gen_dataset(cfg, 40, np.random.default_rng(7))
        assert np.array_equal(a.predictors, b.predictors)
        assert np.array_equal(a.responses, b.responses)
        pa = partition(a, 3, np.random.default_rng(8))
        pb = partition(b, 3, np.random.default_rng(8))
        for x, y in zip(pa.indices, pb.indices):
            assert np.array_equal(x, y)


@pytest.fixture
def data10(sim2):
    return gen_dataset(sim2, 10, np.random.default_rng(3))


def test_partition_single_block(data10):
    p = partition(data10, 1, np.random.default_rng(0))
    assert p.sizes == [10]
    assert np.array_equal(p.subsets[0].predictors, data10.predictors)


def test_partition_equal_blocks(sim2):
    d = gen_dataset(sim2, 100, np.random.default_rng(3))
    assert partition(d, 5, np.random.default_rng(0)).sizes == [20] * 5


def test_partition_remainder(data10):
    p = partition(data10, 3, np.random.default_rng(0))
    assert p.sizes == [4, 3, 3]
    assert sorted(np.concatenate(p.indices).tolist()) == list(range(10))
    for block, idx in zip(p.subsets, p.indices):
        assert np.array_equal(block.responses, data10.responses[idx])


@pytest.mark.parametrize("m", [0, 11])
def test_partition_bad_m(data10, m):
    with pytest.raises(InvalidArgumentError):
        partition(data10, m, np.random.default_rng(0))


def test_unlabeled_pools(sim2):
    rng = np.random.default_rng(0)
    assert gen_unlabeled(sim2, [0, 0], rng).counts == [0, 0]
    pool = gen_unlabeled(sim2, [5, 5], rng)
    assert pool.counts == [5, 5]
    assert all(p.shape == (5, 201) for p in pool.predictors)
    with pytest.raises(InvalidArgumentError):
        gen_unlabeled(sim2, [1, -1], rng)


def test_unlabeled_uses_predictor_generator(sim2):
    pool = gen_unlabeled(sim2, [4], np.random.default_rng(9))
    assert np.array_equal(pool.predictors[0], draw_predictors(sim2, 4, np.random.default_rng(9)))


def test_csv_round_trip(tmp_path, sim2):
    d = gen_dataset(sim2, 5, np.random.default_rng(4))
    path = tmp_path / "data.csv"
    dump_dataset_csv(d, path)
    header = path.read_text().splitlines()[0].split(",")
    assert header[:3] == ["y", "x000", "x001"] and header[-1] == "x200"
    back = load_dataset_csv(path)
    assert np.array_equal(back.predictors, d.predictors)
    assert np.array_equal(back.responses, d.responses)
