import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy.special import gammaln

from components.errors import DimensionMismatchError, DomainError
from components.moments import (
    CharacteristicVector,
    MomentTable,
    enumerate_multi_indices,
    inner_product_moment,
    inner_product_moments,
    log_ball_volume,
    log_gamma,
    log_monomial_integral,
    monomial_moment,
    multi_index_array,
    multinomial_coefficients,
    required_order,
)
from components.sampling import BallSampler, empirical_moment, sample_batch
from utils.validation import quadrature_monomial_integral, random_even_alpha


@pytest.mark.parametrize("z, expected", [
    (1.0, 0.0),
    (0.5, 0.5723649429247001),
    (10.0, 12.801827480081469),
])
def test_log_gamma_known_values(z, expected):
    assert log_gamma(z) == pytest.approx(expected, abs=1e-12)


def test_log_gamma_matches_reference_functions():
    z = np.concatenate([np.linspace(0.01, 0.49, 25), np.linspace(0.5, 60.0, 200)])
    np.testing.assert_allclose(log_gamma(z), gammaln(z), rtol=1e-11, atol=1e-12)
    for value in (0.1, 0.4, 2.5, 7.25, 33.0):
        assert log_gamma(value) == pytest.approx(math.lgamma(value), rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("z", [0.0, -1.0, -0.5, float('nan')])
def test_log_gamma_rejects_nonpositive(z):
    with pytest.raises(DomainError):
        log_gamma(z)


@pytest.mark.parametrize("p, expected", [
    ([2.0, 2.0], math.log(math.pi)),
    ([1.0, 1.0], math.log(2.0)),
    ([0.5, 0.5, 0.5], math.log(64.0 / 720.0)),
    ([2.0, 2.0, 2.0], math.log(4.0 * math.pi / 3.0)),
])
def test_log_ball_volume_closed_forms(p, expected):
    assert log_ball_volume(p) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_ball_volume_tends_to_cube(N):
    volume = math.exp(log_ball_volume(CharacteristicVector.isotropic(200.0, N)))
    assert abs(volume / 2.0 ** N - 1.0) < 0.01


def test_ball_volume_hit_or_miss():
    rng = np.random.default_rng(11)
    points = rng.uniform(-1.0, 1.0, size=(1_000_000, 3))
    inside = (np.sum(np.sqrt(np.abs(points)), axis=1) <= 1.0).astype(float)
    estimate = 8.0 * inside.mean()
    error = 8.0 * inside.std(ddof=1) / np.sqrt(inside.size)
    assert abs(math.exp(log_ball_volume([0.5, 0.5, 0.5])) - estimate) < 4.0 * error


def test_monomial_moment_examples(disk_table):
    assert monomial_moment(disk_table, (2, 0)) == pytest.approx(0.25, rel=1e-12)
    assert monomial_moment(disk_table, (1, 0)) == 0.0
    assert monomial_moment(disk_table, (0, 0)) == 1.0
    assert monomial_moment(MomentTable([2.0]), (2,)) == pytest.approx(1.0 / 3.0, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_odd_multi_indices_have_zero_moment(seed):
    rng = np.random.default_rng(seed)
    table = MomentTable(rng.uniform(0.3, 3.0, size=4))
    for _ in range(20):
        alpha = rng.integers(0, 6, size=4)
        alpha[rng.integers(0, 4)] |= 1
        assert table.moment(alpha) == 0.0
        assert log_monomial_integral(table.p, alpha) == -np.inf


def test_moment_is_memoized(disk_table):
    value = disk_table.moment((4, 2))
    assert disk_table.entries[(4, 2)] == value
    assert disk_table.moment([4, 2]) == value


@pytest.mark.parametrize("seed", range(20))
def test_monomial_integral_matches_quadrature(seed):
    rng = np.random.default_rng(100 + seed)
    N = 2 + seed % 2
    p = rng.uniform(0.5, 3.0, size=N)
    alpha = random_even_alpha(rng, N)
    closed_form = math.exp(log_monomial_integral(p, alpha))
    assert closed_form == pytest.approx(quadrature_monomial_integral(p, alpha), rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_monomial_moment_matches_monte_carlo(seed):
    rng = np.random.default_rng(200 + seed)
    N = 2 + seed % 2
    p = rng.uniform(0.5, 3.0, size=N)
    alpha = random_even_alpha(rng, N)
    mean, error = empirical_moment(sample_batch(BallSampler(p, rng_seed=seed), 1_000_000), alpha)
    assert abs(MomentTable(p).moment(alpha) - mean) <= 4.0 * error + 1e-15


def test_enumerate_multi_indices_examples():
    assert enumerate_multi_indices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert enumerate_multi_indices(3, 0) == [(0, 0, 0)]
    indices = enumerate_multi_indices(6, 9)
    assert len(indices) == math.comb(14, 5) == 2002
    assert len(set(indices)) == 2002
    assert all(sum(alpha) == 9 for alpha in indices)
    assert indices[0] == (9, 0, 0, 0, 0, 0)
    assert indices[-1] == (0, 0, 0, 0, 0, 9)
    assert indices == sorted(indices, reverse=True)


def test_enumerate_multi_indices_rejects_bad_arguments():
    with pytest.raises(DomainError):
        enumerate_multi_indices(0, 2)
    with pytest.raises(DomainError):
        enumerate_multi_indices(2, -1)


@pytest.mark.parametrize("N, order", [(2, 5), (3, 7), (4, 20), (3, 25)])
def test_multinomial_theorem(N, order):
    coefficients = multinomial_coefficients(order, multi_index_array(N, order))
    assert coefficients.sum() == pytest.approx(float(N) ** order, rel=1e-10)


def test_inner_product_moment_examples(disk_table):
    assert inner_product_moment(disk_table, np.array([1.0, 0.0]), 2) == pytest.approx(0.25, rel=1e-12)
    assert inner_product_moment(disk_table, np.array([0.3, -1.7]), 1) == 0.0
    assert inner_product_moment(disk_table, np.array([1.0, 1.0]), 2) == pytest.approx(0.5, rel=1e-12)


def test_inner_product_moment_matches_direct_expansion():
    rng = np.random.default_rng(5)
    table = MomentTable([0.7, 1.3, 2.2])
    u = rng.standard_normal(3)
    extra = np.array([1, 0, 0])
    direct = 0.0
    for alpha in enumerate_multi_indices(3, 5):
        coefficient = math.factorial(5) / math.prod(math.factorial(a) for a in alpha)
        direct += coefficient * np.prod(u ** np.array(alpha)) * table.moment(np.array(alpha) + extra)
    assert inner_product_moment(table, u, 5, extra=extra) == pytest.approx(direct, rel=1e-12, abs=1e-15)


def test_batched_inner_product_moments_match_single():
    rng = np.random.default_rng(6)
    table = MomentTable(CharacteristicVector.isotropic(0.6, 4))
    U = rng.standard_normal((5, 4))
    batched = inner_product_moments(table, U, 6, extra=np.array([0, 1, 1, 0]))
    single = [inner_product_moment(table, u, 6, extra=np.array([0, 1, 1, 0])) for u in U]
    np.testing.assert_allclose(batched, single, rtol=1e-13)


def test_inner_product_moment_validates_arguments(disk_table):
    with pytest.raises(DimensionMismatchError):
        inner_product_moment(disk_table, np.ones(3), 2)
    with pytest.raises(DomainError):
        inner_product_moment(disk_table, np.ones(2), 2, extra=np.array([2, 1]))


def test_expansion_is_cached_and_thread_safe():
    table = MomentTable(CharacteristicVector.isotropic(0.4, 6))
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda _: table.expansion(18), range(8)))
    alphas, weights = results[0]
    assert all(r[0] is alphas and r[1] is weights for r in results)
    # only all-even multi-indices survive: C(9 + 5, 5)
    assert alphas.shape == (math.comb(14, 5), 6)
    assert np.all(np.isfinite(weights)) and np.all(weights > 0)


def test_required_order():
    assert required_order(9) == 20
    assert required_order(0) == 2


@pytest.mark.parametrize("p", [[0.0, 1.0], [-1.0], [], [1.0, float('inf')]])
def test_characteristic_vector_rejects_invalid_entries(p):
    with pytest.raises(DomainError):
        CharacteristicVector(p)


@pytest.mark.parametrize("seed", range(10))
def test_ball_volume_increases_with_each_exponent(seed):
    rng = np.random.default_rng(300 + seed)
    N = int(rng.integers(1, 6))
    p = rng.uniform(0.2, 5.0, size=N)
    for n in range(N):
        bumped = p.copy()
        bumped[n] *= rng.uniform(1.05, 2.0)
        assert log_ball_volume(bumped) > log_ball_volume(p)
