import numpy as np
import pandas as pd
import pytest

from components.errors import DomainError
from components.estimators import SensingMatrix, SmmseEstimator, prior_covariance, smse
from components.moments import CharacteristicVector, MomentTable
from components.optimizer import alternating_minimize
from components.sampling import (
    BallSampler,
    ball_constraint,
    dump_samples,
    empirical_moment,
    monte_carlo_mse,
    sample,
    sample_batch,
)
from utils.validation import random_instance

NUMBER_OF_SAMPLES = 100_000

ball_shapes = [
    [2.0, 2.0],
    [0.4, 0.4, 0.4],
    [0.5, 1.0, 2.0, 4.0],
    [1.0] * 6,
    [0.3] * 6,
    [25.0, 25.0],
]


@pytest.mark.parametrize("p", ball_shapes)
def test_samples_lie_inside_the_ball(p):
    samples = sample_batch(BallSampler(p, rng_seed=3), NUMBER_OF_SAMPLES)
    assert samples.shape == (NUMBER_OF_SAMPLES, len(p))
    assert np.all(ball_constraint(samples, p) <= 1.0 + 1e-12)


def test_sampler_is_reproducible():
    first = sample_batch(BallSampler([0.7, 1.4], rng_seed=42), 100)
    second = sample_batch(BallSampler([0.7, 1.4], rng_seed=42), 100)
    other = sample_batch(BallSampler([0.7, 1.4], rng_seed=43), 100)
    np.testing.assert_array_equal(first, second)
    assert not np.array_equal(first, other)


def test_spawned_samplers_are_independent_and_reproducible():
    children = BallSampler([1.0, 1.0, 1.0], rng_seed=5).spawn(3)
    again = BallSampler([1.0, 1.0, 1.0], rng_seed=5).spawn(3)
    draws = [child.draw(50) for child in children]
    np.testing.assert_array_equal(draws[0], again[0].draw(50))
    assert not np.array_equal(draws[0], draws[1])
    assert not np.array_equal(draws[1], draws[2])


def test_single_sample_and_empty_batch():
    sampler = BallSampler([2.0, 2.0, 2.0])
    assert sample(sampler).shape == (3,)
    assert sample_batch(sampler, 0).shape == (0, 3)
    with pytest.raises(DomainError):
        sample_batch(sampler, -1)


def test_disk_moments_match_closed_form():
    samples = sample_batch(BallSampler([2.0, 2.0], rng_seed=7), 1_000_000)
    mean, error = empirical_moment(samples, (2, 0))
    assert abs(mean - 0.25) < 4.0 * error
    mean, error = empirical_moment(samples, (1, 0))
    assert abs(mean) < 4.0 * error


def test_disk_samples_are_uniform_in_radius():
    # P(|x| <= r) = r^2 on the unit disk
    samples = sample_batch(BallSampler([2.0, 2.0], rng_seed=8), NUMBER_OF_SAMPLES)
    radii = np.linalg.norm(samples, axis=1)
    for r in (0.25, 0.5, 0.75):
        fraction = np.mean(radii <= r)
        error = np.sqrt(r ** 2 * (1.0 - r ** 2) / NUMBER_OF_SAMPLES)
        assert abs(fraction - r ** 2) < 4.0 * error


def test_sign_stream_only_flips_signs():
    plain = BallSampler([0.6, 1.1], rng_seed=9).draw(200)
    flipped = BallSampler([0.6, 1.1], rng_seed=9, flip_signs=True).draw(200)
    np.testing.assert_array_equal(flipped, -plain)


def test_monte_carlo_mse_of_zero_estimator_is_trace(etf):
    table = MomentTable(CharacteristicVector.isotropic(0.8, 6))
    est = SmmseEstimator(np.zeros((6, 3)), np.zeros(2))
    mean, error = monte_carlo_mse(BallSampler(table.p, rng_seed=1), etf, est, NUMBER_OF_SAMPLES)
    assert abs(mean - prior_covariance(table).trace) < 4.0 * error


def test_monte_carlo_mse_of_exact_inverse_is_zero():
    rng = np.random.default_rng(4)
    A = SensingMatrix(rng.standard_normal((3, 3)))
    est = SmmseEstimator(np.linalg.inv(A.matrix), [0.0, 1.0])
    mean, _ = monte_carlo_mse(BallSampler([0.5, 1.0, 2.0], rng_seed=2), A, est, 10_000)
    assert mean < 1e-20


def test_monte_carlo_mse_needs_two_samples(small_instance):
    table, A, W, a = small_instance
    with pytest.raises(DomainError):
        monte_carlo_mse(BallSampler(table.p), A, SmmseEstimator(W, a), 1)


@pytest.mark.parametrize("seed", range(10))
def test_closed_form_smse_matches_monte_carlo(seed, quick_optimizer):
    table, A, _, a = random_instance(np.random.default_rng(700 + seed), max_degree=3)
    est, _ = alternating_minimize(table, A, a.size - 1, quick_optimizer)
    mean, error = monte_carlo_mse(BallSampler(table.p, rng_seed=seed), A, est, NUMBER_OF_SAMPLES)
    assert abs(smse(table, A, est) - mean) < 3.0 * error


@pytest.mark.slow
def test_closed_form_smse_matches_monte_carlo_at_scale(small_instance):
    table, A, W, a = small_instance
    est = SmmseEstimator(W, a)
    mean, error = monte_carlo_mse(BallSampler(table.p, rng_seed=0), A, est, 1_000_000)
    assert abs(smse(table, A, est) - mean) < 3.0 * error


def test_dump_samples(tmp_path):
    samples = sample_batch(BallSampler([0.5, 2.0, 1.0], rng_seed=1), 25)
    path = tmp_path / 'samples.csv'
    dump_samples(path, samples)
    frame = pd.read_csv(path, float_precision="round_trip")
    assert list(frame.columns) == ['x1', 'x2', 'x3']
    np.testing.assert_array_equal(frame.to_numpy(), samples)
