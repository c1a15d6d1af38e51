"""
SMMSE Toolkit - Uniform Sampling from B_p
=========================================
Exact uniform draws from generalized unit balls and Monte-Carlo MSE
estimates, the independent oracle for every closed-form result.

Construction: |x_n|^p_n = G_n / (sum_m G_m + E) with G_n ~ Gamma(1/p_n, 1)
and E ~ Exp(1), i.e. (|x_1|^p_1, ..., |x_N|^p_N) is Dirichlet(1/p, 1), which
is exactly the image of the uniform law on B_p. Signs are drawn from a
separate stream.
"""

import logging

import numpy as np
import pandas as pd

from components.errors import DomainError
from components.estimators import apply_batch, check_compatible
from components.moments import as_characteristic_vector

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 100_000


def _generator(seed_sequence):
    # counter-based bit generator: child streams do not overlap
    return np.random.Generator(np.random.Philox(seed_sequence))


class BallSampler:
    """Seeded, reproducible stream of uniform samples from B_p"""

    def __init__(self, p, rng_seed=0, flip_signs=False):
        self.p = as_characteristic_vector(p)
        self.rng_seed = int(rng_seed)
        self.flip_signs = flip_signs
        self._seed_sequence = np.random.SeedSequence(self.rng_seed)
        magnitude_seed, sign_seed = self._seed_sequence.spawn(2)
        self._magnitudes = _generator(magnitude_seed)
        self._signs = _generator(sign_seed)

    @classmethod
    def _from_sequence(cls, p, seed_sequence, flip_signs=False):
        sampler = cls.__new__(cls)
        sampler.p = as_characteristic_vector(p)
        sampler.rng_seed = int(seed_sequence.generate_state(1, dtype=np.uint64)[0])
        sampler.flip_signs = flip_signs
        sampler._seed_sequence = seed_sequence
        magnitude_seed, sign_seed = seed_sequence.spawn(2)
        sampler._magnitudes = _generator(magnitude_seed)
        sampler._signs = _generator(sign_seed)
        return sampler

    @property
    def dimension(self):
        return self.p.dimension

    def spawn(self, count):
        """Independent child samplers (for sharded Monte-Carlo loops)"""
        return [
            BallSampler._from_sequence(self.p, child, self.flip_signs)
            for child in self._seed_sequence.spawn(int(count))
        ]

    def draw(self, count):
        shape = (int(count), self.dimension)
        gammas = self._magnitudes.standard_gamma(1.0 / self.p.entries, size=shape)
        tail = self._magnitudes.exponential(size=int(count))
        signs = 2.0 * self._signs.integers(0, 2, size=shape) - 1.0
        if self.flip_signs:
            signs = -signs
        total = gammas.sum(axis=1) + tail
        return signs * (gammas / total[:, None]) ** (1.0 / self.p.entries)


def sample(sampler):
    """One x ~ U(B_p)"""
    return sampler.draw(1)[0]


def sample_batch(sampler, count):
    """(count, N) matrix of independent draws"""
    if count < 0:
        raise DomainError(f"sample count must be nonnegative, got {count}")
    return sampler.draw(count)


def ball_constraint(samples, p):
    """sum_n |x_n|^p_n for each row"""
    p = as_characteristic_vector(p)
    return np.sum(np.abs(np.atleast_2d(samples)) ** p.entries, axis=1)


def _mean_and_error(values):
    values = np.asarray(values, dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def empirical_moment(samples, alpha):
    """(mean, standard error) of x^alpha over the rows of samples"""
    samples = np.atleast_2d(samples)
    values = np.prod(samples ** np.asarray(alpha, dtype=float), axis=1)
    return _mean_and_error(values)


def squared_errors(sampler, A, est, num_samples, chunk_size=DEFAULT_CHUNK):
    """||x - T(W A x)||^2 for num_samples fresh draws, in draw order"""
    check_compatible(A, est)
    errors = []
    remaining = int(num_samples)
    while remaining > 0:
        count = min(remaining, chunk_size)
        X = sampler.draw(count).T
        estimate = apply_batch(est, A.matrix @ X)
        errors.append(np.sum((X - estimate) ** 2, axis=0))
        remaining -= count
    return np.concatenate(errors)


def monte_carlo_mse(sampler, A, est, num_samples, chunk_size=DEFAULT_CHUNK):
    """(mean, standard error) of ||x - apply(est, A x)||^2"""
    if num_samples < 2:
        raise DomainError(f"need at least 2 samples, got {num_samples}")
    return _mean_and_error(squared_errors(sampler, A, est, num_samples, chunk_size))


def dump_samples(path, samples):
    """Write samples as CSV with columns x1..xN"""
    samples = np.atleast_2d(samples)
    frame = pd.DataFrame(samples, columns=[f"x{n + 1}" for n in range(samples.shape[1])])
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.info(f"wrote {samples.shape[0]} samples to {path}")
