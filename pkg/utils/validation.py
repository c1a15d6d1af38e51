"""
SMMSE Toolkit - Oracle Checks
=============================
Independent cross-checks of the closed forms: monomial moments against
quadrature and Monte-Carlo, the W-gradient against central differences and
the closed-form SMSE against Monte-Carlo. Every check yields one report row.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import integrate

from components.estimators import SensingMatrix, SmmseEstimator, smse
from components.moments import CharacteristicVector, MomentTable, log_monomial_integral
from components.optimizer import OptimizerConfig, alternating_minimize, finite_difference_gradient, gradient_W
from components.sampling import BallSampler, empirical_moment, monte_carlo_mse, sample_batch

logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 1e-6
GRADIENT_TOLERANCE = 1e-5
MOMENT_STANDARD_ERRORS = 4.0
SMSE_STANDARD_ERRORS = 3.0


@dataclass
class ValidationSettings:
    seed: int = 0
    moment_cases: int = 20
    gradient_cases: int = 10
    smse_cases: int = 10
    mc_samples: int = 100_000


def _row(suite, case, value, reference, error, tolerance):
    return {
        'suite': suite,
        'case': case,
        'value': float(value),
        'reference': float(reference),
        'error': float(error),
        'tolerance': float(tolerance),
        'passed': bool(error <= tolerance),
    }


def quadrature_monomial_integral(p, alpha):
    """Integral of x^alpha over B_p (N = 2 or 3, even alpha) by adaptive quadrature.

    The innermost coordinate is integrated analytically up to the boundary
    h = (1 - sum |x_n|^p_n)^(1/p_last); the rest uses scipy.integrate on the
    positive orthant, then the 2^N sign patterns are folded back in.
    """
    p = np.asarray(p, dtype=float)
    alpha = np.asarray(alpha, dtype=int)
    last = alpha[-1] + 1.0

    def inner(*coordinates):
        rest = 1.0 - sum(x ** pn for x, pn in zip(coordinates, p[:-1]))
        if rest <= 0.0:
            return 0.0
        monomial = np.prod([x ** a for x, a in zip(coordinates, alpha[:-1])])
        return monomial * rest ** (last / p[-1]) / last

    if p.size == 2:
        value, _ = integrate.quad(inner, 0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=200)
    elif p.size == 3:
        value, _ = integrate.dblquad(
            lambda x2, x1: inner(x1, x2),
            0.0, 1.0,
            lambda x1: 0.0,
            lambda x1: max(1.0 - x1 ** p[0], 0.0) ** (1.0 / p[1]),
            epsabs=0.0, epsrel=1e-10,
        )
    else:
        raise ValueError(f"quadrature oracle supports N = 2 or 3, got {p.size}")
    return value * 2.0 ** p.size


def random_even_alpha(rng, dimension, max_order=6):
    """Random multi-index with even entries and order <= max_order"""
    halves = rng.multinomial(int(rng.integers(0, max_order // 2 + 1)), np.ones(dimension) / dimension)
    return 2 * halves


def check_moments(settings):
    rng = np.random.default_rng(settings.seed)
    rows = []
    for case in range(settings.moment_cases):
        dimension = 2 + case % 2
        p = CharacteristicVector(rng.uniform(0.5, 3.0, size=dimension))
        alpha = random_even_alpha(rng, dimension)
        table = MomentTable(p)
        label = f"N={dimension} p={np.round(p.entries, 3).tolist()} alpha={alpha.tolist()}"

        closed_form = np.exp(log_monomial_integral(p, alpha))
        reference = quadrature_monomial_integral(p.entries, alpha)
        rows.append(_row(
            'moment vs quadrature', label, closed_form, reference,
            abs(closed_form - reference) / abs(reference), QUADRATURE_TOLERANCE,
        ))

        moment = table.moment(alpha)
        samples = sample_batch(BallSampler(p, rng_seed=settings.seed + case), settings.mc_samples)
        mean, error = empirical_moment(samples, alpha)
        rows.append(_row(
            'moment vs Monte-Carlo', label, moment, mean,
            abs(moment - mean) / error if error > 0 else abs(moment - mean),
            MOMENT_STANDARD_ERRORS,
        ))
    return rows


def random_instance(rng, max_N=4, max_M=3, max_degree=4):
    """Random (table, A, estimator-shaped W and a) for gradient and SMSE checks"""
    N = int(rng.integers(2, max_N + 1))
    M = int(rng.integers(1, min(max_M, N - 1) + 1))
    degree = int(rng.integers(1, max_degree + 1))
    p = CharacteristicVector(rng.uniform(0.5, 2.5, size=N))
    A = SensingMatrix(rng.standard_normal((M, N)))
    W = rng.standard_normal((N, M)) / np.sqrt(M)
    a = rng.standard_normal(degree + 1) / np.arange(1, degree + 2)
    return MomentTable(p), A, W, a


def check_gradients(settings):
    rng = np.random.default_rng(settings.seed + 1)
    rows = []
    for case in range(settings.gradient_cases):
        table, A, W, a = random_instance(rng)
        est = SmmseEstimator(W, a)
        analytic = gradient_W(table, A, est)
        numeric = finite_difference_gradient(table, A, est)
        scale = max(np.linalg.norm(numeric), np.finfo(float).tiny)
        rows.append(_row(
            'gradient vs finite differences',
            f"N={A.N} M={A.M} D={est.degree}",
            np.linalg.norm(analytic), np.linalg.norm(numeric),
            np.linalg.norm(analytic - numeric) / scale, GRADIENT_TOLERANCE,
        ))
    return rows


def check_smse(settings):
    rng = np.random.default_rng(settings.seed + 2)
    config = OptimizerConfig(max_outer_iterations=5, max_inner_steps=20)
    rows = []
    for case in range(settings.smse_cases):
        table, A, _, a = random_instance(rng, max_degree=3)
        est, _ = alternating_minimize(table, A, a.size - 1, config)
        closed_form = smse(table, A, est)
        mean, error = monte_carlo_mse(
            BallSampler(table.p, rng_seed=settings.seed + case), A, est, settings.mc_samples
        )
        rows.append(_row(
            'smse vs Monte-Carlo',
            f"N={A.N} M={A.M} D={est.degree}",
            closed_form, mean, abs(closed_form - mean) / max(error, np.finfo(float).tiny),
            SMSE_STANDARD_ERRORS,
        ))
    return rows


def run_validation(settings=None):
    """All oracle checks as a DataFrame (one row per case)"""
    settings = settings or ValidationSettings()
    rows = []
    for suite in (check_moments, check_gradients, check_smse):
        logger.info(f"running {suite.__name__}")
        rows.extend(suite(settings))
    report = pd.DataFrame(rows)
    failed = int((~report['passed']).sum())
    if failed:
        logger.warning(f"{failed} of {len(report)} oracle checks failed")
    else:
        logger.info(f"all {len(report)} oracle checks passed")
    return report
