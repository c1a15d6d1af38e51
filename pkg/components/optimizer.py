"""
SMMSE Toolkit - Alternating Minimization
========================================
Minimizes the closed-form SMSE over (a, W): an exact coefficient update
alternated with Armijo steepest descent on the linear operator W.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from components.errors import ConfigError
from components.estimators import (
    SmmseEstimator,
    check_compatible,
    cross_moments,
    expected_VtV,
    expected_xV,
    prior_covariance,
    smse,
    solve_spd,
)
from components.moments import inner_product_moments, required_order

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12


@dataclass
class OptimizerConfig:
    """Hyperparameters of the alternating minimization.

    Tolerances left as None scale with tr(C_x): outer 1e-8 tr(C_x), inner 1e-12 tr(C_x).
    """

    max_outer_iterations: int = 50
    outer_tolerance: float = None
    armijo_c1: float = 1e-4
    armijo_backtrack: float = 0.5
    max_inner_steps: int = 200
    initial_step: float = 1.0
    init_scale: float = 10.0
    inner_tolerance: float = None
    max_backtracks: int = 60
    gradient_tolerance: float = 1e-10

    def __post_init__(self):
        if int(self.max_outer_iterations) < 1 or int(self.max_inner_steps) < 1:
            raise ConfigError("iteration limits must be positive")
        if int(self.max_backtracks) < 1:
            raise ConfigError("max_backtracks must be positive")
        for name in ('outer_tolerance', 'inner_tolerance'):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if not 0.0 < self.armijo_c1 < 1.0:
            raise ConfigError(f"armijo_c1 must lie in (0, 1), got {self.armijo_c1}")
        if not 0.0 < self.armijo_backtrack < 1.0:
            raise ConfigError(f"armijo_backtrack must lie in (0, 1), got {self.armijo_backtrack}")
        if self.initial_step <= 0 or self.init_scale <= 0 or self.gradient_tolerance <= 0:
            raise ConfigError("initial_step, init_scale and gradient_tolerance must be positive")

    def tolerances(self, trace_c):
        """(outer, inner) absolute tolerances for a prior with tr(C_x) = trace_c"""
        outer = self.outer_tolerance if self.outer_tolerance is not None else 1e-8 * trace_c
        inner = self.inner_tolerance if self.inner_tolerance is not None else 1e-12 * trace_c
        return outer, inner

    def to_dict(self):
        return asdict(self)


@dataclass
class IterationRecord:
    iteration: int
    smse_after_a_step: float
    smse_after_W_step: float
    inner_steps_taken: int
    min_eigenvalue_VtV: float
    step_size: float


@dataclass
class IterationTrace:
    """Per outer iteration objective values of one alternating minimization run"""

    initial_smse: float = float('nan')
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def append(self, record):
        self.records.append(record)

    def objective_sequence(self):
        """initial, a-step, W-step, a-step, W-step, ... (non-increasing)"""
        values = [self.initial_smse]
        for record in self.records:
            values.extend([record.smse_after_a_step, record.smse_after_W_step])
        return np.array(values)

    def is_monotone(self, slack=MONOTONE_SLACK):
        return bool(np.all(np.diff(self.objective_sequence()) <= slack))

    @property
    def final_smse(self):
        return self.records[-1].smse_after_W_step if self.records else self.initial_smse

    def to_frame(self):
        columns = [
            'iteration', 'smse_after_a_step', 'smse_after_W_step',
            'inner_steps_taken', 'min_eigenvalue_VtV', 'step_size',
        ]
        return pd.DataFrame([asdict(r) for r in self.records], columns=columns)

    def to_dict(self):
        return {'initial_smse': self.initial_smse, 'records': [asdict(r) for r in self.records]}

    @classmethod
    def from_dict(cls, document):
        return cls(
            initial_smse=float(document['initial_smse']),
            records=[IterationRecord(**r) for r in document['records']],
        )


def _coefficient_system(table, A, W, degree):
    U = np.asarray(W, dtype=float) @ A.matrix
    gram = expected_VtV(table, U, degree)
    rhs = expected_xV(table, U, degree).sum(axis=0)
    return gram, rhs


def _solve_coefficients(gram, rhs):
    a = solve_spd(gram, rhs, what='E[V^T V]')
    residual = np.linalg.norm(gram @ a - rhs) / max(np.linalg.norm(rhs), np.finfo(float).tiny)
    if np.linalg.norm(rhs) > 0 and residual > 1e-9:
        logger.warning(f"coefficient update residual {residual:.3e} above 1e-9")
    return a


def update_coefficients(table, A, W, degree):
    """a = E[V^T V]^(-1) E[V^T x], the exact minimizer of the SMSE for fixed W"""
    gram, rhs = _coefficient_system(table, A, W, degree)
    return _solve_coefficients(gram, rhs)


def gradient_W(table, A, est):
    """d SMSE / dW = (-2 G1 + G2) A^T

    G1_ij = sum_d d a_d E[x_i x_j <u_i,x>^(d-1)] is the gradient of tr C_{x xhat};
    G2_ij = sum_s c_s E[x_j <u_i,x>^s] with c_s = sum_{k+l=s+1} (k+l) a_k a_l is
    the gradient of tr C_xhat, i.e. of E[T(t)^2].
    """
    check_compatible(A, est)
    N, D, a = A.N, est.degree, est.a
    U = est.W @ A.matrix
    unit = np.eye(N, dtype=np.int64)

    G1 = np.zeros((N, N))
    for d in range(1, D + 1):
        if a[d] == 0.0:
            continue
        for i in range(N):
            for j in range(N):
                G1[i, j] += d * a[d] * inner_product_moments(
                    table, U[i], d - 1, extra=unit[i] + unit[j]
                )[0]

    # derivative of T^2: sum_{k,l} (k+l) a_k a_l t^(k+l-1)
    square = np.convolve(a, a)
    G2 = np.zeros((N, N))
    for s in range(2 * D):
        c_s = (s + 1) * square[s + 1]
        if c_s != 0.0:
            G2 += c_s * cross_moments(table, U, s)

    return (-2.0 * G1 + G2) @ A.matrix.T


def finite_difference_gradient(table, A, est, step=1e-5):
    """Central differences of smse over every entry of W"""
    gradient = np.zeros_like(est.W)
    for index in np.ndindex(*est.W.shape):
        forward = est.W.copy()
        backward = est.W.copy()
        forward[index] += step
        backward[index] -= step
        gradient[index] = (
            smse(table, A, est.with_W(forward)) - smse(table, A, est.with_W(backward))
        ) / (2.0 * step)
    return gradient


def _armijo_descent(table, A, est, config, initial_step, inner_tolerance, current=None):
    """Steepest descent on W with Armijo backtracking.

    Returns (W, steps_taken, smse, last accepted step size).
    """
    W = est.W
    value = smse(table, A, est) if current is None else current
    step = initial_step
    last_step = 0.0
    steps = 0

    for _ in range(config.max_inner_steps):
        gradient = gradient_W(table, A, est.with_W(W))
        squared_norm = float(np.sum(gradient ** 2))
        if np.sqrt(squared_norm) <= config.gradient_tolerance:
            break

        accepted = None
        for _ in range(config.max_backtracks):
            candidate = W - step * gradient
            candidate_value = smse(table, A, est.with_W(candidate))
            if candidate_value <= value - config.armijo_c1 * step * squared_norm:
                accepted = (candidate, candidate_value)
                break
            step *= config.armijo_backtrack
        if accepted is None:
            logger.debug(f"Armijo search found no descent step (step {step:.3e})")
            break

        decrease = value - accepted[1]
        W, value = accepted
        steps += 1
        last_step = step
        step *= 2.0
        if decrease < inner_tolerance:
            break

    return W, steps, value, last_step


def descent_step_W(table, A, est, config):
    """Up to max_inner_steps Armijo steps on W; returns (W, steps_taken)"""
    trace_c = prior_covariance(table).trace
    _, inner_tolerance = config.tolerances(trace_c)
    W, steps, _, _ = _armijo_descent(table, A, est, config, config.initial_step, inner_tolerance)
    return W, steps


def alternating_minimize(table, A, degree, config=None):
    """Alternate the exact a-update with Armijo descent on W.

    Starts from a = 0, W = c A^+; returns (SmmseEstimator, IterationTrace).
    """
    config = config or OptimizerConfig()
    if degree < 0:
        raise ConfigError(f"degree must be nonnegative, got {degree}")
    trace_c = prior_covariance(table).trace
    outer_tolerance, inner_tolerance = config.tolerances(trace_c)

    est = SmmseEstimator(config.init_scale * np.linalg.pinv(A.matrix), np.zeros(degree + 1))
    value = smse(table, A, est)
    trace = IterationTrace(initial_smse=value)
    step = config.initial_step
    logger.info(
        f"alternating minimization: N={A.N}, M={A.M}, D={degree}, "
        f"p={table.p.to_list()}, moment order <= {required_order(degree)}"
    )

    for k in range(config.max_outer_iterations):
        gram, rhs = _coefficient_system(table, A, est.W, degree)
        min_eigenvalue = float(np.linalg.eigvalsh(gram)[0])
        if min_eigenvalue < 0.0:
            logger.warning(f"iteration {k}: E[V^T V] has eigenvalue {min_eigenvalue:.3e} < 0")

        candidate = est.with_a(_solve_coefficients(gram, rhs))
        candidate_value = smse(table, A, candidate)
        if candidate_value <= value + MONOTONE_SLACK:
            est, value_a = candidate, candidate_value
        else:
            logger.warning(
                f"iteration {k}: a-update raised SMSE {value:.6e} -> {candidate_value:.6e}, keeping a"
            )
            value_a = value

        W, steps, value_w, accepted_step = _armijo_descent(
            table, A, est, config, step, inner_tolerance, current=value_a
        )
        est = est.with_W(W)
        if accepted_step > 0.0:
            step = 2.0 * accepted_step

        trace.append(IterationRecord(
            iteration=k,
            smse_after_a_step=value_a,
            smse_after_W_step=value_w,
            inner_steps_taken=steps,
            min_eigenvalue_VtV=min_eigenvalue,
            step_size=accepted_step,
        ))
        logger.debug(
            f"iteration {k}: smse a-step {value_a:.8e}, W-step {value_w:.8e}, "
            f"{steps} inner steps, step {accepted_step:.3e}"
        )

        decrease = value - value_w
        value = value_w
        if decrease < outer_tolerance:
            break

    logger.info(
        f"alternating minimization finished after {len(trace)} iterations: "
        f"SMSE {value:.8e} (NMSE {value / trace_c:.6f})"
    )
    return est, trace
