"""
SMMSE Toolkit - Linear and Structured Nonlinear Estimators
==========================================================
LMMSE operator, the structured estimator x_hat = T(W y) with one shared
polynomial T, and closed-form Bayesian MSE of both.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.linalg

from components.errors import DimensionMismatchError, DomainError, SingularityError
from components.moments import as_characteristic_vector, inner_product_moments

logger = logging.getLogger(__name__)

ESTIMATOR_FORMAT_VERSION = 1
RANK_TOLERANCE = 1e-10
MAX_CONDITION = 1e12
NEGATIVE_MSE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """Measurement operator A (M x N, full row rank) of y = A x"""

    matrix: np.ndarray
    family: str = 'custom'
    approximate: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise DimensionMismatchError(f"sensing matrix must be 2-D, got shape {matrix.shape}")
        rows, cols = matrix.shape
        if rows > cols:
            raise DimensionMismatchError(f"sensing matrix must satisfy M <= N, got {rows}x{cols}")
        if not np.all(np.isfinite(matrix)):
            raise DomainError("sensing matrix has non-finite entries")
        singular_values = np.linalg.svd(matrix, compute_uv=False)
        if singular_values[-1] <= RANK_TOLERANCE * singular_values[0]:
            raise SingularityError(
                "sensing matrix is not full row rank",
                condition=singular_values[0] / max(singular_values[-1], np.finfo(float).tiny),
            )
        if rows == cols:
            logger.warning(f"square {rows}x{cols} sensing matrix: no dimensionality reduction")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    @property
    def M(self):
        return self.matrix.shape[0]

    @property
    def N(self):
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True, eq=False)
class PriorCovariance:
    """C_x = E[x x^T] for x ~ U(B_p)"""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"covariance must be square, got shape {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-14):
            raise DomainError("covariance must be symmetric")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    @property
    def trace(self):
        return float(np.trace(self.matrix))

    @property
    def dimension(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SmmseEstimator:
    """Trained pair (W, a): x_hat = T(W y) with T(t) = sum_d a_d t^d"""

    W: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        a = np.array(self.a, dtype=float).reshape(-1)
        if W.ndim != 2:
            raise DimensionMismatchError(f"W must be 2-D, got shape {W.shape}")
        if a.size < 1:
            raise DimensionMismatchError("coefficient vector needs at least a_0")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(a))):
            raise DomainError("estimator parameters must be finite")
        W.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, 'W', W)
        object.__setattr__(self, 'a', a)

    @property
    def degree(self):
        return self.a.size - 1

    @property
    def N(self):
        return self.W.shape[0]

    @property
    def M(self):
        return self.W.shape[1]

    def with_W(self, W):
        return SmmseEstimator(W, self.a)

    def with_a(self, a):
        return SmmseEstimator(self.W, a)

    def to_dict(self, p):
        p = as_characteristic_vector(p)
        return {
            'version': ESTIMATOR_FORMAT_VERSION,
            'M': self.M,
            'N': self.N,
            'D': self.degree,
            'p': p.to_list(),
            'W': self.W.reshape(-1).tolist(),
            'a': self.a.tolist(),
        }

    def to_json(self, p, indent=2):
        return json.dumps(self.to_dict(p), indent=indent)

    @classmethod
    def from_dict(cls, document):
        """Returns (estimator, characteristic vector)"""
        version = document.get('version')
        if version != ESTIMATOR_FORMAT_VERSION:
            raise DomainError(f"unsupported estimator format version {version}")
        M, N, D = int(document['M']), int(document['N']), int(document['D'])
        W = np.array(document['W'], dtype=float)
        a = np.array(document['a'], dtype=float)
        if W.size != N * M or a.size != D + 1:
            raise DimensionMismatchError(
                f"estimator document inconsistent: |W|={W.size} for {N}x{M}, |a|={a.size} for D={D}"
            )
        p = as_characteristic_vector(document['p'])
        if p.dimension != N:
            raise DimensionMismatchError(f"p has {p.dimension} entries, estimator has N={N}")
        return cls(W.reshape(N, M), a), p

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def check_compatible(A, est):
    if est.W.shape != (A.N, A.M):
        raise DimensionMismatchError(
            f"W has shape {est.W.shape}, sensing matrix needs ({A.N}, {A.M})"
        )


def solve_spd(matrix, rhs, what='system'):
    """Solve a symmetric positive-definite system by Cholesky with one jitter retry.

    The system is equilibrated by its diagonal first; moment matrices of
    polynomial features span many orders of magnitude.
    """
    matrix = np.asarray(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    diag = np.diag(matrix).copy()
    if np.any(diag <= 0) or not np.all(np.isfinite(matrix)):
        raise SingularityError(f"{what} is not positive definite", condition=np.inf)
    scale = 1.0 / np.sqrt(diag)
    scaled = matrix * np.outer(scale, scale)
    scaled_rhs = rhs * (scale if rhs.ndim == 1 else scale[:, None])

    try:
        factor = scipy.linalg.cho_factor(scaled, lower=True)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * np.trace(scaled) / scaled.shape[0]
        logger.warning(f"{what}: Cholesky failed, retrying with diagonal jitter {jitter:.3e}")
        try:
            factor = scipy.linalg.cho_factor(scaled + jitter * np.eye(scaled.shape[0]), lower=True)
        except np.linalg.LinAlgError:
            raise SingularityError(
                f"{what} is singular after jitter", condition=np.linalg.cond(scaled)
            ) from None

    solution = scipy.linalg.cho_solve(factor, scaled_rhs)
    return solution * (scale if rhs.ndim == 1 else scale[:, None])


def prior_covariance(table):
    """[C]_ij = E[x^(e_i + e_j)]; off-diagonal entries vanish by odd symmetry"""
    N = table.dimension
    variances = np.array([table.moment(2 * np.eye(N, dtype=int)[i]) for i in range(N)])
    return PriorCovariance(np.diag(variances))


def lmmse_operator(A, C):
    """W = C A^T (A C A^T)^(-1)"""
    if C.dimension != A.N:
        raise DimensionMismatchError(f"covariance is {C.dimension}x{C.dimension}, A has N={A.N}")
    gram = A.matrix @ C.matrix @ A.matrix.T
    condition = np.linalg.cond(gram)
    if not np.isfinite(condition) or condition >= MAX_CONDITION:
        raise SingularityError("A C A^T is numerically singular", condition=condition)

    AC = A.matrix @ C.matrix
    X = solve_spd(gram, AC, what='A C A^T')
    residual = np.linalg.norm(gram @ X - AC) / max(np.linalg.norm(AC), np.finfo(float).tiny)
    if residual > 1e-10:
        logger.warning(f"LMMSE solve residual {residual:.3e} above 1e-10")
    return X.T


def lmse(W, A, C):
    """tr C - 2 tr(W A C) + tr(A^T W^T W A C), clamped at 0 within rounding"""
    W = np.asarray(W, dtype=float)
    if W.shape != (A.N, A.M) or C.dimension != A.N:
        raise DimensionMismatchError(
            f"W {W.shape}, A {A.shape}, C {C.matrix.shape} are inconsistent"
        )
    WA = W @ A.matrix
    value = C.trace - 2.0 * np.trace(WA @ C.matrix) + np.trace(WA.T @ WA @ C.matrix)
    return _clamp_mse(value)


def _clamp_mse(value):
    if value < 0.0:
        if value < -NEGATIVE_MSE_SLACK:
            logger.warning(f"closed-form MSE {value:.3e} below zero beyond rounding slack")
        return 0.0
    return float(value)


def diagonal_moments(table, U, order):
    """E[x_i <u_i, x>^order] for each row i of U"""
    N = table.dimension
    unit = np.eye(N, dtype=np.int64)
    return np.array([
        inner_product_moments(table, U[i], order, extra=unit[i])[0] for i in range(N)
    ])


def cross_moments(table, U, order):
    """N x N matrix with entry (i, j) = E[x_j <u_i, x>^order]"""
    N = table.dimension
    unit = np.eye(N, dtype=np.int64)
    result = np.empty((U.shape[0], N))
    for j in range(N):
        result[:, j] = inner_product_moments(table, U, order, extra=unit[j])
    return result


def power_moment_sums(table, U, max_order):
    """s_k = sum_n E[<u_n, x>^k] for k = 0..max_order (odd k vanish)"""
    sums = np.zeros(max_order + 1)
    for k in range(0, max_order + 1, 2):
        sums[k] = inner_product_moments(table, U, k).sum()
    return sums


def expected_xV(table, U, degree):
    """E[x^T V] entrywise: (i, j) = E[x_i <u_i, x>^(j-1)], j = 1..D+1"""
    U = np.asarray(U, dtype=float)
    return np.column_stack([diagonal_moments(table, U, d) for d in range(degree + 1)])


def expected_VtV(table, U, degree):
    """E[V^T V] entrywise: (i, j) = sum_n E[<u_n, x>^(i+j-2)] (a Hankel matrix)"""
    sums = power_moment_sums(table, np.asarray(U, dtype=float), 2 * degree)
    return scipy.linalg.hankel(sums[:degree + 1], sums[degree:])


def smse(table, A, est):
    """tr C_x - 2 1^T E[x^T V] a + a^T E[V^T V] a"""
    check_compatible(A, est)
    U = est.W @ A.matrix
    trace_c = prior_covariance(table).trace
    cross = expected_xV(table, U, est.degree).sum(axis=0) @ est.a
    quadratic = est.a @ expected_VtV(table, U, est.degree) @ est.a
    return _clamp_mse(trace_c - 2.0 * cross + quadratic)


def lmmse_estimator(table, A, degree=1):
    """The LMMSE operator embedded as an SMMSE estimator with a = e_2"""
    if degree < 1:
        raise DomainError("the identity polynomial needs degree >= 1")
    W = lmmse_operator(A, prior_covariance(table))
    a = np.zeros(degree + 1)
    a[1] = 1.0
    return SmmseEstimator(W, a)


def smmse_gain(table, A, est):
    """Relative MSE reduction of est over the LMMSE estimator"""
    C = prior_covariance(table)
    linear = lmse(lmmse_operator(A, C), A, C)
    if linear <= 0.0:
        return 0.0
    return 1.0 - smse(table, A, est) / linear


def evaluate_polynomial(a, t):
    """Horner evaluation of sum_d a_d t^d, elementwise"""
    t = np.asarray(t, dtype=float)
    result = np.full_like(t, a[-1])
    for coefficient in a[-2::-1]:
        result = result * t + coefficient
    return result


def apply(est, y):
    """x_hat = T(W y)"""
    y = np.asarray(y, dtype=float)
    if y.shape != (est.M,):
        raise DimensionMismatchError(f"measurement has shape {y.shape}, expected ({est.M},)")
    return evaluate_polynomial(est.a, est.W @ y)


def apply_batch(est, Y):
    """apply() over the columns of an M x K measurement matrix"""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != est.M:
        raise DimensionMismatchError(f"measurements have shape {Y.shape}, expected ({est.M}, K)")
    return evaluate_polynomial(est.a, est.W @ Y)


def _dual_norm(U, p):
    """max_i ||u_i||_q with 1/p + 1/q = 1 (q = inf for p <= 1)"""
    if p <= 1.0:
        return float(np.max(np.abs(U)))
    q = p / (p - 1.0)
    return float(np.max(np.sum(np.abs(U) ** q, axis=1) ** (1.0 / q)))


def lut_range(est, A, p):
    """R = sup over x in B_p of ||W A x||_inf

    Isotropic p <= 1: attained at a signed basis vector, R = max_i ||u_i||_inf.
    Isotropic p > 1: Hoelder, R = max_i ||u_i||_q.
    Anisotropic p: B_p lies inside the isotropic ball of exponent max(p), whose
    dual norm bounds R from above.
    """
    p = as_characteristic_vector(p)
    check_compatible(A, est)
    U = est.W @ A.matrix
    if p.is_isotropic:
        return _dual_norm(U, float(p.entries[0]))
    return max(float(np.max(np.abs(U))), _dual_norm(U, float(np.max(p.entries))))


def export_lut(est, A, p, num_entries=256):
    """Uniform grid of (t, T(t)) on [-R, R] as a DataFrame with columns t, T"""
    if num_entries < 2:
        raise DomainError(f"a LUT needs at least 2 entries, got {num_entries}")
    R = lut_range(est, A, p)
    t = np.linspace(-R, R, int(num_entries))
    return pd.DataFrame({'t': t, 'T': evaluate_polynomial(est.a, t)})
