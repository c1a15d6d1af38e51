"""
SMMSE Toolkit - Basis Pursuit Baseline
======================================
min ||x||_1 subject to A x = y, solved by ADMM or, for small N, exactly by
enumerating the C(N, M) candidate supports of a basic optimal solution.
"""

import itertools
import logging
from dataclasses import asdict, dataclass

import numpy as np

from components.errors import (
    ConfigError,
    DimensionMismatchError,
    InfeasibleError,
    IterationLimitError,
)
from components.estimators import solve_spd

logger = logging.getLogger(__name__)

VERTEX_SOLVER_MAX_N = 12
SUPPORT_CONDITION_LIMIT = 1e12


@dataclass
class BasisPursuitConfig:
    max_iterations: int = 100_000
    rho: float = 1.0
    primal_tolerance: float = 1e-10
    dual_tolerance: float = 1e-10
    method: str = 'auto'

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ConfigError("max_iterations must be positive")
        if self.rho <= 0 or self.primal_tolerance <= 0 or self.dual_tolerance <= 0:
            raise ConfigError("rho and tolerances must be positive")
        if self.method not in ('admm', 'vertex', 'auto'):
            raise ConfigError(f"method must be 'admm', 'vertex' or 'auto', got {self.method!r}")

    def to_dict(self):
        return asdict(self)


def _matrix(A):
    return np.asarray(getattr(A, 'matrix', A), dtype=float)


def soft_threshold(v, threshold):
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


def _check_feasible(matrix, y, particular):
    residual = np.linalg.norm(matrix @ particular - y)
    if residual > 1e-8 * (1.0 + np.linalg.norm(y)):
        raise InfeasibleError(f"y is not in the range of A (residual {residual:.3e})")


def admm_basis_pursuit(A, y, config):
    """ADMM splitting x = z with x on the affine set {A x = y} and z carrying ||.||_1"""
    matrix = _matrix(A)
    y = np.asarray(y, dtype=float)
    N = matrix.shape[1]

    # A^T (A A^T)^(-1) and the projector onto null(A)
    pseudo_inverse = matrix.T @ solve_spd(matrix @ matrix.T, np.eye(matrix.shape[0]), what='A A^T')
    null_projector = np.eye(N) - pseudo_inverse @ matrix
    particular = pseudo_inverse @ y
    _check_feasible(matrix, y, particular)

    x = particular.copy()
    z = x.copy()
    u = np.zeros(N)
    primal = dual = np.inf

    for iteration in range(1, int(config.max_iterations) + 1):
        x = null_projector @ (z - u) + particular
        z_previous = z
        z = soft_threshold(x + u, 1.0 / config.rho)
        u = u + x - z

        primal = np.linalg.norm(x - z)
        dual = config.rho * np.linalg.norm(z - z_previous)
        if (primal <= config.primal_tolerance * (1.0 + max(np.linalg.norm(x), np.linalg.norm(z)))
                and dual <= config.dual_tolerance * (1.0 + config.rho * np.linalg.norm(u))):
            logger.debug(f"ADMM converged in {iteration} iterations")
            return x

    raise IterationLimitError("ADMM basis pursuit did not converge", config.max_iterations, primal, dual)


def vertex_enumeration_batch(A, Y):
    """Exact basis pursuit for every column of Y by support enumeration.

    A basic optimal solution has at most M nonzeros, so it is the minimum-l1
    solution of A_S x_S = y over the M-subsets S with invertible A_S.
    """
    matrix = _matrix(A)
    Y = np.asarray(Y, dtype=float)
    M, N = matrix.shape
    if Y.ndim != 2 or Y.shape[0] != M:
        raise DimensionMismatchError(f"measurements have shape {Y.shape}, expected ({M}, K)")

    best = np.zeros((N, Y.shape[1]))
    best_norm = np.full(Y.shape[1], np.inf)
    for support in itertools.combinations(range(N), M):
        columns = matrix[:, support]
        if np.linalg.cond(columns) > SUPPORT_CONDITION_LIMIT:
            continue
        coefficients = np.linalg.solve(columns, Y)
        norms = np.abs(coefficients).sum(axis=0)
        better = norms < best_norm
        if np.any(better):
            best[:, better] = 0.0
            best[np.ix_(support, np.flatnonzero(better))] = coefficients[:, better]
            best_norm[better] = norms[better]

    if np.any(~np.isfinite(best_norm)):
        raise InfeasibleError("no invertible support found for some measurements")
    return best


def vertex_enumeration(A, y):
    y = np.asarray(y, dtype=float)
    matrix = _matrix(A)
    particular = matrix.T @ np.linalg.lstsq(matrix @ matrix.T, y, rcond=None)[0]
    _check_feasible(matrix, y, particular)
    return vertex_enumeration_batch(matrix, y[:, None])[:, 0]


def _use_vertex_solver(N, config):
    if config.method == 'vertex':
        return True
    return config.method == 'auto' and N <= VERTEX_SOLVER_MAX_N


def l1_minimize(A, y, config=None):
    """x_hat in argmin ||x||_1 subject to A x = y"""
    config = config or BasisPursuitConfig()
    matrix = _matrix(A)
    y = np.asarray(y, dtype=float)
    if y.shape != (matrix.shape[0],):
        raise DimensionMismatchError(f"measurement has shape {y.shape}, expected ({matrix.shape[0]},)")
    if _use_vertex_solver(matrix.shape[1], config):
        return vertex_enumeration(matrix, y)
    return admm_basis_pursuit(matrix, y, config)


def l1_minimize_batch(A, Y, config=None):
    """l1_minimize over the columns of Y"""
    config = config or BasisPursuitConfig()
    matrix = _matrix(A)
    Y = np.asarray(Y, dtype=float)
    if _use_vertex_solver(matrix.shape[1], config):
        return vertex_enumeration_batch(matrix, Y)
    return np.column_stack([admm_basis_pursuit(matrix, y, config) for y in Y.T])
