import numpy as np
import pytest
from scipy.optimize import linprog

from components.baselines import (
    BasisPursuitConfig,
    admm_basis_pursuit,
    l1_minimize,
    l1_minimize_batch,
    soft_threshold,
    vertex_enumeration,
    vertex_enumeration_batch,
)
from components.errors import ConfigError, DimensionMismatchError, InfeasibleError, IterationLimitError

ADMM = BasisPursuitConfig(method='admm')


def linprog_l1(A, y):
    """min 1^T (u + v) subject to A (u - v) = y, u, v >= 0"""
    M, N = A.shape
    result = linprog(
        np.ones(2 * N),
        A_eq=np.hstack([A, -A]),
        b_eq=y,
        bounds=[(0, None)] * (2 * N),
        method='highs',
    )
    assert result.status == 0
    return result.x[:N] - result.x[N:]


def test_soft_threshold():
    np.testing.assert_array_equal(
        soft_threshold(np.array([-2.0, -0.5, 0.0, 0.5, 2.0]), 1.0),
        [-1.0, 0.0, 0.0, 0.0, 1.0],
    )


@pytest.mark.parametrize("config", [ADMM, BasisPursuitConfig(method='vertex')])
def test_zero_measurement_gives_zero(etf, config):
    np.testing.assert_allclose(l1_minimize(etf, np.zeros(3), config), 0.0, atol=1e-12)


@pytest.mark.parametrize("config", [ADMM, BasisPursuitConfig(method='vertex'), BasisPursuitConfig()])
def test_etf_recovers_one_sparse_vector(etf, config):
    x = np.zeros(6)
    x[0] = 1.0
    np.testing.assert_allclose(l1_minimize(etf, etf.matrix @ x, config), x, atol=1e-6)


@pytest.mark.parametrize("seed", range(50))
def test_solvers_agree_with_vertex_oracle(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 6))
    y = A @ rng.standard_normal(6)
    oracle = np.abs(vertex_enumeration(A, y)).sum()

    x_admm = admm_basis_pursuit(A, y, ADMM)
    assert np.linalg.norm(A @ x_admm - y) <= 1e-8 * (1.0 + np.linalg.norm(y))
    assert np.abs(x_admm).sum() == pytest.approx(oracle, rel=1e-6)
    assert np.abs(linprog_l1(A, y)).sum() == pytest.approx(oracle, rel=1e-6)


def test_batch_solvers_match_single_solves(etf):
    rng = np.random.default_rng(3)
    Y = etf.matrix @ rng.standard_normal((6, 12))
    batch = vertex_enumeration_batch(etf, Y)
    np.testing.assert_allclose(batch, np.column_stack([vertex_enumeration(etf.matrix, y) for y in Y.T]))
    admm = l1_minimize_batch(etf, Y[:, :3], ADMM)
    np.testing.assert_allclose(np.abs(admm).sum(axis=0), np.abs(batch[:, :3]).sum(axis=0), rtol=1e-6)


def test_iteration_limit(etf):
    y = etf.matrix @ np.array([0.3, -1.0, 0.2, 0.0, 0.5, 0.1])
    with pytest.raises(IterationLimitError) as info:
        admm_basis_pursuit(etf, y, BasisPursuitConfig(max_iterations=3, method='admm'))
    assert info.value.iterations == 3
    assert info.value.primal_residual > 0


def test_measurement_shape_is_checked(etf):
    with pytest.raises(DimensionMismatchError):
        l1_minimize(etf, np.ones(4))
    with pytest.raises(DimensionMismatchError):
        vertex_enumeration_batch(etf, np.ones((4, 2)))


@pytest.mark.parametrize("kwargs", [
    dict(method='simplex'),
    dict(rho=0.0),
    dict(max_iterations=0),
    dict(primal_tolerance=-1e-9),
])
def test_basis_pursuit_config_validation(kwargs):
    with pytest.raises(ConfigError):
        BasisPursuitConfig(**kwargs)


def test_measurement_outside_range_is_infeasible():
    # rank one: the range is spanned by (1, 2)
    A = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]])
    y = np.array([1.0, 0.0])
    with pytest.raises(InfeasibleError):
        vertex_enumeration(A, y)
    with pytest.raises(InfeasibleError):
        l1_minimize(A, y)
    with pytest.raises(InfeasibleError):
        vertex_enumeration_batch(A, y[:, None])
