import numpy as np
import pytest

from components.estimators import SensingMatrix
from components.matrices import MatrixFamily, MatrixSpec, build
from components.moments import CharacteristicVector, MomentTable
from components.optimizer import OptimizerConfig
from utils.config import ExperimentConfig


@pytest.fixture
def disk_table():
    """Uniform prior on the unit disk, E[x_1^2] = 1/4"""
    return MomentTable([2.0, 2.0])


@pytest.fixture
def etf():
    return build(MatrixSpec(MatrixFamily.EQUIANGULAR_TIGHT_FRAME, 3, 6))


@pytest.fixture
def quick_optimizer():
    return OptimizerConfig(max_outer_iterations=10, max_inner_steps=30)


@pytest.fixture
def small_instance():
    """N=4, M=2, D=3, p=0.8 isotropic with fixed random A, W and a"""
    rng = np.random.default_rng(2024)
    table = MomentTable(CharacteristicVector.isotropic(0.8, 4))
    A = SensingMatrix(rng.standard_normal((2, 4)))
    W = rng.standard_normal((4, 2))
    a = np.array([0.0, 0.8, 0.1, -0.3])
    return table, A, W, a


@pytest.fixture
def tiny_experiment(tmp_path):
    """One matrix, two p values, small degree and sample budget"""
    return ExperimentConfig(
        matrices=[MatrixSpec(MatrixFamily.EQUIANGULAR_TIGHT_FRAME, 3, 6)],
        p_grid=[1.0, 2.0],
        degree=3,
        optimizer=OptimizerConfig(max_outer_iterations=8, max_inner_steps=20),
        mc_samples=2000,
        output_dir=str(tmp_path / 'results'),
        lut_entries=32,
    )
