import json
import logging

import pytest

from components.errors import ConfigError
from components.matrices import MatrixFamily
from utils.config import (
    DEFAULT_P_GRID,
    ENV_OUTPUT_DIR,
    ENV_THREADS,
    ExperimentConfig,
    dump_experiment_config,
    experiment_config_from_dict,
    load_experiment_config,
    resolve_output_dir,
    resolve_threads,
    setup_logging,
)


def test_defaults():
    config = ExperimentConfig()
    assert config.p_grid == DEFAULT_P_GRID
    assert config.degree == 9
    assert [spec.family for spec in config.matrices] == list(MatrixFamily)
    assert all((spec.M, spec.N) == (3, 6) for spec in config.matrices)


def test_config_file_roundtrip(tmp_path, tiny_experiment):
    path = dump_experiment_config(tmp_path / 'config.json', tiny_experiment)
    assert load_experiment_config(path) == tiny_experiment


def test_partial_document_fills_defaults():
    config = experiment_config_from_dict({
        'p_grid': [0.5, 1],
        'optimizer': {'max_outer_iterations': 5},
        'matrices': [{'family': 'NormalizedGaussian', 'M': 2, 'N': 4, 'seed': 3}],
    })
    assert config.p_grid == [0.5, 1.0]
    assert config.optimizer.max_outer_iterations == 5
    assert config.optimizer.max_inner_steps == 200
    assert config.matrices[0].family is MatrixFamily.NORMALIZED_GAUSSIAN
    assert config.basis_pursuit.method == 'auto'


@pytest.mark.parametrize("document", [
    {'degre': 9},
    {'optimizer': {'max_outer': 5}},
    {'matrices': [{'family': 'ETF', 'M': 3, 'N': 6}]},
    {'matrices': [{'family': 'NormalizedGaussian', 'M': 3, 'N': 6, 'colour': 'red'}]},
    {'basis_pursuit': {'method': 'simplex'}},
    {'matrices': []},
    {'p_grid': []},
    {'p_grid': [1.0, 0.5]},
    {'p_grid': [-0.5, 1.0]},
    {'degree': 0},
    {'mc_samples': 999},
    {'seed': -1},
    {'lut_entries': 1},
    {'optimizer': [1, 2]},
])
def test_invalid_documents_are_rejected(document):
    with pytest.raises(ConfigError):
        experiment_config_from_dict(document)


def test_output_dir_resolution(monkeypatch, tiny_experiment):
    monkeypatch.delenv(ENV_OUTPUT_DIR, raising=False)
    assert str(resolve_output_dir(tiny_experiment)) == tiny_experiment.output_dir
    monkeypatch.setenv(ENV_OUTPUT_DIR, '/tmp/from-env')
    assert str(resolve_output_dir(tiny_experiment)) == '/tmp/from-env'
    assert str(resolve_output_dir(tiny_experiment, 'flag')) == 'flag'


def test_thread_resolution(monkeypatch):
    monkeypatch.delenv(ENV_THREADS, raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv(ENV_THREADS, '4')
    assert resolve_threads() == 4
    assert resolve_threads(2) == 2
    monkeypatch.setenv(ENV_THREADS, 'many')
    with pytest.raises(ConfigError):
        resolve_threads()
    with pytest.raises(ConfigError):
        resolve_threads(0)


def test_setup_logging_level(monkeypatch):
    monkeypatch.setenv('SMMSE_LOG_LEVEL', 'warning')
    setup_logging()
    assert logging.getLogger().level == logging.WARNING
    setup_logging('debug')
    assert logging.getLogger().level == logging.DEBUG
    setup_logging('INFO')


def test_config_document_is_plain_json(tiny_experiment):
    document = json.loads(json.dumps(tiny_experiment.to_dict()))
    assert document['matrices'][0]['family'] == 'EquiangularTightFrame'
    assert experiment_config_from_dict(document) == tiny_experiment
