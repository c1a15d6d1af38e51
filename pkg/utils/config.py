"""
SMMSE Toolkit - Configuration
=============================
Experiment configuration (a single JSON document), environment overrides
and logging setup.
"""

import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from components.baselines import BasisPursuitConfig
from components.errors import ConfigError
from components.matrices import MatrixFamily, MatrixSpec
from components.optimizer import OptimizerConfig
from utils.persistence import read_json, write_json

ENV_OUTPUT_DIR = 'SMMSE_OUTPUT_DIR'
ENV_THREADS = 'SMMSE_THREADS'
ENV_LOG_LEVEL = 'SMMSE_LOG_LEVEL'

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

DEFAULT_P_GRID = [0.4, 0.6, 0.8, 1.0, 1.2, 1.6, 2.0]


def default_matrix_specs():
    return [
        MatrixSpec(MatrixFamily.EQUIANGULAR_TIGHT_FRAME, 3, 6),
        MatrixSpec(MatrixFamily.SUBSAMPLED_ORTHOGONAL, 3, 6),
        MatrixSpec(MatrixFamily.NORMALIZED_GAUSSIAN, 3, 6),
    ]


@dataclass
class ExperimentConfig:
    """One NMSE-vs-p sweep over a set of sensing matrices"""

    matrices: list = field(default_factory=default_matrix_specs)
    p_grid: list = field(default_factory=lambda: list(DEFAULT_P_GRID))
    degree: int = 9
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    mc_samples: int = 100_000
    seed: int = 0
    include_l1: bool = True
    output_dir: str = 'results'
    lut_entries: int = 256
    basis_pursuit: BasisPursuitConfig = field(default_factory=BasisPursuitConfig)

    def __post_init__(self):
        if not self.matrices:
            raise ConfigError("at least one matrix spec is required")
        if not self.p_grid:
            raise ConfigError("p_grid must not be empty")
        self.p_grid = [float(p) for p in self.p_grid]
        if any(p <= 0 for p in self.p_grid):
            raise ConfigError(f"p values must be positive, got {self.p_grid}")
        if self.p_grid != sorted(self.p_grid):
            raise ConfigError(f"p_grid must be sorted ascending, got {self.p_grid}")
        if int(self.degree) < 1:
            raise ConfigError(f"degree must be >= 1, got {self.degree}")
        if int(self.mc_samples) < 1000:
            raise ConfigError(f"mc_samples must be >= 1000, got {self.mc_samples}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if int(self.lut_entries) < 2:
            raise ConfigError("lut_entries must be >= 2")
        self.degree, self.mc_samples, self.seed = int(self.degree), int(self.mc_samples), int(self.seed)
        self.lut_entries = int(self.lut_entries)

    def to_dict(self):
        document = asdict(self)
        document['matrices'] = [spec.to_dict() for spec in self.matrices]
        return document


def _build(cls, document, section):
    if not isinstance(document, dict):
        raise ConfigError(f"{section} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = set(document) - known
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")
    try:
        return cls(**document)
    except TypeError as exc:
        raise ConfigError(f"invalid {section}: {exc}") from None


def experiment_config_from_dict(document):
    document = dict(document)
    if 'matrices' in document:
        document['matrices'] = [_build(MatrixSpec, spec, 'matrix spec') for spec in document['matrices']]
    if 'optimizer' in document:
        document['optimizer'] = _build(OptimizerConfig, document['optimizer'], 'optimizer')
    if 'basis_pursuit' in document:
        document['basis_pursuit'] = _build(BasisPursuitConfig, document['basis_pursuit'], 'basis_pursuit')
    return _build(ExperimentConfig, document, 'experiment config')


def load_experiment_config(path):
    return experiment_config_from_dict(read_json(path))


def dump_experiment_config(path, config):
    return write_json(path, config.to_dict())


def resolve_output_dir(config, override=None):
    """CLI flag, then SMMSE_OUTPUT_DIR, then the config value"""
    return Path(override or os.environ.get(ENV_OUTPUT_DIR) or config.output_dir)


def resolve_threads(override=None):
    value = override if override is not None else os.environ.get(ENV_THREADS, 1)
    try:
        threads = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"thread count must be an integer, got {value!r}") from None
    if threads < 1:
        raise ConfigError(f"thread count must be positive, got {threads}")
    return threads


def setup_logging(level=None):
    level = level or os.environ.get(ENV_LOG_LEVEL, 'INFO')
    logging.basicConfig(level=str(level).upper(), format=LOG_FORMAT, force=True)
