"""
SMMSE Toolkit - Persistence
===========================
JSON and CSV codecs for estimators, traces, LUTs and sensing matrices.
"""

import json
import logging
from pathlib import Path

import pandas as pd

from components.estimators import SmmseEstimator
from components.matrices import matrix_from_dict, matrix_to_dict
from components.optimizer import IterationTrace

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = '%.12g'


def write_json(path, document):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + '\n')
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, frame):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    return path


def save_estimator(path, est, p):
    return write_json(path, est.to_dict(p))


def load_estimator(path):
    """Returns (SmmseEstimator, CharacteristicVector)"""
    return SmmseEstimator.from_dict(read_json(path))


def save_trace(path, trace):
    """Trace as CSV (one row per outer iteration); a .json path writes the JSON form"""
    if Path(path).suffix == '.json':
        return write_json(path, trace.to_dict())
    return write_csv(path, trace.to_frame())


def load_trace(path):
    path = Path(path)
    if path.suffix == '.json':
        return IterationTrace.from_dict(read_json(path))
    raise ValueError(f"traces are reloaded from JSON, got {path}")


def save_lut(path, lut):
    """Two-column CSV with header t,T"""
    return write_csv(path, lut[['t', 'T']])


def load_lut(path):
    return pd.read_csv(path)


def save_matrix(path, A):
    return write_json(path, matrix_to_dict(A))


def load_matrix(path):
    return matrix_from_dict(read_json(path))
