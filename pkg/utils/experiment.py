"""
SMMSE Toolkit - Experiment Harness
==================================
NMSE-vs-p sweep: one trained estimator per (sensing matrix, p) cell,
evaluated in closed form, by Monte-Carlo, against the LMMSE estimator and
against l1 minimization, with every artifact written to an output directory.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from components.baselines import l1_minimize, l1_minimize_batch
from components.errors import DomainError, SmmseError
from components.estimators import (
    apply,
    export_lut,
    lmmse_operator,
    lmse,
    prior_covariance,
    smse,
)
from components.matrices import build
from components.moments import CharacteristicVector, MomentTable
from components.optimizer import alternating_minimize
from components.sampling import BallSampler, monte_carlo_mse, sample_batch
from utils.config import dump_experiment_config, resolve_output_dir, resolve_threads
from utils.persistence import (
    read_json,
    save_estimator,
    save_lut,
    save_matrix,
    save_trace,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    'family', 'p', 'nmse_smmse', 'nmse_smmse_mc', 'nmse_mc_stderr',
    'nmse_lmmse', 'nmse_l1', 'nmse_l1_stderr',
]
TIMING_SAMPLES = 200


@dataclass
class ExperimentReport:
    family: str
    p: float
    nmse_closed_form: float
    nmse_monte_carlo: tuple
    nmse_lmmse: float
    nmse_l1: tuple
    trace: object
    estimator: object
    matrix: object
    trace_c: float
    lut: pd.DataFrame = None
    timing: dict = field(default_factory=dict)

    @property
    def name(self):
        return cell_name(self.family, self.p)

    @property
    def gain_over_lmmse(self):
        return 1.0 - self.nmse_closed_form / self.nmse_lmmse if self.nmse_lmmse > 0 else 0.0


@dataclass
class CellFailure:
    family: str
    p: float
    error_type: str
    message: str

    def to_dict(self):
        return {'family': self.family, 'p': self.p, 'error_type': self.error_type, 'message': self.message}


@dataclass
class SweepResult:
    reports: list
    failures: list
    output_dir: Path = None

    @property
    def ok(self):
        return not self.failures


def nmse(epsilon, C):
    """epsilon / tr(C_x)"""
    trace_c = C.trace
    if trace_c <= 0:
        raise DomainError("NMSE is undefined for tr(C_x) = 0")
    return float(epsilon) / trace_c


def cell_name(family, p):
    return f"{family}_{p:g}"


def family_labels(specs):
    """Display label per spec; repeated families are told apart by seed"""
    counts = {}
    for spec in specs:
        counts[spec.label] = counts.get(spec.label, 0) + 1
    return [spec.label if counts[spec.label] == 1 else f"{spec.label}-s{spec.seed}" for spec in specs]


def cell_seed(seed, cell_index):
    return int(np.random.SeedSequence([int(seed), int(cell_index)]).generate_state(1, dtype=np.uint64)[0])


def _measure_timing(A, est, Y, basis_pursuit):
    """Mean wall-clock seconds per estimator application and per l1 solve"""
    started = time.perf_counter()
    for y in Y.T:
        apply(est, y)
    apply_seconds = (time.perf_counter() - started) / Y.shape[1]

    started = time.perf_counter()
    for y in Y.T:
        l1_minimize(A, y, basis_pursuit)
    l1_seconds = (time.perf_counter() - started) / Y.shape[1]
    return {'apply_seconds': apply_seconds, 'l1_seconds': l1_seconds}


def run_cell(A, family, p, config, seed):
    """Train and evaluate one (matrix, p) cell"""
    started = time.perf_counter()
    logger.info(f"cell {cell_name(family, p)}: training (D={config.degree})")
    p_vector = CharacteristicVector.isotropic(p, A.N)
    table = MomentTable(p_vector)
    C = prior_covariance(table)

    est, trace = alternating_minimize(table, A, config.degree, config.optimizer)
    closed_form = nmse(smse(table, A, est), C)
    linear = nmse(lmse(lmmse_operator(A, C), A, C), C)

    smmse_sampler, l1_sampler = BallSampler(p_vector, rng_seed=seed).spawn(2)
    mean, error = monte_carlo_mse(smmse_sampler, A, est, config.mc_samples)
    monte_carlo = (mean / C.trace, error / C.trace)

    l1_result = None
    timing = {}
    if config.include_l1:
        X = sample_batch(l1_sampler, config.mc_samples).T
        Y = A.matrix @ X
        squared = np.sum((X - l1_minimize_batch(A, Y, config.basis_pursuit)) ** 2, axis=0)
        l1_result = (
            float(squared.mean()) / C.trace,
            float(squared.std(ddof=1) / np.sqrt(squared.size)) / C.trace,
        )
        timing = _measure_timing(A, est, Y[:, :TIMING_SAMPLES], config.basis_pursuit)

    lut = export_lut(est, A, p_vector, config.lut_entries)
    logger.info(
        f"cell {cell_name(family, p)}: NMSE {closed_form:.6f} (MC {monte_carlo[0]:.6f} "
        f"+- {monte_carlo[1]:.6f}), LMMSE {linear:.6f}, {time.perf_counter() - started:.1f}s"
    )
    return ExperimentReport(
        family=family,
        p=p,
        nmse_closed_form=closed_form,
        nmse_monte_carlo=monte_carlo,
        nmse_lmmse=linear,
        nmse_l1=l1_result,
        trace=trace,
        estimator=est,
        matrix=A,
        trace_c=C.trace,
        lut=lut,
        timing=timing,
    )


def results_frame(reports):
    rows = []
    for report in reports:
        l1_mean, l1_error = report.nmse_l1 if report.nmse_l1 is not None else (np.nan, np.nan)
        rows.append({
            'family': report.family,
            'p': report.p,
            'nmse_smmse': report.nmse_closed_form,
            'nmse_smmse_mc': report.nmse_monte_carlo[0],
            'nmse_mc_stderr': report.nmse_monte_carlo[1],
            'nmse_lmmse': report.nmse_lmmse,
            'nmse_l1': l1_mean,
            'nmse_l1_stderr': l1_error,
        })
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def write_artifacts(output_dir, config, reports, failures):
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    dump_experiment_config(output_dir / 'config.json', config)
    write_csv(output_dir / 'results.csv', results_frame(reports))
    for report in reports:
        p_vector = CharacteristicVector.isotropic(report.p, report.matrix.N)
        save_trace(output_dir / f"trace_{report.name}.csv", report.trace)
        save_estimator(output_dir / f"estimator_{report.name}.json", report.estimator, p_vector)
        save_lut(output_dir / f"lut_{report.name}.csv", report.lut)
        save_matrix(output_dir / f"matrix_{report.family}.json", report.matrix)
    write_json(output_dir / 'failures.json', [f.to_dict() for f in failures])
    write_json(
        output_dir / 'timing.json',
        {report.name: report.timing for report in reports if report.timing},
    )
    logger.info(f"wrote {len(reports)} cells and {len(failures)} failures to {output_dir}")


def run(config, output_dir=None, threads=None, write=True):
    """Run the full sweep; per-cell failures are collected, not raised"""
    output_dir = resolve_output_dir(config, output_dir)
    threads = resolve_threads(threads)
    labels = family_labels(config.matrices)

    cells = []
    failures = []
    for spec, label in zip(config.matrices, labels):
        try:
            A = build(spec)
        except SmmseError as exc:
            logger.warning(f"matrix {label} failed: {exc}")
            failures.extend(CellFailure(label, p, type(exc).__name__, str(exc)) for p in config.p_grid)
            continue
        cells.extend((A, label, p) for p in config.p_grid)

    def evaluate(indexed_cell):
        index, (A, label, p) = indexed_cell
        try:
            return run_cell(A, label, p, config, cell_seed(config.seed, index))
        except SmmseError as exc:
            logger.warning(f"cell {cell_name(label, p)} failed: {exc}")
            return CellFailure(label, p, type(exc).__name__, str(exc))
        except Exception as exc:
            logger.exception(f"cell {cell_name(label, p)} raised {type(exc).__name__}")
            return CellFailure(label, p, type(exc).__name__, str(exc))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        outcomes = list(pool.map(evaluate, enumerate(cells)))

    reports = [o for o in outcomes if isinstance(o, ExperimentReport)]
    failures.extend(o for o in outcomes if isinstance(o, CellFailure))
    if write:
        write_artifacts(output_dir, config, reports, failures)
    return SweepResult(reports=reports, failures=failures, output_dir=output_dir)


def load_sweep(output_dir):
    """Read a results directory back: results, traces and LUTs keyed by cell name"""
    output_dir = Path(output_dir)
    results = pd.read_csv(output_dir / 'results.csv')
    traces, luts = {}, {}
    for _, row in results.iterrows():
        name = cell_name(row['family'], row['p'])
        trace_path = output_dir / f"trace_{name}.csv"
        lut_path = output_dir / f"lut_{name}.csv"
        if trace_path.exists():
            traces[name] = pd.read_csv(trace_path)
        if lut_path.exists():
            luts[name] = pd.read_csv(lut_path)
    failures_path = output_dir / 'failures.json'
    timing_path = output_dir / 'timing.json'
    return {
        'results': results,
        'traces': traces,
        'luts': luts,
        'failures': read_json(failures_path) if failures_path.exists() else [],
        'timing': read_json(timing_path) if timing_path.exists() else {},
    }


def sweep_bundle(result):
    """The load_sweep layout built from an in-memory SweepResult"""
    return {
        'results': results_frame(result.reports),
        'traces': {report.name: report.trace.to_frame() for report in result.reports},
        'luts': {report.name: report.lut for report in result.reports},
        'failures': [failure.to_dict() for failure in result.failures],
        'timing': {report.name: report.timing for report in result.reports if report.timing},
    }
