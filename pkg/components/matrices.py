"""
SMMSE Toolkit - Sensing Matrix Families
=======================================
Equiangular tight frame, subsampled orthogonal and row-normalized Gaussian
sensing matrices, with their structural properties re-verified after
construction.
"""

import json
import logging
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
import scipy.fft

from components.errors import ConfigError, ConstructionError, DimensionMismatchError
from components.estimators import SensingMatrix

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (1.0 + np.sqrt(5.0)) / 2.0
ETF_TOLERANCE = 1e-8
ORTHOGONALITY_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-14


class MatrixFamily(str, Enum):
    EQUIANGULAR_TIGHT_FRAME = 'EquiangularTightFrame'
    SUBSAMPLED_ORTHOGONAL = 'SubsampledOrthogonal'
    NORMALIZED_GAUSSIAN = 'NormalizedGaussian'


FAMILY_LABELS = {
    MatrixFamily.EQUIANGULAR_TIGHT_FRAME: 'ETF',
    MatrixFamily.SUBSAMPLED_ORTHOGONAL: 'SubsampledOrthogonal',
    MatrixFamily.NORMALIZED_GAUSSIAN: 'NormalizedGaussian',
}


@dataclass
class MatrixSpec:
    """Which sensing matrix to build.

    basis: 'qr' (seeded QR of a Gaussian matrix) or 'dct' (orthonormal DCT-II rows),
    only used by SubsampledOrthogonal. approximate_etf allows a numerically
    optimized frame where no closed-form ETF is available.
    """

    family: MatrixFamily
    M: int
    N: int
    seed: int = 0
    basis: str = 'qr'
    approximate_etf: bool = False

    def __post_init__(self):
        try:
            self.family = MatrixFamily(self.family)
        except ValueError:
            raise ConfigError(f"unknown matrix family {self.family!r}") from None
        self.M, self.N, self.seed = int(self.M), int(self.N), int(self.seed)
        if self.M < 1 or self.M > self.N:
            raise ConfigError(f"matrix shape must satisfy 1 <= M <= N, got {self.M}x{self.N}")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.basis not in ('qr', 'dct'):
            raise ConfigError(f"basis must be 'qr' or 'dct', got {self.basis!r}")

    @property
    def label(self):
        return FAMILY_LABELS[self.family]

    def to_dict(self):
        document = asdict(self)
        document['family'] = self.family.value
        return document


def welch_bound(M, N):
    """sqrt(N - M) / sqrt(M (N - 1)), the coherence of an M x N ETF"""
    return float(np.sqrt((N - M) / (M * (N - 1.0))))


def coherence(A):
    """max |<a_i, a_j>| over distinct normalized columns"""
    matrix = np.asarray(getattr(A, 'matrix', A), dtype=float)
    columns = matrix / np.linalg.norm(matrix, axis=0)
    gram = np.abs(columns.T @ columns)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def _icosahedron_frame():
    # the six diagonals of the icosahedron, vertices (0, +-1, +-phi) and cyclic shifts
    phi = GOLDEN_RATIO
    directions = np.array([
        [0.0, 1.0, phi],
        [0.0, 1.0, -phi],
        [1.0, phi, 0.0],
        [1.0, -phi, 0.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, 1.0],
    ]).T
    return directions / np.linalg.norm(directions, axis=0)


def _alternating_projection_frame(M, N, seed, iterations=5000):
    """Unit-norm tight frame with near-Welch coherence by alternating projection.

    Alternates between Gram matrices with unit diagonal and off-diagonals
    clipped to the Welch bound, and rank-M Gram matrices of tight frames.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    frame = rng.standard_normal((M, N))
    frame /= np.linalg.norm(frame, axis=0)
    mu = welch_bound(M, N)

    for _ in range(iterations):
        gram = frame.T @ frame
        clipped = np.clip(gram, -mu, mu)
        np.fill_diagonal(clipped, 1.0)
        eigenvalues, eigenvectors = np.linalg.eigh(clipped)
        leading = eigenvectors[:, -M:]
        frame = np.sqrt(N / M) * leading.T
        frame /= np.linalg.norm(frame, axis=0)

    return frame


def _build_etf(spec):
    if (spec.M, spec.N) == (3, 6):
        return _icosahedron_frame(), False
    if not spec.approximate_etf:
        raise ConstructionError(
            f"no closed-form real ETF for M={spec.M}, N={spec.N}; set approximate_etf to optimize one"
        )
    if spec.M >= spec.N:
        raise ConstructionError("an ETF needs M < N")
    logger.warning(
        f"building approximate ETF {spec.M}x{spec.N} by alternating projection (seed {spec.seed})"
    )
    return _alternating_projection_frame(spec.M, spec.N, spec.seed), True


def _build_subsampled_orthogonal(spec):
    if spec.basis == 'dct':
        return scipy.fft.dct(np.eye(spec.N), norm='ortho', axis=0)[:spec.M]
    rng = np.random.Generator(np.random.Philox(spec.seed))
    Q, R = np.linalg.qr(rng.standard_normal((spec.N, spec.N)))
    # fix the sign ambiguity of QR so the basis is a function of the seed only
    Q = Q * np.sign(np.diag(R))
    return Q[:spec.M]


def _build_normalized_gaussian(spec):
    rng = np.random.Generator(np.random.Philox(spec.seed))
    matrix = rng.standard_normal((spec.M, spec.N))
    return matrix / np.linalg.norm(matrix, axis=1, keepdims=True)


def verify(A, family, approximate=False):
    """Re-check the structural properties promised by each family"""
    matrix = A.matrix
    M, N = matrix.shape

    if family is MatrixFamily.EQUIANGULAR_TIGHT_FRAME:
        column_norms = np.linalg.norm(matrix, axis=0)
        if np.max(np.abs(column_norms - 1.0)) > ETF_TOLERANCE:
            raise ConstructionError("ETF columns are not unit norm")
        achieved = coherence(matrix)
        if approximate:
            logger.warning(
                f"approximate ETF coherence {achieved:.10f} vs Welch bound {welch_bound(M, N):.10f}"
            )
            return
        gram = np.abs(matrix.T @ matrix)
        off_diagonal = gram[~np.eye(N, dtype=bool)]
        if np.max(np.abs(off_diagonal - welch_bound(M, N))) > ETF_TOLERANCE:
            raise ConstructionError(f"frame is not equiangular (coherence {achieved:.10f})")
        if np.max(np.abs(matrix @ matrix.T - (N / M) * np.eye(M))) > ETF_TOLERANCE:
            raise ConstructionError("frame is not tight")

    elif family is MatrixFamily.SUBSAMPLED_ORTHOGONAL:
        if np.max(np.abs(matrix @ matrix.T - np.eye(M))) > ORTHOGONALITY_TOLERANCE:
            raise ConstructionError("rows are not orthonormal")

    elif family is MatrixFamily.NORMALIZED_GAUSSIAN:
        if np.max(np.abs(np.linalg.norm(matrix, axis=1) - 1.0)) > NORM_TOLERANCE:
            raise ConstructionError("rows are not unit norm")


def build(spec):
    """Construct and verify the sensing matrix described by spec"""
    approximate = False
    if spec.family is MatrixFamily.EQUIANGULAR_TIGHT_FRAME:
        matrix, approximate = _build_etf(spec)
    elif spec.family is MatrixFamily.SUBSAMPLED_ORTHOGONAL:
        matrix = _build_subsampled_orthogonal(spec)
    else:
        matrix = _build_normalized_gaussian(spec)

    A = SensingMatrix(matrix, family=spec.family.value, approximate=approximate)
    verify(A, spec.family, approximate)
    logger.info(f"built {spec.family.value} {spec.M}x{spec.N} (seed {spec.seed})")
    return A


def matrix_to_dict(A):
    return {
        'family': A.family,
        'approximate': A.approximate,
        'M': A.M,
        'N': A.N,
        'A': A.matrix.reshape(-1).tolist(),
    }


def matrix_from_dict(document):
    M, N = int(document['M']), int(document['N'])
    values = np.array(document['A'], dtype=float)
    if values.size != M * N:
        raise DimensionMismatchError(f"matrix document has {values.size} entries for {M}x{N}")
    return SensingMatrix(
        values.reshape(M, N),
        family=document.get('family', 'custom'),
        approximate=bool(document.get('approximate', False)),
    )


def matrix_to_json(A, indent=2):
    return json.dumps(matrix_to_dict(A), indent=indent)


def matrix_from_json(text):
    return matrix_from_dict(json.loads(text))
