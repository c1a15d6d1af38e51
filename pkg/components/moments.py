"""
SMMSE Toolkit - Moments over Generalized Unit Balls
====================================================
Closed-form volumes, monomial moments and inner-product statistics for
x ~ U(B_p) with B_p = {x : sum_n |x_n|^p_n <= 1}.

Every Gamma-ratio is assembled from log_gamma terms and exponentiated once:
Gamma(1 + sum (alpha_n + 1) / p_n) already overflows a double at N=6,
p=0.4, order 18.
"""

import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from components.errors import DimensionMismatchError, DomainError

logger = logging.getLogger(__name__)

# Lanczos approximation with g = 7 and nine terms
LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# Multinomial coefficients up to this order are built from exact integers
EXACT_MULTINOMIAL_ORDER = 20


@dataclass(frozen=True, eq=False)
class CharacteristicVector:
    """Per-coordinate exponents p defining the ball B_p"""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float).reshape(-1)
        if entries.size < 1:
            raise DomainError("characteristic vector needs at least one entry")
        if not np.all(np.isfinite(entries)) or np.any(entries <= 0):
            raise DomainError(f"characteristic vector entries must be positive, got {entries}")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def isotropic(cls, value, dimension):
        return cls(np.full(int(dimension), float(value)))

    @property
    def dimension(self):
        return int(self.entries.size)

    @property
    def is_isotropic(self):
        return bool(np.all(self.entries == self.entries[0]))

    def __len__(self):
        return self.dimension

    def __repr__(self):
        return f"CharacteristicVector({self.to_list()})"

    def to_list(self):
        return [float(v) for v in self.entries]


def as_characteristic_vector(p):
    if isinstance(p, CharacteristicVector):
        return p
    return CharacteristicVector(p)


def multi_index_order(alpha):
    return int(sum(alpha))


def log_gamma(z):
    """ln Gamma(z) for z > 0; accepts scalars and arrays"""
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)) or np.any(z_arr <= 0):
        raise DomainError(f"log_gamma requires z > 0, got {z}")

    # Gamma(z) = Gamma(z + 1) / z keeps the series argument >= 0.5
    shifted = z_arr < 0.5
    w = np.where(shifted, z_arr + 1.0, z_arr) - 1.0

    series = np.full_like(w, LANCZOS_COEFFICIENTS[0])
    for k, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series = series + coefficient / (w + k)
    t = w + LANCZOS_G + 0.5
    result = _HALF_LOG_TWO_PI + (w + 0.5) * np.log(t) - t + np.log(series)
    result = np.where(shifted, result - np.log(z_arr), result)

    if result.ndim == 0:
        return float(result)
    return result


def log_ball_volume(p):
    """ln vol(B_p) = N ln 2 - sum ln p_n + sum ln Gamma(1/p_n) - ln Gamma(1 + sum 1/p_n)"""
    p = as_characteristic_vector(p)
    inv = 1.0 / p.entries
    return float(
        p.dimension * math.log(2.0)
        - np.sum(np.log(p.entries))
        + np.sum(log_gamma(inv))
        - log_gamma(1.0 + np.sum(inv))
    )


def log_monomial_integral(p, alpha):
    """ln of the integral of x^alpha over B_p; -inf where alpha has an odd entry.

    `alpha` may be a single multi-index or a (K, N) array of them.
    """
    p = as_characteristic_vector(p)
    alphas = np.asarray(alpha, dtype=np.int64)
    single = alphas.ndim == 1
    alphas = np.atleast_2d(alphas)
    if alphas.shape[1] != p.dimension:
        raise DimensionMismatchError(
            f"multi-index has length {alphas.shape[1]}, ball has dimension {p.dimension}"
        )
    if np.any(alphas < 0):
        raise DomainError("multi-index entries must be nonnegative")

    result = np.full(alphas.shape[0], -np.inf)
    even = np.all(alphas % 2 == 0, axis=1)
    if np.any(even):
        ratios = (alphas[even] + 1.0) / p.entries
        result[even] = (
            p.dimension * math.log(2.0)
            - np.sum(np.log(p.entries))
            + np.sum(log_gamma(ratios), axis=1)
            - log_gamma(1.0 + np.sum(ratios, axis=1))
        )
    return float(result[0]) if single else result


@lru_cache(maxsize=None)
def _multi_indices(dimension, order):
    if dimension == 1:
        return ((order,),)
    indices = []
    for first in range(order, -1, -1):
        for rest in _multi_indices(dimension - 1, order - first):
            indices.append((first,) + rest)
    return tuple(indices)


def enumerate_multi_indices(dimension, order):
    """All alpha in N_0^dimension with |alpha| = order, reverse-lexicographic"""
    if dimension < 1 or order < 0:
        raise DomainError(f"need dimension >= 1 and order >= 0, got ({dimension}, {order})")
    return list(_multi_indices(int(dimension), int(order)))


@lru_cache(maxsize=None)
def multi_index_array(dimension, order):
    """enumerate_multi_indices as a read-only (K, dimension) integer array"""
    alphas = np.array(enumerate_multi_indices(dimension, order), dtype=np.int64)
    alphas = alphas.reshape(-1, dimension)
    alphas.setflags(write=False)
    return alphas


def log_multinomial(order, alphas):
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    return log_gamma(order + 1.0) - np.sum(log_gamma(alphas + 1.0), axis=1)


def multinomial_coefficients(order, alphas):
    """order! / prod(alpha_n!) for every row of alphas"""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=np.int64))
    if order > EXACT_MULTINOMIAL_ORDER:
        return np.exp(log_multinomial(order, alphas))
    factorials = [math.factorial(k) for k in range(order + 1)]
    numerator = factorials[order]
    return np.array(
        [numerator // math.prod(factorials[a] for a in row) for row in alphas.tolist()],
        dtype=float,
    )


def required_order(degree):
    """Highest moment order the SMSE objective and its W-gradient can touch.

    E[V^T V] needs E[<u,x>^(2D)] and the gradient of tr C_xhat needs
    E[x_j <u,x>^(2D-1)], so order 2D suffices; the two extra orders cover
    second-derivative expectations E[x_i x_j <u,x>^(2D)].
    """
    return 2 * int(degree) + 2


class MomentTable:
    """Exact normalized moments E[x^alpha] for x ~ U(B_p), memoized on demand"""

    def __init__(self, p):
        self.p = as_characteristic_vector(p)
        self.dimension = self.p.dimension
        self.log_volume = log_ball_volume(self.p)
        self.entries = {}
        self._expansions = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"MomentTable(p={self.p.to_list()}, cached={len(self.entries)})"

    def _as_key(self, alpha):
        key = tuple(int(a) for a in alpha)
        if len(key) != self.dimension:
            raise DimensionMismatchError(
                f"multi-index has length {len(key)}, table has dimension {self.dimension}"
            )
        if any(a < 0 for a in key):
            raise DomainError("multi-index entries must be nonnegative")
        return key

    def moments(self, alphas):
        """E[x^alpha] for every row of a (K, N) multi-index array (not memoized)"""
        alphas = np.atleast_2d(np.asarray(alphas, dtype=np.int64))
        values = np.zeros(alphas.shape[0])
        even = np.all(alphas % 2 == 0, axis=1)
        if np.any(even):
            values[even] = np.exp(log_monomial_integral(self.p, alphas[even]) - self.log_volume)
        # normalization holds exactly, not up to rounding
        values[np.all(alphas == 0, axis=1)] = 1.0
        return values

    def moment(self, alpha):
        key = self._as_key(alpha)
        cached = self.entries.get(key)
        if cached is not None:
            return cached
        value = float(self.moments(np.array([key]))[0])
        with self._lock:
            return self.entries.setdefault(key, value)

    def expansion(self, order, extra=None):
        """Multi-indices |alpha| = order with nonzero E[x^(alpha + extra)] and their weights.

        weights_k = multinomial(order, alpha_k) * E[x^(alpha_k + extra)], so
        E[x^extra <u, x>^order] = sum_k u^alpha_k * weights_k.
        """
        extra_key = (0,) * self.dimension if extra is None else self._as_key(extra)
        key = (int(order), extra_key)
        cached = self._expansions.get(key)
        if cached is not None:
            return cached

        alphas = multi_index_array(self.dimension, int(order))
        shifted = alphas + np.array(extra_key, dtype=np.int64)
        keep = np.all(shifted % 2 == 0, axis=1)
        alphas, shifted = alphas[keep], shifted[keep]

        if order <= EXACT_MULTINOMIAL_ORDER:
            weights = multinomial_coefficients(order, alphas) * self.moments(shifted)
        else:
            weights = np.exp(
                log_multinomial(order, alphas)
                + log_monomial_integral(self.p, shifted)
                - self.log_volume
            )
        alphas = np.ascontiguousarray(alphas)
        alphas.setflags(write=False)
        weights.setflags(write=False)

        with self._lock:
            return self._expansions.setdefault(key, (alphas, weights))


def monomial_moment(table, alpha):
    """E[x^alpha] for x ~ U(B_p); exactly 0 for odd alpha and 1 for alpha = 0"""
    return table.moment(alpha)


def monomials(U, alphas):
    """u_r^alpha_k for every row u_r of U and every row alpha_k of alphas -> (R, K)"""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    alphas = np.atleast_2d(np.asarray(alphas, dtype=np.int64))
    if alphas.size == 0:
        return np.zeros((U.shape[0], 0))
    powers = U[:, :, None] ** np.arange(int(alphas.max()) + 1)
    gathered = powers[:, np.arange(U.shape[1]), alphas]
    return gathered.prod(axis=2)


def _check_extra(table, extra):
    if extra is None:
        return None
    extra = np.asarray(extra, dtype=np.int64)
    if extra.shape != (table.dimension,):
        raise DimensionMismatchError(
            f"extra multi-index has shape {extra.shape}, expected ({table.dimension},)"
        )
    if np.any(extra < 0) or multi_index_order(extra) > 2:
        raise DomainError(f"extra multi-index must have order 0, 1 or 2, got {extra.tolist()}")
    return extra


def inner_product_moments(table, U, order, extra=None):
    """E[x^extra <u_r, x>^order] for every row u_r of U"""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != table.dimension:
        raise DimensionMismatchError(
            f"vectors have length {U.shape[1]}, table has dimension {table.dimension}"
        )
    if order < 0:
        raise DomainError(f"order must be nonnegative, got {order}")
    extra = _check_extra(table, extra)
    alphas, weights = table.expansion(order, extra)
    if weights.size == 0:
        return np.zeros(U.shape[0])
    return monomials(U, alphas) @ weights


def inner_product_moment(table, u, order, extra=None):
    """E[x^extra <u, x>^order] by the multinomial expansion over |alpha| = order"""
    u = np.asarray(u, dtype=float)
    if u.shape != (table.dimension,):
        raise DimensionMismatchError(
            f"vector has shape {u.shape}, table has dimension {table.dimension}"
        )
    return float(inner_product_moments(table, u[None, :], order, extra)[0])
