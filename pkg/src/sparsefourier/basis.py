"""Orthogonal polynomial families, Hermite functions and Hermite zeros.

Every family is evaluated by its forward three-term recurrence in double
precision.  Orthonormal values divide by a normalization constant that is
computed in log space, so the constant itself never overflows; the polynomial
values do, which is why Hermite degrees are capped at ``MAX_HERMITE_DEGREE``.

Weights and domains:

==================  ======================  ==========
family              weight                  domain
==================  ======================  ==========
HERMITE             exp(-x**2)              R
LEGENDRE            1                       [-1, 1]
CHEBYSHEV           1 / sqrt(1 - x**2)      [-1, 1]
HERMITE_FUNCTION    1 (Gaussian in basis)   R
==================  ======================  ==========
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import CapacityError, DimensionError, DomainError, EmptyGridError

MAX_HERMITE_DEGREE = 150

MultiIndex = tuple[int, ...]


class Kind(str, Enum):
    HERMITE = "hermite"
    LEGENDRE = "legendre"
    CHEBYSHEV = "chebyshev"
    HERMITE_FUNCTION = "hermite_function"

    @property
    def is_hermite(self) -> bool:
        return self in (Kind.HERMITE, Kind.HERMITE_FUNCTION)


@dataclass(frozen=True)
class BasisFamily:
    """A tensor-product orthonormal basis in ``dimension`` variables.

    For ``Kind.HERMITE_FUNCTION`` the basis element of index ``n`` is the
    orthonormal Hermite polynomial times ``exp(-|x|**2 / 2)``.
    """

    kind: Kind
    dimension: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise DimensionError(f"dimension must be a positive integer, got {self.dimension!r}")


def _check_degree(kind: Kind, n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a nonnegative integer, got {n!r}")
    n = int(n)
    if kind.is_hermite and n > MAX_HERMITE_DEGREE:
        raise CapacityError(
            f"Hermite degree {n} exceeds the supported maximum {MAX_HERMITE_DEGREE}"
        )
    return n


def _check_finite(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("evaluation points must be finite")
    return arr


def recurrence_table(kind: Kind, max_degree: int, x) -> np.ndarray:
    """Unnormalized values ``P_0(x) .. P_max_degree(x)``, shape ``(max_degree + 1,) + x.shape``.

    HERMITE_FUNCTION returns the bare Hermite polynomials; the Gaussian
    factor is applied by the callers.
    """
    kind = Kind(kind)
    max_degree = _check_degree(kind, max_degree)
    x = _check_finite(x)
    out = np.empty((max_degree + 1,) + x.shape)
    out[0] = 1.0
    if max_degree == 0:
        return out
    if kind.is_hermite:
        out[1] = 2.0 * x
        for n in range(1, max_degree):
            out[n + 1] = 2.0 * x * out[n] - 2.0 * n * out[n - 1]
    elif kind is Kind.LEGENDRE:
        out[1] = x
        for n in range(1, max_degree):
            out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    else:
        out[1] = x
        for n in range(1, max_degree):
            out[n + 1] = 2.0 * x * out[n] - out[n - 1]
    return out


def log_norm_squared(kind: Kind, n: int) -> float:
    """``log <P_n, P_n>`` under the family's weight."""
    kind = Kind(kind)
    if kind.is_hermite:
        return math.lgamma(n + 1) + n * math.log(2.0) + 0.5 * math.log(math.pi)
    if kind is Kind.LEGENDRE:
        return math.log(2.0 / (2 * n + 1))
    return math.log(math.pi) if n == 0 else math.log(math.pi / 2)


def norm_constants(kind: Kind, max_degree: int) -> np.ndarray:
    """``sqrt(<P_n, P_n>)`` for n = 0..max_degree."""
    return np.exp(0.5 * np.array([log_norm_squared(kind, n) for n in range(max_degree + 1)]))


def orthonormal_table(kind: Kind, max_degree: int, x) -> np.ndarray:
    """Orthonormal polynomial values, shape ``(max_degree + 1,) + x.shape``.

    The Gaussian envelope of HERMITE_FUNCTION is *not* included.
    """
    kind = Kind(kind)
    table = recurrence_table(kind, max_degree, x)
    scale = norm_constants(kind, max_degree)
    return table / scale.reshape((-1,) + (1,) * (table.ndim - 1))


def envelope(kind: Kind, points: np.ndarray) -> np.ndarray | float:
    """Gaussian factor ``exp(-|x|**2 / 2)`` for HERMITE_FUNCTION, else 1.

    ``points`` has the coordinate axis last.
    """
    if Kind(kind) is Kind.HERMITE_FUNCTION:
        return np.exp(-0.5 * np.sum(np.square(points), axis=-1))
    return 1.0


def tensor_values(tables: Sequence[np.ndarray], indices: np.ndarray) -> np.ndarray:
    """Products ``prod_i tables[i][indices[..., i]]``.

    ``tables[i]`` has shape ``(degrees, points)``; the result has shape
    ``indices.shape[:-1] + (points,)``.  This is the single code path used by
    both pointwise evaluation and matrix assembly.
    """
    value = tables[0][indices[..., 0]]
    for i in range(1, len(tables)):
        value = value * tables[i][indices[..., i]]
    return value


def eval_univariate(kind: Kind, n: int, x: float) -> float:
    """Unnormalized value of the degree-``n`` polynomial of ``kind`` at ``x``."""
    kind = Kind(kind)
    n = _check_degree(kind, n)
    value = float(recurrence_table(kind, n, float(_check_finite(x)))[n])
    if kind is Kind.HERMITE_FUNCTION:
        value *= math.exp(-0.5 * x * x)
    return value


def eval_orthonormal(kind: Kind, n: int, x: float) -> float:
    """Orthonormal value of degree ``n`` at ``x`` (Gaussian included for Hermite functions)."""
    kind = Kind(kind)
    n = _check_degree(kind, n)
    value = float(orthonormal_table(kind, n, float(_check_finite(x)))[n])
    if kind is Kind.HERMITE_FUNCTION:
        value *= math.exp(-0.5 * x * x)
    return value


def eval_multivariate(family: BasisFamily, index: Sequence[int], point: Sequence[float]) -> float:
    index = tuple(int(n) for n in index)
    point = _check_finite(point).reshape(-1)
    if len(index) != family.dimension or point.size != family.dimension:
        raise DimensionError(
            f"index length {len(index)} and point length {point.size} must both equal "
            f"dimension {family.dimension}"
        )
    for n in index:
        _check_degree(family.kind, n)
    tables = [orthonormal_table(family.kind, index[i], point[i : i + 1]) for i in range(family.dimension)]
    value = tensor_values(tables, np.array(index))
    value = value * envelope(family.kind, point[None, :])
    return float(value[0])


def hermite_zeros(M: int) -> np.ndarray:
    """Ascending zeros of the degree-``M`` physicists' Hermite polynomial.

    Eigenvalues of the symmetric Jacobi matrix, one Newton step, then
    symmetrized so ``z[i] == -z[M - 1 - i]`` exactly.
    """
    if int(M) != M or M < 0:
        raise DomainError(f"M must be a positive integer, got {M!r}")
    M = int(M)
    if M == 0:
        raise EmptyGridError("hermite_zeros(0) has no zeros")
    if M == 1:
        return np.zeros(1)
    off = np.sqrt(np.arange(1, M) / 2.0)
    z = eigh_tridiagonal(np.zeros(M), off, eigvals_only=True)
    # Newton step H_M / H_M' = h_M / (sqrt(2M) h_{M-1}) with the normalized
    # recurrence so large M cannot overflow.
    h_prev = np.zeros(M)
    h = np.full(M, math.pi ** -0.25)
    for n in range(M):
        h_prev, h = h, math.sqrt(2.0 / (n + 1)) * z * h - math.sqrt(n / (n + 1)) * h_prev
    z = z - h / (math.sqrt(2.0 * M) * h_prev)
    z = np.sort(z)
    z = 0.5 * (z - z[::-1])
    return z
