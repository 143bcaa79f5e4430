"""Candidate multi-index sets: rectangular, triangular and hyperbolic cross."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError

MultiIndex = tuple[int, ...]


class Shape(str, Enum):
    RECTANGULAR = "Y"
    TRIANGULAR = "T"
    HYPERBOLIC_CROSS = "S"

    @classmethod
    def parse(cls, value) -> "Shape":
        if isinstance(value, cls):
            return value
        aliases = {
            "y": cls.RECTANGULAR, "rectangular": cls.RECTANGULAR,
            "t": cls.TRIANGULAR, "triangular": cls.TRIANGULAR,
            "s": cls.HYPERBOLIC_CROSS, "hyperbolic": cls.HYPERBOLIC_CROSS,
            "hyperboliccross": cls.HYPERBOLIC_CROSS, "hyperbolic_cross": cls.HYPERBOLIC_CROSS,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown index-set shape {value!r}") from None


def _member(shape: Shape, N: int, n: Sequence[int]) -> bool:
    if any(k < 0 for k in n):
        return False
    if shape is Shape.RECTANGULAR:
        return max(n) <= N
    if shape is Shape.TRIANGULAR:
        return sum(n) <= N
    return math.prod(k + 1 for k in n) <= N + 1


@dataclass(frozen=True)
class IndexSet:
    """An ordered (lexicographic) set of multi-indices of one shape."""

    shape: Shape
    N: int
    d: int
    indices: tuple[MultiIndex, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, n) -> bool:
        try:
            return contains(self, n)
        except DimensionError:
            return False

    @property
    def array(self) -> np.ndarray:
        """Indices as an integer array of shape ``(p, d)``."""
        return np.array(self.indices, dtype=np.intp).reshape(len(self.indices), self.d)

    @property
    def max_degree(self) -> int:
        return max((max(n) for n in self.indices), default=0)

    def position(self, n: Sequence[int]) -> int:
        """Column position of ``n`` in the enumeration; KeyError if absent."""
        try:
            return self._positions[tuple(n)]
        except KeyError:
            raise KeyError(tuple(n)) from None

    @property
    def _positions(self) -> dict[MultiIndex, int]:
        cache = self.__dict__.get("_pos_cache")
        if cache is None:
            cache = {n: i for i, n in enumerate(self.indices)}
            object.__setattr__(self, "_pos_cache", cache)
        return cache


def build(shape, N: int, d: int) -> IndexSet:
    """All multi-indices of dimension ``d`` satisfying the shape predicate for ``N``.

    Y: max_j n_j <= N;  T: sum_j n_j <= N;  S: prod_j (n_j + 1) <= N + 1.
    Every shape is a subset of the (N+1)^d box, which is scanned in
    lexicographic order.
    """
    shape = Shape.parse(shape)
    if int(N) != N or N < 0:
        raise DomainError(f"N must be a nonnegative integer, got {N!r}")
    if int(d) != d or d < 1:
        raise DimensionError(f"d must be a positive integer, got {d!r}")
    N, d = int(N), int(d)
    indices = tuple(n for n in itertools.product(range(N + 1), repeat=d) if _member(shape, N, n))
    return IndexSet(shape, N, d, indices)


def contains(index_set: IndexSet, n: Sequence[int]) -> bool:
    """Shape-predicate membership test (no list search)."""
    n = tuple(int(k) for k in n)
    if len(n) != index_set.d:
        raise DimensionError(f"multi-index has length {len(n)}, index set has d={index_set.d}")
    return _member(index_set.shape, index_set.N, n)


def to_text(indices: Iterable[Sequence[int]]) -> str:
    """One index per line, entries separated by single spaces."""
    return "".join(" ".join(str(k) for k in n) + "\n" for n in indices)


def from_text(text: str) -> list[MultiIndex]:
    rows = [tuple(int(tok) for tok in line.split()) for line in text.splitlines() if line.strip()]
    if rows and len({len(r) for r in rows}) != 1:
        raise DimensionError("index lines have inconsistent lengths")
    return rows


def write_indices(index_set: IndexSet, path) -> None:
    Path(path).write_text(to_text(index_set.indices))
