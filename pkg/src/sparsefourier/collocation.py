"""Node grids and assembly of the collocation system ``X``, ``D``, ``f``."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .basis import BasisFamily, envelope, hermite_zeros, orthonormal_table, tensor_values
from .errors import (
    CapacityError,
    DegenerateColumnError,
    DimensionError,
    DomainError,
    UnsupportedShapeError,
)
from .indexsets import IndexSet

DEFAULT_NODE_BUDGET = 10**7
# Column norms at or below this fraction of the largest one are treated as
# zero: e.g. H_M sampled at its own zeros gives ~1e-16 instead of 0.
DEGENERATE_RTOL = 1e-12
DUMP_MAGIC = b"SPSX1"


class GridSource(str, Enum):
    HERMITE_ZEROS_TENSOR = "hermite_zeros_tensor"
    IMAGE_PIXELS_MAPPED = "image_pixels_mapped"


@dataclass(frozen=True)
class NodeGrid:
    nodes: np.ndarray  # (m, d)
    source: GridSource

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2:
            raise DimensionError("nodes must be an (m, d) array")
        if not np.all(np.isfinite(nodes)):
            raise DomainError("node coordinates must be finite")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return self.nodes.shape[0]

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]


def tensor_hermite_grid(M: int, d: int, node_budget: int = DEFAULT_NODE_BUDGET) -> NodeGrid:
    """Cartesian product of the ``M`` Hermite zeros, ``d`` times, row-major."""
    if int(d) != d or d < 1:
        raise DimensionError(f"d must be a positive integer, got {d!r}")
    if M ** d > node_budget:
        raise CapacityError(f"{M}^{d} nodes exceed the node budget {node_budget}")
    z = hermite_zeros(M)
    mesh = np.meshgrid(*([z] * d), indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in mesh], axis=1)
    return NodeGrid(nodes, GridSource.HERMITE_ZEROS_TENSOR)


def map_pixels_to_grid(width: int, height: int) -> NodeGrid:
    """Nodes for a square ``M x M`` image, pixels enumerated row-major.

    Pixel (row r, col c) maps to ``(Z[c], Z[M - 1 - r])`` so that columns run
    along +x and rows run down -y.
    """
    if width != height:
        raise UnsupportedShapeError(f"only square images are supported, got {width}x{height}")
    M = int(width)
    z = hermite_zeros(M)
    rows, cols = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    nodes = np.stack([z[cols.reshape(-1)], z[M - 1 - rows.reshape(-1)]], axis=1)
    return NodeGrid(nodes, GridSource.IMAGE_PIXELS_MAPPED)


def design_matrix(basis: BasisFamily, indexset: IndexSet, nodes: np.ndarray) -> np.ndarray:
    """``X[j, k] = pi_{n_k}(x_j)``, shape ``(m, p)``."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or nodes.shape[1] != indexset.d or basis.dimension != indexset.d:
        raise DimensionError(
            f"basis dimension {basis.dimension}, index-set dimension {indexset.d} and node "
            f"dimension {nodes.shape[-1]} must agree"
        )
    degree = indexset.max_degree
    tables = [orthonormal_table(basis.kind, degree, nodes[:, i]) for i in range(indexset.d)]
    # (p, m) from the shared tensor-product path, then transpose.
    values = tensor_values(tables, indexset.array)
    values = values * envelope(basis.kind, nodes)
    return np.ascontiguousarray(values.T)


@dataclass(frozen=True)
class CollocationSystem:
    X: np.ndarray
    D: np.ndarray
    f: np.ndarray
    basis: BasisFamily | None
    indexset: IndexSet | None
    grid: NodeGrid | None
    degenerate: np.ndarray  # bool mask over columns zeroed during assembly

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def with_samples(self, samples) -> "CollocationSystem":
        """Same matrix, new right-hand side."""
        f = _as_samples(samples, self.m)
        return CollocationSystem(self.X, self.D, f, self.basis, self.indexset, self.grid, self.degenerate)


def _as_samples(samples, m: int) -> np.ndarray:
    f = np.array(samples, dtype=float).reshape(-1)
    if f.size != m:
        raise DimensionError(f"{f.size} samples for a grid of {m} nodes")
    if not np.all(np.isfinite(f)):
        raise DomainError("samples must be finite")
    f.setflags(write=False)
    return f


def assemble(
    basis: BasisFamily,
    indexset: IndexSet,
    grid: NodeGrid,
    samples,
    *,
    allow_degenerate: bool = False,
) -> CollocationSystem:
    """Build ``X``, the column norms ``D`` and the sample vector ``f``.

    A column whose norm is numerically zero raises DegenerateColumnError
    unless ``allow_degenerate`` is set; in that case the column is zeroed
    and its norm replaced by 1, so the l1 objective drives the coefficient
    to zero.
    """
    if grid.dimension != indexset.d:
        raise DimensionError(f"grid dimension {grid.dimension} != index-set dimension {indexset.d}")
    f = _as_samples(samples, len(grid))
    X = design_matrix(basis, indexset, grid.nodes)
    D = np.linalg.norm(X, axis=0)
    degenerate = D <= DEGENERATE_RTOL * max(float(D.max(initial=0.0)), np.finfo(float).tiny)
    if degenerate.any():
        if not allow_degenerate:
            bad = [indexset.indices[k] for k in np.flatnonzero(degenerate)]
            raise DegenerateColumnError(f"zero collocation columns for indices {bad[:5]}")
        X[:, degenerate] = 0.0
        D[degenerate] = 1.0
    for arr in (X, D, degenerate):
        arr.setflags(write=False)
    return CollocationSystem(X, D, f, basis, indexset, grid, degenerate)


def system_from_matrix(X, samples) -> CollocationSystem:
    """A system over an arbitrary matrix, with no basis, index set or grid behind it."""
    X = np.array(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DimensionError(f"expected a nonempty (m, p) matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("matrix entries must be finite")
    f = _as_samples(samples, X.shape[0])
    D = np.linalg.norm(X, axis=0)
    degenerate = D == 0.0
    D[degenerate] = 1.0
    for arr in (X, D, degenerate):
        arr.setflags(write=False)
    return CollocationSystem(X, D, f, None, None, None, degenerate)


def dump_system(system: CollocationSystem, path) -> None:
    """Little-endian dump: magic ``SPSX1``, u32 m, u32 p, then f, D, X (row-major f64)."""
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC)
        fh.write(struct.pack("<II", system.m, system.p))
        fh.write(np.asarray(system.f, dtype="<f8").tobytes())
        fh.write(np.asarray(system.D, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(system.X, dtype="<f8").tobytes())


def load_dump(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read ``(X, D, f)`` written by :func:`dump_system`."""
    data = Path(path).read_bytes()
    if data[:5] != DUMP_MAGIC:
        raise ValueError("not an SPSX1 dump")
    m, p = struct.unpack("<II", data[5:13])
    body = np.frombuffer(data, dtype="<f8", offset=13)
    if body.size != m + p + m * p:
        raise ValueError("truncated SPSX1 dump")
    f, D, X = body[:m], body[m : m + p], body[m + p :].reshape(m, p)
    return X.astype(float), D.astype(float), f.astype(float)
