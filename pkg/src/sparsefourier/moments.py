"""Gaussian-Hermite moments and their rotation invariants of orders 2 to 4.

With the Hermite-function basis, the coefficient of index ``n`` is the moment
``m_n = <f, pi_n exp(-|x|^2 / 2)>`` itself, so the moments come straight out
of the solver.  The invariants are polynomials in moments taken against the
*unnormalized* functions ``H_p(x) H_q(y) exp(-(x^2 + y^2) / 2)``: these
transform under rotation exactly like geometric moments, while the
orthonormal ones only do so for quarter turns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .basis import BasisFamily, Kind, envelope, norm_constants, orthonormal_table, tensor_values
from .collocation import map_pixels_to_grid, tensor_hermite_grid
from .dantzig import SolveResult
from .errors import BasisMismatchError, DimensionError, DomainError, MissingIndexError
from .indexsets import IndexSet

MOMENT_INDICES: tuple[tuple[int, int], ...] = (
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (4, 0), (3, 1), (2, 2), (1, 3), (0, 4),
)
N_INVARIANTS = 11
CSV_HEADER = ",".join(f"phi{j}" for j in range(1, N_INVARIANTS + 1))


@dataclass(frozen=True)
class MomentVector:
    """The twelve moments of orders 2, 3 and 4, in ``MOMENT_INDICES`` order.

    ``unnormalized`` tells whether they are taken against the orthonormal
    Hermite functions (False) or against ``H_p H_q exp(-r^2/2)`` (True).
    """

    values: tuple[float, ...]
    unnormalized: bool = False

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != len(MOMENT_INDICES):
            raise DimensionError(f"expected {len(MOMENT_INDICES)} moments, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise DomainError("moments must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, moments: Mapping[tuple[int, int], float], unnormalized: bool = False):
        missing = [n for n in MOMENT_INDICES if n not in moments]
        if missing:
            raise MissingIndexError(f"moments missing for {missing}")
        return cls(tuple(moments[n] for n in MOMENT_INDICES), unnormalized)

    def __getitem__(self, index) -> float:
        return self.values[MOMENT_INDICES.index(tuple(index))]

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(zip(MOMENT_INDICES, self.values))


@dataclass(frozen=True)
class InvariantVector:
    phi: tuple[float, ...]

    def __post_init__(self):
        phi = tuple(float(v) for v in self.phi)
        if len(phi) != N_INVARIANTS:
            raise DimensionError(f"expected {N_INVARIANTS} invariants, got {len(phi)}")
        if not all(math.isfinite(v) for v in phi):
            raise DomainError("invariants must be finite")
        object.__setattr__(self, "phi", phi)

    def as_array(self) -> np.ndarray:
        return np.array(self.phi)

    def distance(self, other: "InvariantVector") -> float:
        """l1 distance."""
        return float(np.sum(np.abs(self.as_array() - other.as_array())))

    def to_csv_row(self) -> str:
        return ",".join(repr(v) for v in self.phi)

    @classmethod
    def from_csv_row(cls, row: str) -> "InvariantVector":
        return cls(tuple(float(t) for t in row.strip().split(",")))


def _scale(n: tuple[int, int]) -> float:
    nu = norm_constants(Kind.HERMITE, 4)
    return float(nu[n[0]] * nu[n[1]])


def unnormalized(m: MomentVector) -> MomentVector:
    """Moments against ``H_p H_q exp(-r^2/2)`` from orthonormal ones."""
    if m.unnormalized:
        return m
    return MomentVector(tuple(v * _scale(n) for n, v in zip(MOMENT_INDICES, m.values)), True)


def orthonormal(m: MomentVector) -> MomentVector:
    if not m.unnormalized:
        return m
    return MomentVector(tuple(v / _scale(n) for n, v in zip(MOMENT_INDICES, m.values)), False)


def moments_from_coefficients(result: SolveResult | np.ndarray, indexset: IndexSet,
                              basis: BasisFamily) -> MomentVector:
    """Read the moments off a Hermite-function coefficient vector."""
    if Kind(basis.kind) is not Kind.HERMITE_FUNCTION or basis.dimension != 2:
        raise BasisMismatchError(
            f"moments need the bivariate Hermite-function basis, got {basis.kind.value} "
            f"in dimension {basis.dimension}"
        )
    c = result.coefficients if isinstance(result, SolveResult) else np.asarray(result, dtype=float)
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != len(indexset):
        raise DimensionError(f"{c.size} coefficients for an index set of size {len(indexset)}")
    missing = [n for n in MOMENT_INDICES if n not in indexset]
    if missing:
        raise MissingIndexError(f"index set lacks the moment indices {missing}")
    return MomentVector(tuple(c[indexset.position(n)] for n in MOMENT_INDICES))


def invariant_polynomials(m: Mapping[tuple[int, int], object]) -> tuple:
    """The eleven invariants as plain arithmetic, so exact number types pass through.

    ``a = m30 + m12`` and ``b = m03 + m21`` are the real and imaginary parts of
    the order-3 complex moment every invariant below pairs with.
    """
    m20, m11, m02 = m[2, 0], m[1, 1], m[0, 2]
    m30, m21, m12, m03 = m[3, 0], m[2, 1], m[1, 2], m[0, 3]
    m40, m31, m22, m13, m04 = m[4, 0], m[3, 1], m[2, 2], m[1, 3], m[0, 4]
    a = m30 + m12
    b = m03 + m21
    a2, b2 = a * a, b * b
    quartic = a2 * a2 - 6 * a2 * b2 + b2 * b2
    return (
        m20 + m02,
        a2 + b2,
        (m20 - m02) * (a2 - b2) + 4 * m11 * a * b,
        m11 * (a2 - b2) - (m20 - m02) * a * b,
        (m30 - 3 * m12) * a * (a2 - 3 * b2) + (m03 - 3 * m21) * b * (b2 - 3 * a2),
        # the printed sign of the second term breaks invariance; this is the
        # imaginary part of the same product whose real part is phi5
        (m30 - 3 * m12) * b * (b2 - 3 * a2) + (3 * m21 - m03) * a * (a2 - 3 * b2),
        m40 + 2 * m22 + m04,
        (m40 - m04) * (a2 - b2) + 4 * (m31 + m13) * a * b,
        # imaginary partner of phi8; the printed form lacks the second term
        (m31 + m13) * (a2 - b2) - (m40 - m04) * a * b,
        (m40 - 6 * m22 + m04) * quartic + 16 * (m31 - m13) * a * b * (a2 - b2),
        # imaginary partner of phi10, bracket sign as in the real part
        (m40 - 6 * m22 + m04) * a * b * (a2 - b2) - (m31 - m13) * quartic,
    )


def invariants(m: MomentVector) -> InvariantVector:
    """phi_1 .. phi_11 of ``m`` as given (no rescaling)."""
    return InvariantVector(tuple(float(v) for v in invariant_polynomials(m.as_dict())))


def rotation_invariants(m: MomentVector) -> InvariantVector:
    """Invariants of the unnormalized moments: unchanged when the image rotates."""
    return invariants(unnormalized(m))


def hermite_rotation(order: int, theta: float) -> np.ndarray:
    """``T`` with ``H_pq(R_theta u) = sum_r T[p, r] H_{r, order-r}(u)``, ``q = order - p``.

    Read off the generating function ``exp(2 <x, t> - |t|^2) =
    sum H_p(x) H_q(y) s^p t^q / (p! q!)``: rotating ``x`` is the same as
    rotating ``(s, t)`` the opposite way.
    """
    c, s = math.cos(theta), math.sin(theta)
    n = int(order)
    T = np.zeros((n + 1, n + 1))
    for r in range(n + 1):
        # (s', t') = R^T (s, t); expand s'^r t'^(n-r) as a polynomial in (s, t)
        poly = np.zeros((n + 1, n + 1))
        poly[0, 0] = 1.0
        for a, b, k in ((c, s, r), (-s, c, n - r)):
            for _ in range(k):
                nxt = np.zeros_like(poly)
                nxt[1:, :] += a * poly[:-1, :]
                nxt[:, 1:] += b * poly[:, :-1]
                poly = nxt
        for p in range(n + 1):
            T[p, r] = (math.factorial(p) * math.factorial(n - p) * poly[p, n - p]
                       / (math.factorial(r) * math.factorial(n - r)))
    return T


def rotate_moment_model(m: MomentVector, theta: float) -> MomentVector:
    """Moments of ``f o R_{-theta}`` (``f`` turned by ``theta``) from those of ``f``."""
    raw = unnormalized(m).as_dict()
    out = {}
    for order in (2, 3, 4):
        T = hermite_rotation(order, theta)
        v = np.array([raw[r, order - r] for r in range(order + 1)])
        w = T @ v
        for p in range(order + 1):
            out[p, order - p] = float(w[p])
    rotated = MomentVector.from_mapping(out, unnormalized=True)
    return rotated if m.unnormalized else orthonormal(rotated)


def rotate_image(pixels, theta: float) -> np.ndarray:
    """Turn a square image counterclockwise by ``theta`` about its center.

    Quarter turns permute pixels exactly; other angles resample bilinearly
    with zeros outside the image.
    """
    img = np.asarray(pixels, dtype=float)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise DimensionError(f"expected a square image, got shape {img.shape}")
    quarter = theta / (math.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < 1e-12:
        return np.rot90(img, k % 4).copy()
    return _bilinear_rotate(img, theta)


def _bilinear_rotate(img: np.ndarray, theta: float) -> np.ndarray:
    n = img.shape[0]
    center = (n - 1) / 2.0
    rows, cols = np.mgrid[0:n, 0:n].astype(float)
    x, y = cols - center, center - rows
    c, s = math.cos(theta), math.sin(theta)
    # source point R_{-theta} (x, y)
    src_col = c * x + s * y + center
    src_row = center - (-s * x + c * y)
    r0 = np.floor(src_row).astype(int)
    c0 = np.floor(src_col).astype(int)
    fr, fc = src_row - r0, src_col - c0
    padded = np.zeros((n + 2, n + 2))
    padded[1:-1, 1:-1] = img

    def at(r, cc):
        inside = (r >= -1) & (r <= n) & (cc >= -1) & (cc <= n)
        return np.where(inside, padded[np.clip(r + 1, 0, n + 1), np.clip(cc + 1, 0, n + 1)], 0.0)

    return ((1 - fr) * (1 - fc) * at(r0, c0) + (1 - fr) * fc * at(r0, c0 + 1)
            + fr * (1 - fc) * at(r0 + 1, c0) + fr * fc * at(r0 + 1, c0 + 1))


def quadrature_weights(M: int) -> np.ndarray:
    """Weights for integrating ``g(x) exp(-x^2)``-decaying products on the ``M`` Hermite
    zeros without the weight function: ``w_i exp(z_i^2)``, ascending in ``z``."""
    z, w = hermgauss(int(M))
    return w * np.exp(z * z)


def image_moments(pixels) -> MomentVector:
    """Orthonormal moments of an image on the mapped zero grid by direct summation.

    Each pixel contributes its value times the basis function at its node,
    times the tensor Gauss-Hermite cell weight; this integrates the image's
    interpolant exactly for degrees below ``2M``.
    """
    img = np.asarray(pixels, dtype=float)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise DimensionError(f"expected a square image, got shape {img.shape}")
    M = img.shape[0]
    grid = map_pixels_to_grid(M, M)
    lam = quadrature_weights(M)
    # pixel (r, c) sits at (z[c], z[M-1-r])
    weights = np.outer(lam[::-1], lam).reshape(-1)
    X = _moment_design(grid.nodes)
    return MomentVector(tuple(X.T @ (weights * img.reshape(-1))))


def sample_moments(values, M: int) -> MomentVector:
    """Orthonormal moments of samples on ``tensor_hermite_grid(M, 2)`` (row-major, x slowest)."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size != M * M:
        raise DimensionError(f"{v.size} samples for an {M}x{M} grid")
    lam = quadrature_weights(M)
    weights = np.outer(lam, lam).reshape(-1)
    X = _moment_design(tensor_hermite_grid(M, 2).nodes)
    return MomentVector(tuple(X.T @ (weights * v)))


def _moment_design(nodes: np.ndarray) -> np.ndarray:
    """Hermite functions of the twelve moment indices at ``nodes``, shape ``(m, 12)``."""
    tables = [orthonormal_table(Kind.HERMITE, 4, nodes[:, i]) for i in range(2)]
    idx = np.array(MOMENT_INDICES, dtype=np.intp)
    return (tensor_values(tables, idx) * envelope(Kind.HERMITE_FUNCTION, nodes)).T


def csv_rows(vectors: Sequence[InvariantVector], header: bool = True) -> str:
    lines = [CSV_HEADER] if header else []
    lines.extend(v.to_csv_row() for v in vectors)
    return "\n".join(lines) + "\n"
