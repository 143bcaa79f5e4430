"""The two numerical experiments: coefficient recovery and rotated-image classification."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from . import images as img_io
from .basis import BasisFamily, Kind
from .collocation import assemble, map_pixels_to_grid, system_from_matrix, tensor_hermite_grid
from .dantzig import MultiplicationCounter, SolverConfig, solve, solve_many
from .errors import DimensionError, DomainError, UnsupportedShapeError
from .indexsets import Shape, build
from .moments import moments_from_coefficients, rotate_image, rotation_invariants
from .series import CoefficientError, TestFunction, coefficient_error, raw_scale, reference_coefficients

EXPERIMENT1_DELTA = 1e-10
DEFAULT_THETAS = tuple(k * math.pi / 4 for k in range(8))
DEFAULT_SIGMAS = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25)


# ---------------------------------------------------------------- experiment 1

@dataclass(frozen=True)
class ApproxResult:
    function: str
    shape: Shape
    N: int
    M: int
    error: CoefficientError
    converged: bool
    iterations: int
    coefficients: np.ndarray = field(repr=False, compare=False, default=None)  # orthonormal scale

    @property
    def l2_error(self) -> float:
        return self.error.l2


def run_experiment1(function, shape, N: int, M: int,
                    solver_config: SolverConfig | None = None) -> ApproxResult:
    """Recover the Hermite coefficients of a test function from its values on the
    ``M x M`` zero grid and compare with the exact ones on the same index set.

    Errors are measured on coefficients of the unnormalized Hermite
    polynomials ``H_{n1}(x) H_{n2}(y)``.
    """
    fn = TestFunction(function)
    shape = Shape.parse(shape)
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    if M < 1:
        raise ValueError(f"M must be at least 1, got {M}")
    config = solver_config or SolverConfig(delta=EXPERIMENT1_DELTA)
    family = BasisFamily(Kind.HERMITE, 2)
    W = build(shape, N, 2)
    grid = tensor_hermite_grid(M, 2)
    samples = fn(grid.nodes[:, 0], grid.nodes[:, 1])
    # with M <= N some polynomials vanish on every node; their columns are dropped
    system = assemble(family, W, grid, samples, allow_degenerate=True)
    result = solve(system, config)
    scale = raw_scale(Kind.HERMITE, W)
    reference = {n: v * scale[W.position(n)] for n, v in reference_coefficients(fn, W).items()}
    error = coefficient_error(result.coefficients * scale, reference, W)
    return ApproxResult(fn.value, shape, int(N), int(M), error, result.converged, result.iterations,
                        result.coefficients)


def sweep_experiment1(function, shapes=("Y", "T", "S"), Ns=range(2, 10), offsets=(-1, 0, 1),
                      solver_config: SolverConfig | None = None) -> list[ApproxResult]:
    """The Table-2 grid for one function, ordered shape, N, M."""
    out = []
    for shape in shapes:
        for N in Ns:
            for dm in offsets:
                if N + dm >= 1:
                    out.append(run_experiment1(function, shape, N, N + dm, solver_config))
    return out


# ---------------------------------------------------------------- experiment 2

@dataclass(frozen=True)
class Dataset:
    """Labelled square images with values in [0, 1]."""

    images: tuple[tuple[int, np.ndarray], ...]
    M: int

    def __post_init__(self):
        items = []
        for label, pixels in self.images:
            a = np.array(pixels, dtype=float)
            if a.shape != (self.M, self.M):
                raise UnsupportedShapeError(f"image {label} has shape {a.shape}, expected {self.M}x{self.M}")
            if not np.all(np.isfinite(a)) or a.min(initial=0.0) < 0.0 or a.max(initial=0.0) > 1.0:
                raise DomainError(f"image {label} must hold values in [0, 1]")
            a.setflags(write=False)
            items.append((int(label), a))
        object.__setattr__(self, "images", tuple(items))

    @classmethod
    def from_images(cls, pixels: Sequence, labels: Sequence[int] | None = None) -> "Dataset":
        pixels = [np.asarray(p, dtype=float) for p in pixels]
        if not pixels:
            raise ValueError("a dataset needs at least one image")
        labels = list(range(1, len(pixels) + 1)) if labels is None else list(labels)
        return cls(tuple(zip(labels, pixels)), pixels[0].shape[0])

    def __len__(self) -> int:
        return len(self.images)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(label for label, _ in self.images)

    @property
    def pixels(self) -> list[np.ndarray]:
        return [p for _, p in self.images]


def standin_training_set() -> Dataset:
    return Dataset.from_images(img_io.standin_glyphs())


def load_training_set(path) -> Dataset:
    """Every ``*.pgm`` in a directory, in name order, labelled 1..K."""
    files = sorted(Path(path).glob("*.pgm"))
    if not files:
        raise FileNotFoundError(f"no .pgm images in {path}")
    return Dataset.from_images([img_io.read_pgm(f) for f in files])


class NoiseKind(str, Enum):
    WHITE_GAUSSIAN = "gauss"
    BIT_FLIP = "bitflip"


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind
    sigma: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not (0.0 <= self.sigma <= 1.0):
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def noise_rng(seed: int, trial: int, image: int) -> np.random.Generator:
    """PCG64 stream for one test image of one trial.  The same stream serves
    every sigma, so noise realizations are nested as sigma grows."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(trial, image))))


def apply_noise(pixels, kind: NoiseKind, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """White noise is added and clamped to [0, 1]; bit-flip inverts each pixel
    with probability ``sigma``."""
    v = np.asarray(pixels, dtype=float)
    kind = NoiseKind(kind)
    if kind is NoiseKind.WHITE_GAUSSIAN:
        return np.clip(v + sigma * rng.standard_normal(v.shape), 0.0, 1.0)
    return np.where(rng.random(v.shape) < sigma, 1.0 - v, v)


def make_testing_set(training: Dataset, thetas: Sequence[float], noise: NoiseSpec,
                     trial: int = 0) -> Dataset:
    """Each training image turned by each angle, then noised.  Images are
    ordered training-major, angle-minor."""
    if len(training) == 0:
        raise ValueError("training set is empty")
    out = []
    for i, (label, pixels) in enumerate(training.images):
        for j, theta in enumerate(thetas):
            rotated = rotate_image(pixels, theta)
            if noise.sigma > 0:
                rng = noise_rng(noise.seed, trial, i * len(thetas) + j)
                rotated = apply_noise(rotated, noise.kind, noise.sigma, rng)
            out.append((label, rotated))
    return Dataset(tuple(out), training.M)


@dataclass(frozen=True)
class Pipeline:
    """Feature extraction: Hermite-function fit over ``shape`` of order ``N``."""

    shape: Shape = Shape.TRIANGULAR
    N: int = 20
    solver_config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape.parse(self.shape))


class FeatureExtractor:
    """Invariant vectors of images sharing one size; the system is built once."""

    def __init__(self, pipeline: Pipeline, M: int):
        self.pipeline = pipeline
        self.M = int(M)
        self.basis = BasisFamily(Kind.HERMITE_FUNCTION, 2)
        self.indexset = build(pipeline.shape, pipeline.N, 2)
        grid = map_pixels_to_grid(self.M, self.M)
        self.system = assemble(self.basis, self.indexset, grid, np.zeros(self.M * self.M))

    def __call__(self, pixels: Sequence[np.ndarray]) -> np.ndarray:
        """Array of shape ``(len(pixels), 11)``."""
        if not len(pixels):
            return np.zeros((0, 11))
        F = np.stack([np.asarray(p, dtype=float).reshape(-1) for p in pixels], axis=1)
        if F.shape[0] != self.M * self.M:
            raise DimensionError(f"images must be {self.M}x{self.M}")
        results = solve_many(self.system, F, self.pipeline.solver_config)
        return np.array([
            rotation_invariants(moments_from_coefficients(r, self.indexset, self.basis)).phi
            for r in results
        ])


def nearest_labels(train_features: np.ndarray, train_labels: Sequence[int],
                   features: np.ndarray) -> np.ndarray:
    """l1 nearest neighbour; ties go to the lowest label."""
    order = np.argsort(np.asarray(train_labels), kind="stable")
    T = train_features[order]
    labels = np.asarray(train_labels)[order]
    dist = np.abs(features[:, None, :] - T[None, :, :]).sum(axis=2)
    return labels[np.argmin(dist, axis=1)]


def classify(train: Dataset, test_image, pipeline: Pipeline | None = None) -> int:
    pipeline = pipeline or Pipeline()
    if len(train) == 0:
        raise ValueError("training set is empty")
    if len(set(train.labels)) != len(train):
        raise ValueError("training labels must be distinct")
    extract = FeatureExtractor(pipeline, train.M)
    feats = extract(train.pixels + [np.asarray(test_image, dtype=float)])
    return int(nearest_labels(feats[:-1], train.labels, feats[-1:])[0])


@dataclass(frozen=True)
class ClassificationReport:
    kind: NoiseKind
    sigma: float
    identified_ratio: float
    categorized_ratio: float
    confusion: np.ndarray  # [true, predicted] counts, labels in training order
    per_theta: tuple[tuple[float, float], ...]  # (theta, identified ratio)
    trials: int

    def __post_init__(self):
        for r in (self.identified_ratio, self.categorized_ratio):
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"ratio {r} outside [0, 1]")


def default_groups(labels: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    if tuple(labels) == tuple(range(1, 8)):
        return img_io.GLYPH_GROUPS
    return tuple((label,) for label in labels)


def _evaluate_sigma(training: Dataset, kind: NoiseKind, sigma: float, trials: int, seed: int,
                    thetas: tuple[float, ...], pipeline: Pipeline,
                    groups: tuple[tuple[int, ...], ...]) -> ClassificationReport:
    extract = FeatureExtractor(pipeline, training.M)
    train_feats = extract(training.pixels)
    labels = list(training.labels)
    tests = [make_testing_set(training, thetas, NoiseSpec(kind, sigma, seed), trial)
             for trial in range(trials)]
    feats = extract([p for t in tests for p in t.pixels])
    truth = np.array([label for t in tests for label in t.labels])
    pred = nearest_labels(train_feats, labels, feats)
    category = {label: g for g, members in enumerate(groups) for label in members}
    same_cat = np.array([category.get(a, -a) == category.get(b, -b) for a, b in zip(truth, pred)])
    hit = pred == truth
    pos = {label: i for i, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=int)
    for a, b in zip(truth, pred):
        confusion[pos[a], pos[b]] += 1
    theta_of = np.tile(np.arange(len(thetas)), len(training) * trials)
    per_theta = tuple((float(th), float(np.mean(hit[theta_of == j]))) for j, th in enumerate(thetas))
    return ClassificationReport(kind, float(sigma), float(np.mean(hit)), float(np.mean(same_cat)),
                                confusion, per_theta, trials)


def run_experiment2(noise_kind, sigma_list: Sequence[float] = DEFAULT_SIGMAS, trials: int = 50,
                    seed: int = 0, *, training: Dataset | None = None,
                    thetas: Sequence[float] = DEFAULT_THETAS, pipeline: Pipeline | None = None,
                    groups=None, jobs: int = 1) -> list[ClassificationReport]:
    """One report per sigma, each pooled over ``trials`` noisy testing sets.

    Every trial contributes the same number of test images, so the pooled
    ratio equals the mean of the per-trial ratios.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    kind = NoiseKind(noise_kind)
    training = training or standin_training_set()
    if len(set(training.labels)) != len(training):
        raise ValueError("training labels must be distinct")
    pipeline = pipeline or Pipeline()
    groups = tuple(tuple(g) for g in (groups or default_groups(training.labels)))
    thetas = tuple(float(t) for t in thetas)
    args = [(training, kind, float(s), int(trials), int(seed), thetas, pipeline, groups)
            for s in sigma_list]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate_sigma, *zip(*args)))
    return [_evaluate_sigma(*a) for a in args]


# ---------------------------------------------------------------- solver benchmark

BENCH_DELTAS = (0.01, 0.1, 1.0)


def random_instance(rng: np.random.Generator, index: int = 0):
    """Gaussian ``X`` of 3-10 rows and 3-20 columns with a Gaussian right-hand
    side; delta cycles through ``BENCH_DELTAS``."""
    m = int(rng.integers(3, 11))
    p = int(rng.integers(3, 21))
    X = rng.standard_normal((m, p))
    f = rng.standard_normal(m)
    return system_from_matrix(X, f), BENCH_DELTAS[index % len(BENCH_DELTAS)]


@dataclass(frozen=True)
class BenchRow:
    instance: int
    m: int
    p: int
    delta: float
    l1: float
    l1_oracle: float
    relative_gap: float
    residual: float
    converged: bool
    iterations: int
    mults_per_iteration: float

    @property
    def passed(self) -> bool:
        return (self.converged and self.relative_gap <= 1e-4
                and self.residual <= self.delta + 1e-6)


def run_benchmark(trials: int = 100, seed: int = 1, max_iters: int = 200_000,
                  tol: float = 1e-9) -> list[BenchRow]:
    """Solver against the interior-point oracle on random small instances."""
    from .lp import lp_oracle

    rng = np.random.default_rng(seed)
    rows = []
    for i in range(trials):
        system, delta = random_instance(rng, i)
        reference = float(np.sum(np.abs(lp_oracle(system, delta))))
        counter = MultiplicationCounter()
        r = solve(system, SolverConfig(delta=delta, max_iters=max_iters, tol=tol), counter)
        gap = abs(r.l1_norm - reference) / max(1.0, reference)
        rows.append(BenchRow(i, system.m, system.p, delta, r.l1_norm, reference, gap,
                             r.residual_inf, r.converged, r.iterations, counter.per_iteration))
    return rows
