"""Command-line interface: ``sparsefourier <subcommand> [flags]``.

Results go to stdout as CSV, or to ``--out``; with ``--out`` the matching
figures are rendered next to the CSV file unless ``--no-figures`` is given.
Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from . import experiments as ex
from .basis import BasisFamily, Kind
from .dantzig import SolverConfig
from .errors import SparseFourierError
from .indexsets import Shape, build, to_text
from .series import SparseSeries, write_series

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
ERROR_GRID_HEADER = "shape,N,M,l2_error"
REPORT_HEADER = "sigma,kind,identified,categorized"
BENCH_HEADER = ("instance,m,p,delta,l1,l1_oracle,relative_gap,residual,converged,"
                "iterations,mults_per_iteration,bound_4mp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def emit_error_grid(results: Sequence[ex.ApproxResult]) -> str:
    """CSV of coefficient errors, ordered by shape, then N, then M."""
    order = {s: i for i, s in enumerate((Shape.RECTANGULAR, Shape.TRIANGULAR, Shape.HYPERBOLIC_CROSS))}
    rows = sorted(results, key=lambda r: (order[r.shape], r.N, r.M))
    lines = [ERROR_GRID_HEADER]
    lines += [f"{r.shape.value},{r.N},{r.M},{r.l2_error:.4e}" for r in rows]
    return "\n".join(lines) + "\n"


def emit_reports(reports: Sequence[ex.ClassificationReport]) -> str:
    lines = [REPORT_HEADER]
    lines += [f"{r.sigma:.2f},{r.kind.value},{r.identified_ratio:.4f},{r.categorized_ratio:.4f}"
              for r in reports]
    return "\n".join(lines) + "\n"


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonnegative_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _solver_flags(p, delta):
    p.add_argument("--delta", type=_nonnegative_float, default=delta,
                   help="Dantzig-selector constraint level")
    p.add_argument("--tol", type=float, default=1e-9, help="solver optimality tolerance")
    p.add_argument("--max-iters", type=_positive_int, default=200_000, help="solver iteration cap")


def _output_flags(p):
    p.add_argument("--out", type=Path, default=None, help="write CSV here instead of stdout")
    p.add_argument("--no-figures", action="store_true",
                   help="with --out, skip the PNG figures written next to the CSV")


def _index_flags(p, shape, N):
    p.add_argument("--shape", choices=[s.value for s in Shape], default=shape, help="index-set shape")
    p.add_argument("--N", type=int, default=N, help="index-set order")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="sparsefourier", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("approx", formatter_class=fmt,
                       help="recover Hermite coefficients of a test function")
    p.add_argument("--function", choices=["f1", "f2", "f3"], default="f1", help="test function")
    _index_flags(p, "Y", 5)
    p.add_argument("--M", type=_positive_int, default=6, help="zeros per axis of the collocation grid")
    p.add_argument("--sweep", action="store_true",
                   help="run every shape, N = 2..9 and M = N-1, N, N+1 instead of one cell")
    p.add_argument("--dump-indices", type=Path, default=None, metavar="PATH",
                   help="also write the index set used, one multi-index per line")
    p.add_argument("--series", type=Path, default=None, metavar="PATH",
                   help="also write the recovered series (single cell only), one term per line; "
                        "entries below 10*tol count as zeros")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for --sweep")
    _solver_flags(p, ex.EXPERIMENT1_DELTA)
    _output_flags(p)

    p = sub.add_parser("moments", formatter_class=fmt,
                       help="rotation invariants of the training images")
    p.add_argument("--train", type=Path, default=None,
                   help="directory of square P5 PGM images (default: built-in stand-ins)")
    _index_flags(p, "T", 20)
    _solver_flags(p, 1e-8)
    _output_flags(p)

    p = sub.add_parser("classify", formatter_class=fmt,
                       help="classify rotated, noisy copies of the training images")
    p.add_argument("--train", type=Path, default=None,
                   help="directory of square P5 PGM images (default: built-in stand-ins)")
    p.add_argument("--noise", choices=[k.value for k in ex.NoiseKind], default="gauss",
                   help="noise model")
    p.add_argument("--sigma", type=_nonnegative_float, action="append", default=None,
                   help="noise level, repeatable (default: 0, 0.05, ..., 0.25)")
    p.add_argument("--trials", type=_positive_int, default=50, help="noisy testing sets per sigma")
    p.add_argument("--seed", type=_seed, default=0, help="random seed")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes over sigma")
    _index_flags(p, "T", 20)
    _solver_flags(p, 1e-8)
    _output_flags(p)

    p = sub.add_parser("bench", formatter_class=fmt,
                       help="solver against the interior-point oracle on random instances")
    p.add_argument("--trials", type=_positive_int, default=100, help="number of random instances")
    p.add_argument("--seed", type=_seed, default=1, help="random seed")
    p.add_argument("--tol", type=float, default=1e-9, help="solver optimality tolerance")
    p.add_argument("--max-iters", type=_positive_int, default=200_000, help="solver iteration cap")
    _output_flags(p)

    p = sub.add_parser("dump-indices", formatter_class=fmt, help="list an index set")
    _index_flags(p, "Y", 5)
    p.add_argument("--d", type=_positive_int, default=2, help="dimension")
    p.add_argument("--out", type=Path, default=None, help="write here instead of stdout")
    return parser


def _config(args) -> SolverConfig:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    return SolverConfig(delta=args.delta, max_iters=args.max_iters, tol=args.tol)


def _figure_path(args, suffix: str) -> Path | None:
    if args.out is None or args.no_figures:
        return None
    return args.out.with_name(f"{args.out.stem}{suffix}.png")


def _approx_cell(job):
    function, shape, N, M, config = job
    return ex.run_experiment1(function, shape, N, M, config)


def _cmd_approx(args, out) -> int:
    if args.N < 2:
        raise UsageError("--N must be at least 2")
    config = _config(args)
    if args.sweep:
        jobs = [(args.function, s, N, N + dm, config)
                for s in ("Y", "T", "S") for N in range(2, 10) for dm in (-1, 0, 1)]
    else:
        jobs = [(args.function, args.shape, args.N, args.M, config)]
    if args.series is not None and args.sweep:
        raise UsageError("--series needs a single cell, not --sweep")
    if args.dump_indices is not None:
        args.dump_indices.write_text(to_text(build(args.shape, args.N, 2)))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_approx_cell, jobs))
    else:
        results = [_approx_cell(j) for j in jobs]
    out.write(emit_error_grid(results))
    if args.series is not None:
        write_series(SparseSeries.from_coefficients(
            BasisFamily(Kind.HERMITE, 2), build(args.shape, args.N, 2), results[0].coefficients,
            threshold=10 * config.tol), args.series)
    fig = _figure_path(args, "_errors")
    if fig is not None:
        from .plotting import plot_error_grid

        plot_error_grid(results, fig)
    stalled = [f"{r.shape.value},{r.N},{r.M}" for r in results if not r.converged]
    if stalled:
        print(f"solver did not converge for {' '.join(stalled)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _training(args) -> ex.Dataset:
    return ex.load_training_set(args.train) if args.train else ex.standin_training_set()


def _cmd_moments(args, out) -> int:
    from .moments import CSV_HEADER

    training = _training(args)
    pipeline = ex.Pipeline(args.shape, args.N, _config(args))
    feats = ex.FeatureExtractor(pipeline, training.M)(training.pixels)
    out.write("label," + CSV_HEADER + "\n")
    for label, phi in zip(training.labels, feats):
        out.write(f"{label}," + ",".join(f"{v:.10e}" for v in phi) + "\n")
    fig = _figure_path(args, "_images")
    if fig is not None:
        from .plotting import plot_distance_matrix, plot_images

        plot_images(training.pixels, training.labels, fig)
        dist = np.abs(feats[:, None, :] - feats[None, :, :]).sum(axis=2)
        plot_distance_matrix(dist, training.labels, _figure_path(args, "_distances"))
    return EXIT_OK


def _cmd_classify(args, out) -> int:
    training = _training(args)
    sigmas = args.sigma if args.sigma is not None else list(ex.DEFAULT_SIGMAS)
    if any(s > 1 for s in sigmas):
        raise UsageError("--sigma must lie in [0, 1]")
    pipeline = ex.Pipeline(args.shape, args.N, _config(args))
    reports = ex.run_experiment2(args.noise, sigmas, args.trials, args.seed, training=training,
                                 pipeline=pipeline, jobs=args.jobs)
    out.write(emit_reports(reports))
    fig = _figure_path(args, "_ratios")
    if fig is not None:
        from .plotting import plot_classification

        plot_classification(reports, fig)
    return EXIT_OK


def _cmd_bench(args, out) -> int:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    rows = ex.run_benchmark(args.trials, args.seed, args.max_iters, args.tol)
    out.write(BENCH_HEADER + "\n")
    for r in rows:
        out.write(f"{r.instance},{r.m},{r.p},{r.delta:g},{r.l1:.10e},{r.l1_oracle:.10e},"
                  f"{r.relative_gap:.3e},{r.residual:.3e},{int(r.converged)},{r.iterations},"
                  f"{r.mults_per_iteration:.0f},{4 * r.m * r.p}\n")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_NUMERICAL


def _cmd_dump_indices(args, out) -> int:
    if args.N < 0:
        raise UsageError("--N must be nonnegative")
    out.write(to_text(build(args.shape, args.N, args.d)))
    return EXIT_OK


_COMMANDS = {
    "approx": _cmd_approx,
    "moments": _cmd_moments,
    "classify": _cmd_classify,
    "bench": _cmd_bench,
    "dump-indices": _cmd_dump_indices,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    buffer = io.StringIO()
    try:
        code = _COMMANDS[args.command](args, buffer)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SparseFourierError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stdout.write(buffer.getvalue())
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = buffer.getvalue()
    if getattr(args, "out", None) is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
