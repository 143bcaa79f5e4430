import subprocess
import sys

import pytest

from sparsefourier import experiments as ex
from sparsefourier.basis import BasisFamily, Kind
from sparsefourier.cli import ERROR_GRID_HEADER, REPORT_HEADER, emit_error_grid, main
from sparsefourier.series import evaluate, series_from_text

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_approx_default(capsys):
    code, out, _ = run(capsys, "approx")
    lines = out.splitlines()
    assert code == 0 and lines[0] == ERROR_GRID_HEADER
    shape, N, M, err = lines[1].split(",")
    assert (shape, N, M) == ("Y", "5", "6") and float(err) <= 1e-8


def test_approx_sweep(capsys):
    code, out, _ = run(capsys, "approx", "--function", "f1", "--sweep", "--jobs", "4")
    rows = out.splitlines()[1:]
    assert code == 0 and len(rows) == 72
    keys = [tuple(r.split(",")[:3]) for r in rows]
    assert keys[0] == ("Y", "2", "1") and keys[-1] == ("S", "9", "10")
    assert len(set(keys)) == 72


def test_emit_error_grid_edges():
    assert emit_error_grid([]) == ERROR_GRID_HEADER + "\n"
    r = ex.run_experiment1("f1", "S", 2, 1)
    assert emit_error_grid([r]).splitlines() == [ERROR_GRID_HEADER, "S,2,1,3.0619e-01"]


def test_dump_indices(capsys, tmp_path):
    code, out, _ = run(capsys, "dump-indices", "--shape", "S", "--N", "3")
    assert code == 0
    assert out.splitlines() == ["0 0", "0 1", "0 2", "0 3", "1 0", "1 1", "2 0", "3 0"]
    path = tmp_path / "w.txt"
    code, _, _ = run(capsys, "approx", "--shape", "S", "--N", "3", "--M", "4",
                     "--dump-indices", str(path))
    assert code == 0 and path.read_text() == out


def test_series_output(capsys, tmp_path):
    path = tmp_path / "s.txt"
    code, _, _ = run(capsys, "approx", "--series", str(path))
    assert code == 0
    series = series_from_text(path.read_text(), BasisFamily(Kind.HERMITE, 2))
    assert len(series.indices) == 4
    assert evaluate(series, (1.0, 1.0)) == pytest.approx(1.0, abs=1e-8)
    assert evaluate(series, (0.5, -2.0)) == pytest.approx(1.0, abs=1e-8)
    assert run(capsys, "approx", "--sweep", "--series", str(path))[0] == 1


def test_classify_sigma_zero(capsys):
    code, out, _ = run(capsys, "classify", "--sigma", "0", "--trials", "1", "--seed", "42")
    lines = out.splitlines()
    assert code == 0 and lines[0] == REPORT_HEADER
    assert lines[1] == "0.00,gauss,1.0000,1.0000"


def test_classify_repeated_sigma(capsys):
    code, out, _ = run(capsys, "classify", "--noise", "bitflip", "--sigma", "0", "--sigma", "0.05",
                       "--trials", "1")
    assert code == 0 and [l.split(",")[0] for l in out.splitlines()[1:]] == ["0.00", "0.05"]


@pytest.mark.parametrize("argv", [
    ["approx", "--bogus"],
    ["approx", "--N", "1"],
    ["approx", "--M", "0"],
    ["approx", "--tol", "0"],
    ["classify", "--sigma", "2"],
    ["classify", "--sigma", "-0.1"],
    ["classify", "--seed", "-1"],
    ["nothing"],
    [],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and "error" in err


def test_numerical_failure(capsys):
    code, out, err = run(capsys, "approx", "--max-iters", "1")
    assert code == 2 and out.startswith(ERROR_GRID_HEADER)
    assert "did not converge for Y,5,6" in err


@pytest.mark.parametrize("command, flags", [
    ("approx", ["--function", "--shape", "--N", "--M", "--delta", "--tol", "--max-iters",
                "--sweep", "--dump-indices", "--series", "--jobs", "--out", "--no-figures"]),
    ("classify", ["--train", "--noise", "--sigma", "--trials", "--seed", "--jobs", "--shape",
                  "--N", "--delta", "--out", "--no-figures"]),
    ("moments", ["--train", "--shape", "--N", "--delta", "--out"]),
    ("bench", ["--trials", "--seed", "--tol", "--max-iters"]),
])
def test_help_lists_flags(capsys, command, flags):
    code, out, _ = run(capsys, command, "--help")
    assert code == 0
    for flag in flags:
        assert flag in out
    assert "default" in out


def test_out_writes_csv_and_figure(capsys, tmp_path):
    out = tmp_path / "run" / "grid.csv"
    code, stdout, _ = run(capsys, "approx", "--shape", "T", "--N", "3", "--M", "4", "--out", str(out))
    assert code == 0 and stdout == ""
    assert out.read_text().startswith(ERROR_GRID_HEADER)
    fig = tmp_path / "run" / "grid_errors.png"
    first = fig.read_bytes()
    assert first.startswith(PNG_MAGIC)
    text = out.read_text()
    run(capsys, "approx", "--shape", "T", "--N", "3", "--M", "4", "--out", str(out))
    assert out.read_text() == text and fig.read_bytes() == first

    bare = tmp_path / "bare.csv"
    run(capsys, "approx", "--out", str(bare), "--no-figures")
    assert bare.exists() and not (tmp_path / "bare_errors.png").exists()


def test_moments_from_training_dir(capsys, tmp_path):
    from sparsefourier.images import write_pgm

    training = ex.standin_training_set()
    for label, pixels in training.images[:2]:
        write_pgm(tmp_path / f"g{label}.pgm", pixels)
    out = tmp_path / "m.csv"
    code, _, _ = run(capsys, "moments", "--train", str(tmp_path), "--out", str(out))
    lines = out.read_text().splitlines()
    assert code == 0 and len(lines) == 3
    assert lines[0].startswith("label,")
    assert (tmp_path / "m_images.png").read_bytes().startswith(PNG_MAGIC)
    assert (tmp_path / "m_distances.png").read_bytes().startswith(PNG_MAGIC)


def test_bench_small(capsys):
    code, out, _ = run(capsys, "bench", "--trials", "3", "--seed", "5")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4 and lines[0].endswith("bound_4mp")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sparsefourier", "dump-indices", "--shape", "T",
                           "--N", "1"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.splitlines() == ["0 0", "0 1", "1 0"]
