import numpy as np

from sparsefourier import experiments as ex
from sparsefourier.plotting import (
    plot_classification, plot_distance_matrix, plot_error_grid, plot_images,
)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_figures(tmp_path):
    results = [ex.run_experiment1("f1", s, N, N + dm) for s in ("Y", "S") for N in (2, 3)
               for dm in (-1, 0, 1)]
    training = ex.standin_training_set()
    reports = ex.run_experiment2("gauss", [0.0, 0.1], trials=1, training=training)
    paths = [
        plot_error_grid(results, tmp_path / "a.png"),
        plot_classification(reports, tmp_path / "b.png"),
        plot_distance_matrix(np.arange(49.0).reshape(7, 7), training.labels, tmp_path / "c.png"),
        plot_images(training.pixels, training.labels, tmp_path / "d" / "e.png"),
    ]
    for p in paths:
        assert p.read_bytes().startswith(PNG_MAGIC)


def test_zero_error_is_plottable(tmp_path):
    r = ex.run_experiment1("f1", "Y", 5, 6)
    exact = ex.ApproxResult(r.function, r.shape, r.N, r.M,
                            r.error.__class__(0.0, 0.0, True), True, 1)
    assert plot_error_grid([exact], tmp_path / "z.png").exists()
