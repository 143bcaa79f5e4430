import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsefourier.collocation import system_from_matrix
from sparsefourier.dantzig import (
    MultiplicationCounter, SolverConfig, residual, soft_threshold, solve, solve_many,
)
from sparsefourier.errors import NumericalBreakdown
from sparsefourier.lp import lp_oracle

seeds = st.integers(0, 2**32 - 1)


def random_system(seed, m=None, p=None):
    rng = np.random.default_rng(seed)
    m = m or int(rng.integers(3, 11))
    p = p or int(rng.integers(3, 21))
    return system_from_matrix(rng.standard_normal((m, p)), rng.standard_normal(m))


def test_identity_delta_zero():
    f = np.array([0.3, -2.0, 1.25, 0.0])
    r = solve(system_from_matrix(np.eye(4), f), SolverConfig(delta=0.0))
    assert r.converged
    np.testing.assert_allclose(r.coefficients, f, atol=1e-9)


@pytest.mark.parametrize("delta", [0.0, 0.05, 0.3, 1.0])
def test_orthonormal_columns_soft_threshold(delta):
    rng = np.random.default_rng(11)
    Q, _ = np.linalg.qr(rng.standard_normal((8, 5)))
    f = rng.standard_normal(8)
    sys_ = system_from_matrix(Q, f)
    r = solve(sys_, SolverConfig(delta=delta))
    expected = soft_threshold(Q.T @ f, delta)
    np.testing.assert_allclose(r.coefficients, expected, atol=1e-8)
    np.testing.assert_allclose(lp_oracle(sys_, delta), expected, atol=1e-8)


def test_zero_samples():
    sys_ = system_from_matrix(np.random.default_rng(0).standard_normal((5, 9)), np.zeros(5))
    r = solve(sys_, SolverConfig(delta=0.1))
    assert r.converged and r.iterations == 0
    assert not r.coefficients.any()


def test_residual_examples():
    sys_ = system_from_matrix(np.eye(2), [3.0, -1.0])
    assert residual(sys_, [1.0, 0.0]) == 2.0
    assert residual(sys_, [3.0, -1.0]) == 0.0
    X = np.random.default_rng(2).standard_normal((4, 6))
    f = np.arange(4.0)
    s = system_from_matrix(X, f)
    assert residual(s, np.zeros(6)) == pytest.approx(np.max(np.abs(X.T @ f / s.D)), rel=1e-15)


def test_soft_threshold():
    np.testing.assert_array_equal(soft_threshold(np.array([-3.0, -0.5, 0.0, 0.5, 2.0]), 1.0),
                                  [-2.0, 0.0, 0.0, 0.0, 1.0])


def test_iteration_cap_reports_unconverged():
    r = solve(random_system(5, 8, 15), SolverConfig(delta=0.01, max_iters=3))
    assert not r.converged
    assert r.iterations <= 3


def test_non_finite_samples():
    sys_ = random_system(1)
    with pytest.raises(NumericalBreakdown) as info:
        solve_many(sys_, np.full(sys_.m, np.nan))
    assert info.value.iteration == 0


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(delta=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(step_params=(0.0, 1.0))


def test_step_condition_checked():
    sys_ = random_system(4, 6, 10)
    with pytest.raises(ValueError, match="step sizes"):
        solve(sys_, SolverConfig(delta=0.1, step_params=(10.0, 10.0)))
    r = solve(sys_, SolverConfig(delta=0.1, step_params=(0.05, 0.05), max_iters=400_000))
    ref = np.abs(lp_oracle(sys_, 0.1)).sum()
    assert r.converged and r.l1_norm == pytest.approx(ref, rel=1e-4)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, delta=st.sampled_from([0.0, 0.01, 0.1, 1.0]))
def test_matches_oracle(seed, delta):
    sys_ = random_system(seed)
    r = solve(sys_, SolverConfig(delta=delta))
    ref = float(np.abs(lp_oracle(sys_, delta)).sum())
    assert r.converged
    assert abs(r.l1_norm - ref) <= 1e-4 * max(1.0, ref)
    assert r.residual_inf <= delta + 1e-6


@settings(max_examples=25, deadline=None)
@given(seed=seeds, delta=st.sampled_from([0.01, 0.1, 1.0]))
def test_converged_implies_feasible(seed, delta):
    cfg = SolverConfig(delta=delta)
    sys_ = random_system(seed)
    r = solve(sys_, cfg)
    if r.converged:
        assert r.residual_inf <= delta + cfg.tol
        assert residual(sys_, r.coefficients) == pytest.approx(r.residual_inf, rel=1e-12, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, alpha=st.floats(0.1, 10.0), delta=st.sampled_from([0.01, 0.1]))
def test_scaling_covariance(seed, alpha, delta):
    # (X, alpha f) with alpha delta has solution alpha c
    sys_ = random_system(seed)
    a = solve(sys_, SolverConfig(delta=delta))
    b = solve(sys_.with_samples(alpha * sys_.f), SolverConfig(delta=alpha * delta))
    assert b.l1_norm == pytest.approx(alpha * a.l1_norm, rel=1e-5, abs=1e-8)
    assert b.residual_inf <= alpha * delta + 1e-6


def test_batch_equals_single():
    sys_ = random_system(7, 9, 14)
    rng = np.random.default_rng(8)
    F = rng.standard_normal((9, 3))
    cfg = SolverConfig(delta=0.05)
    batch = solve_many(sys_, F, cfg)
    for j, r in enumerate(batch):
        single = solve(sys_.with_samples(F[:, j]), cfg)
        assert r.l1_norm == pytest.approx(single.l1_norm, rel=1e-6)


@pytest.mark.parametrize("m, p", [(3, 20), (10, 3), (10, 20), (50, 30)])
def test_multiplication_count(m, p):
    counter = MultiplicationCounter()
    solve(random_system(m * p, m, p), SolverConfig(delta=0.01), counter)
    assert counter.iteration_count > 0
    assert counter.per_iteration <= 4 * m * p + 16 * (m + p)


def test_deterministic():
    sys_ = random_system(99)
    a = solve(sys_, SolverConfig(delta=0.1))
    b = solve(sys_, SolverConfig(delta=0.1))
    assert a.coefficients.tobytes() == b.coefficients.tobytes()


def test_rank_deficient_zero_delta_certificate():
    # 5 x 9 at delta = 0: duals with a huge null-space part once certified a
    # point 19% above the optimum
    sys_ = random_system(34912)
    r = solve(sys_, SolverConfig(delta=0.0))
    ref = float(np.abs(lp_oracle(sys_, 0.0)).sum())
    assert r.converged
    assert abs(r.l1_norm - ref) <= 1e-6 * max(1.0, ref)
