"""Reference linear-programming solver for the Dantzig selector.

Used as an independent oracle for the first-order solver in
:mod:`sparsefourier.dantzig`, so it shares nothing with it beyond the
collocation system.  The selector is written as the standard-form LP::

    minimize  1^T u + 1^T v
    subject to  A u - A v + t1 = b + delta
               -A u + A v + t2 = delta - b
                u, v, t1, t2 >= 0

with ``A = D^{-1} X^T X`` and ``b = D^{-1} X^T f``, and solved by a dense
Mehrotra predictor-corrector interior-point method on the normal equations.
Intended for small systems only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collocation import CollocationSystem
from .errors import CapacityError, InfeasibleError

MAX_ORACLE_P = 200


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int
    primal_infeasibility: float
    dual_infeasibility: float
    gap: float


def _solve_normal(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        # near the solution M can lose definiteness to rounding
        reg = 1e-14 * max(float(np.max(np.abs(np.diag(M)))), 1.0)
        try:
            L = np.linalg.cholesky(M + reg * np.eye(M.shape[0]))
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(M, rhs, rcond=None)[0]
    y = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, y)


def _step_length(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not neg.any():
        return 1.0
    return min(1.0, float(np.min(-x[neg] / dx[neg])))


def solve_standard_lp(A: np.ndarray, b: np.ndarray, cost: np.ndarray, *,
                      tol: float = 1e-11, accept_tol: float = 1e-8,
                      max_iters: int = 200) -> LPResult:
    """``min cost^T x  s.t.  A x = b, x >= 0`` by Mehrotra's method.

    Stops once the relative primal, dual and gap measures are all below
    ``tol``.  If rounding stalls the iteration first, the best iterate seen is
    returned provided it meets ``accept_tol``; otherwise InfeasibleError.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = A.shape

    # starting point (Nocedal and Wright, section 14.2)
    AAT = A @ A.T
    x = A.T @ _solve_normal(AAT, b)
    lam = _solve_normal(AAT, A @ cost)
    s = cost - A.T @ lam
    x = x + max(-1.5 * float(x.min()), 0.0)
    s = s + max(-1.5 * float(s.min()), 0.0)
    xs = float(x @ s)
    x = x + 0.5 * xs / max(float(s.sum()), 1e-300)
    s = s + 0.5 * xs / max(float(x.sum()), 1e-300)
    x = np.maximum(x, 1e-12)
    s = np.maximum(s, 1e-12)

    bnorm = 1.0 + float(np.linalg.norm(b))
    cnorm = 1.0 + float(np.linalg.norm(cost))
    best = None
    for it in range(1, max_iters + 1):
        rb = A @ x - b
        rc = A.T @ lam + s - cost
        mu = float(x @ s) / n
        pobj, dobj = float(cost @ x), float(b @ lam)
        p_inf = float(np.linalg.norm(rb)) / bnorm
        d_inf = float(np.linalg.norm(rc)) / cnorm
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        if best is None or max(p_inf, d_inf, gap) < best[0]:
            best = (max(p_inf, d_inf, gap), LPResult(x.copy(), pobj, it, p_inf, d_inf, gap))
        if p_inf <= tol and d_inf <= tol and gap <= tol:
            return best[1]
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(lam))) or float(np.max(x)) > 1e15:
            break

        w = x / s
        M = (A * w) @ A.T

        def direction(rxs):
            # A dx = -rb,  A^T dlam + ds = -rc,  s dx + x ds = rxs
            dlam = _solve_normal(M, -rb - A @ ((rxs + x * rc) / s))
            ds = -rc - A.T @ dlam
            dx = (rxs - x * ds) / s
            return dx, dlam, ds

        # predictor
        dx_a, dl_a, ds_a = direction(-x * s)
        ap = _step_length(x, dx_a)
        ad = _step_length(s, ds_a)
        mu_aff = float((x + ap * dx_a) @ (s + ad * ds_a)) / n
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        # corrector
        dx, dl, ds = direction(-x * s - dx_a * ds_a + sigma * mu)
        ap = min(1.0, 0.995 * _step_length(x, dx))
        ad = min(1.0, 0.995 * _step_length(s, ds))
        x = x + ap * dx
        lam = lam + ad * dl
        s = s + ad * ds
        x = np.maximum(x, 1e-300)
        s = np.maximum(s, 1e-300)

    if best is not None and best[0] <= accept_tol:
        return best[1]
    raise InfeasibleError(
        f"interior-point method stopped without convergence (primal {p_inf:.2e}, "
        f"dual {d_inf:.2e}, gap {gap:.2e}); the LP may be infeasible or unbounded"
    )


def dantzig_lp(A: np.ndarray, b: np.ndarray, delta: float, **kwargs) -> np.ndarray:
    """Minimize ``||c||_1`` subject to ``||A c - b||_inf <= delta``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    p = A.shape[1]
    q = A.shape[0]
    I = np.eye(q)
    Z = np.zeros((q, q))
    Aeq = np.block([[A, -A, I, Z], [-A, A, Z, I]])
    beq = np.concatenate([b + delta, delta - b])
    cost = np.concatenate([np.ones(2 * p), np.zeros(2 * q)])
    res = solve_standard_lp(Aeq, beq, cost, **kwargs)
    return res.x[:p] - res.x[p : 2 * p]


def lp_oracle(system: CollocationSystem, delta: float, **kwargs) -> np.ndarray:
    """Exact Dantzig-selector solution of ``system`` via the interior-point LP."""
    if system.p > MAX_ORACLE_P:
        raise CapacityError(f"LP oracle supports p <= {MAX_ORACLE_P}, got {system.p}")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    X, D, f = np.asarray(system.X), np.asarray(system.D), np.asarray(system.f)
    A = X.T @ X / D[:, None]
    b = X.T @ f / D
    return dantzig_lp(A, b, float(delta), **kwargs)
