"""Dantzig-selector solver.

Solves::

    minimize ||c||_1  subject to  || D^{-1} X^T (X c - f) ||_inf <= delta

with a first-order primal-dual (Chambolle-Pock / PDHG) iteration.  The
problem is lifted so that ``X`` is never squared::

    minimize ||c||_1 + indicator(|s| <= delta)
    subject to  G c - r = g,   B r - s = 0,   B = D^{-1} G^T

with ``(G, g) = (X, f)`` when ``m <= p`` and ``(R, Q^T f)`` from a thin QR of
``X`` when ``m > p``; both give ``D^{-1} X^T (X c - f) = B (G c - g)``.  The
condition number seen by the iteration is that of ``X`` rather than of
``X^T X``, which matters on tensor Hermite grids where ``X^T X`` inherits the
spread of the Gauss-Hermite weights.

Each iteration performs four matrix-vector products with ``G``, ``B`` or their
transposes (``4 q p`` multiplications, ``q = min(m, p)``) and two
soft-thresholding steps: the l1 prox on ``c`` and the box projection on
``s`` (``v - soft(v, delta)``).  Steps are diagonal (Pock-Chambolle,
alpha = 1) and the iterate is restarted adaptively from the running average
whenever the KKT error has dropped enough, as in restarted PDHG for linear
programming.  Several right-hand sides sharing one matrix are solved as a
batch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .collocation import CollocationSystem
from .errors import DimensionError, NumericalBreakdown

# restart thresholds on the KKT error (sufficient / necessary decrease,
# artificial restart after this fraction of the total iteration count)
_BETA_SUFFICIENT = 0.2
_BETA_NECESSARY = 0.8
_BETA_ARTIFICIAL = 0.36
_CHECK_EVERY = 16
# certify every this many checks; thresholds for the polishing step
_CERTIFY_EVERY = 4
_POLISH_THRESHOLD = 1e-7
_POLISH_RETRY = 8
_MOVE_FLOOR = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """``step_params = (tau, sigma)`` selects scalar steps; ``None`` selects
    diagonal preconditioning, which needs no norm estimate."""

    delta: float = 1e-8
    max_iters: int = 200_000
    tol: float = 1e-9
    step_params: tuple[float, float] | None = None

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be a finite nonnegative number, got {self.delta!r}")
        if not (self.tol > 0):
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if self.step_params is not None:
            tau, sigma = self.step_params
            if not (tau > 0 and sigma > 0):
                raise ValueError("step sizes must be positive")


@dataclass(frozen=True)
class SolveResult:
    coefficients: np.ndarray
    residual_inf: float
    l1_norm: float
    iterations: int
    converged: bool


@dataclass
class MultiplicationCounter:
    """Tally of floating-point multiplications, split by phase."""

    setup: int = 0
    iterations: int = 0
    checks: int = 0
    iteration_count: int = 0
    per_phase: dict = field(default_factory=dict)

    @property
    def per_iteration(self) -> float:
        return self.iterations / max(self.iteration_count, 1)


def soft_threshold(v, t):
    """Componentwise ``sign(v) * max(|v| - t, 0)``."""
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def correlation(system: CollocationSystem, c) -> np.ndarray:
    """``D^{-1} X^T (X c - f)``."""
    c = np.asarray(c, dtype=float)
    if c.shape[0] != system.p:
        raise DimensionError(f"coefficient vector of length {c.shape[0]} for p={system.p}")
    return system.X.T @ (system.X @ c - system.f) / system.D


def residual(system: CollocationSystem, c) -> float:
    """``|| D^{-1} X^T (X c - f) ||_inf``."""
    return float(np.max(np.abs(correlation(system, c)), initial=0.0))


class _LiftedOperator:
    """``K(c, r, s) = (G c - r, B r - s)`` with multiplication accounting."""

    def __init__(self, X: np.ndarray, D: np.ndarray, F: np.ndarray, counter: MultiplicationCounter):
        m, p = X.shape
        self.counter = counter
        if m > p:
            Q, R = np.linalg.qr(X, mode="reduced")
            self.G = R
            self.g = Q.T @ F
            counter.setup += 2 * m * p * p + m * p * F.shape[1]
        else:
            self.G = np.array(X)
            self.g = np.array(F)
        self.B = np.ascontiguousarray(self.G.T / D[:, None])
        self.GT = np.ascontiguousarray(self.G.T)
        self.BT = np.ascontiguousarray(self.B.T)
        self.q, self.p = self.G.shape

    def mat(self, k: int) -> int:
        return self.q * self.p * k


def _l1(a):
    return np.sum(np.abs(a), axis=0)


def _norm(a):
    return np.sqrt(np.sum(a * a, axis=0))


def _power_norm(op: _LiftedOperator, iters: int = 50) -> float:
    rng = np.random.default_rng(0)
    c = rng.standard_normal((op.p, 1))
    r = rng.standard_normal((op.q, 1))
    s = rng.standard_normal((op.p, 1))
    est = 0.0
    for _ in range(iters):
        nrm = math.sqrt(float(np.sum(c * c) + np.sum(r * r) + np.sum(s * s)))
        c, r, s = c / nrm, r / nrm, s / nrm
        k1 = op.G @ c - r
        k2 = op.B @ r - s
        c = op.GT @ k1
        r = -k1 + op.BT @ k2
        s = -k2
        est = math.sqrt(math.sqrt(float(np.sum(c * c) + np.sum(r * r) + np.sum(s * s))))
    return est


class _State:
    """Iterate plus the images ``K z`` and ``K^T l`` it carries along."""

    names = ("c", "r", "s", "l1", "l2", "kz1", "kz2", "ktc", "ktr")

    def __init__(self, **arrays):
        for name in self.names:
            setattr(self, name, arrays[name])

    def copy(self):
        return _State(**{n: getattr(self, n).copy() for n in self.names})

    def take(self, cols):
        return _State(**{n: getattr(self, n)[:, cols] for n in self.names})

    def assign(self, cols, other):
        for n in self.names:
            getattr(self, n)[:, cols] = getattr(other, n)[:, cols]


def _kkt(st: _State, g, delta, omega):
    """Primal, dual and gap errors combined into a primal-weighted restart score."""
    prim = np.sqrt(_norm(st.kz1 - g) ** 2 + _norm(st.kz2) ** 2)
    dual = np.sqrt(_norm(np.maximum(np.abs(st.ktc) - 1.0, 0.0)) ** 2 + _norm(st.ktr) ** 2)
    pobj = _l1(st.c)
    dobj = -np.sum(g * st.l1, axis=0) - delta * _l1(st.l2)
    gap = np.abs(pobj - dobj)
    return np.sqrt((omega * prim) ** 2 + (dual / omega) ** 2 + gap**2)


def _lstsq(A, b):
    # QR with column pivoting: rank-revealing and cheaper than the SVD
    return scipy.linalg.lstsq(A, b, lapack_driver="gelsy", check_finite=False)[0]


class _Certifier:
    """Optimality certificates for candidate solutions.

    Any ``z`` with ``||A^T z||_inf <= 1`` gives the lower bound
    ``|b^T z| - delta ||z||_1`` on the optimal l1 value, so a feasible ``c``
    whose l1 norm is within ``tol * max(1, ||c||_1)`` of such a bound meets the
    solver contract.  Feasibility is checked on the original ``X``.

    When ``A`` is rank deficient, ``b^T z`` is evaluated as ``b^T P z`` with
    ``P`` the projector onto the range of ``A``.  The two agree in exact
    arithmetic since ``b`` lies in that range, but a large null-space
    component of ``z`` (typical at ``delta = 0``) turns the direct product
    into rounding noise.
    """

    def __init__(self, X, D, F, op: _LiftedOperator, delta, tol, counter):
        self.X, self.D, self.F, self.op = X, D, F, op
        self.delta, self.tol, self.counter = delta, tol, counter
        self.b = op.B @ op.g
        self._A = None
        self._tried = {}  # column -> (last support/active-set key, skips since)
        self._lu = {}
        self._range = False  # orthonormal basis of range(A) if A is rank deficient, else None

    @property
    def A(self):
        if self._A is None:
            self._A = self.op.B @ self.op.G
            self.counter.setup += self.op.mat(self.op.p)
        return self._A

    @property
    def range_basis(self):
        if self._range is False:
            G = self.op.G
            self._range = None
            if G.shape[0] < G.shape[1] or not np.all(G.any(axis=0)):
                self._range = scipy.linalg.orth(self.op.B)
                self.counter.setup += 4 * self.op.mat(self.op.p)
                if self._range.shape[1] == self.op.p:
                    self._range = None
        return self._range

    def lower_bound(self, Z, cols):
        T = self.op.GT @ (self.op.BT @ Z)
        self.counter.checks += 2 * self.op.mat(Z.shape[1])
        scale = 1.0 / np.maximum(1.0, np.max(np.abs(T), axis=0, initial=0.0))
        U = self.range_basis
        Zb = Z if U is None else U @ (U.T @ Z)
        if U is not None:
            self.counter.checks += 2 * U.size * Z.shape[1]
        return scale * (np.abs(np.sum(self.b[:, cols] * Zb, axis=0)) - self.delta * _l1(Z))

    def residual(self, C, cols):
        m, p = self.X.shape
        self.counter.checks += 2 * m * p * C.shape[1]
        R = self.X.T @ (self.X @ C - self.F[:, cols]) / self.D[:, None]
        return np.max(np.abs(R), axis=0, initial=0.0)

    def accept(self, C, Z, cols):
        """Boolean mask of columns of ``C`` certified optimal by duals ``Z``."""
        l1 = _l1(C)
        ok = l1 - self.lower_bound(Z, cols) <= self.tol * np.maximum(1.0, l1)
        if ok.any():
            idx = np.flatnonzero(ok)
            ok[idx] = self.residual(C[:, idx], cols[idx]) <= self.delta + self.tol
        return ok

    def polish(self, c, l2, col):
        """Vertex guess from the support of ``c`` and the rows where ``l2`` is
        nonzero: ``A[K, S] c_S = b_K + delta sign(l2_K)`` with dual
        ``A[K, S]^T z_K = sign(c_S)``, the dual taken closest to ``-l2``.

        Sets are read off with a relative threshold (sparse solutions carry
        dust) and exactly (dense solutions have genuinely tiny entries).
        Returns ``c`` or None if not certified.
        """
        cmax = float(np.max(np.abs(c), initial=0.0))
        lmax = float(np.max(np.abs(l2), initial=0.0))
        if cmax == 0.0 or lmax == 0.0:
            return None
        sets = []
        for thr in (_POLISH_THRESHOLD, 0.0):
            S = np.flatnonzero(np.abs(c) > thr * cmax)
            Kr = np.flatnonzero(np.abs(l2) > thr * lmax)
            if not any(np.array_equal(S, a) and np.array_equal(Kr, b) for a, b in sets):
                sets.append((S, Kr))
        if sets[-1][1].size == c.size and sets[-1][0].size < c.size:
            # every constraint active: the vertex may be dense before the iterate is
            sets.insert(0, (np.arange(c.size), sets[-1][1]))
        key = tuple(a.tobytes() + b"|" + b.tobytes() for a, b in sets) + (np.sign(l2).tobytes(),)
        last, skipped = self._tried.get(col, (None, 0))
        if last == key and skipped < _POLISH_RETRY:
            # same sets as last time: only the dual has moved, retry occasionally
            self._tried[col] = (key, skipped + 1)
            return None
        self._tried[col] = (key, 0)
        for S, Kr in sets:
            cand = self._vertex(S, Kr, l2, col)
            if cand is not None:
                return cand
        return None

    def _factor(self, name, M):
        # dense solutions use every row and column: factor once, reuse per column
        if name not in self._lu:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error")
                    self._lu[name] = scipy.linalg.lu_factor(M, check_finite=False)
            except (scipy.linalg.LinAlgError, Warning, ValueError):
                self._lu[name] = None
            self.counter.setup += M.shape[0] ** 3
        return self._lu[name]

    def _solve(self, name, M, rows, cols_, rhs, trans=0):
        full = rows.size == M.shape[0] and cols_.size == M.shape[1] and M.shape[0] == M.shape[1]
        if full:
            lu = self._factor(name, M)
            if lu is not None:
                self.counter.checks += 2 * rows.size * rows.size
                return scipy.linalg.lu_solve(lu, rhs, trans=trans, check_finite=False)
        sub = M[np.ix_(rows, cols_)]
        self.counter.checks += 2 * rows.size * cols_.size * min(rows.size, cols_.size)
        return _lstsq(sub.T if trans else sub, rhs)

    def _vertex(self, S, Kr, l2, col):
        A = self.A
        cs = self._solve("A", A, Kr, S, self.b[Kr, col] + self.delta * np.sign(l2[Kr]))
        # when the residual can vanish on the support, least squares on the
        # (reduced) design itself avoids the squared conditioning of A
        rows = np.arange(self.op.q)
        ls = self._solve("G", self.op.G, rows, S, self.op.g[:, col])
        sub = A[np.ix_(Kr, S)]
        for cs in (cs, ls):
            # the iteration's own dual (-l2 satisfies A^T z = sign(c) at a
            # fixed point), corrected minimally so the support equations hold
            z0 = -l2[Kr]
            zk = z0 - self._solve("A", A, Kr, S, sub.T @ z0 - np.sign(cs), trans=1)
            cand = np.zeros((self.op.p, 1))
            cand[S, 0] = cs
            z = np.zeros((self.op.p, 1))
            z[Kr, 0] = zk
            if not (np.all(np.isfinite(cand)) and np.all(np.isfinite(z))):
                continue
            if self.accept(cand, z, np.array([col]))[0]:
                return cand[:, 0]
        return None


def _pdhg(
    X: np.ndarray,
    D: np.ndarray,
    F: np.ndarray,
    config: SolverConfig,
    counter: MultiplicationCounter,
):
    """Batched restarted PDHG.  Returns ``(C, iterations, converged)`` per column."""
    m, p = X.shape
    K = F.shape[1]
    delta = float(config.delta)
    op = _LiftedOperator(X, D, F, counter)
    q = op.q
    G, GT, B, BT, g_all = op.G, op.GT, op.B, op.BT, op.g
    cert = _Certifier(X, D, F, op, delta, float(config.tol), counter)

    C_out = np.zeros((p, K))
    iters_out = np.zeros(K, dtype=int)
    conv_out = np.zeros(K, dtype=bool)

    # c = 0 is optimal whenever it is feasible
    counter.setup += op.mat(K)
    trivial = np.max(np.abs(cert.b), axis=0, initial=0.0) <= delta
    conv_out[trivial] = True
    active = np.flatnonzero(~trivial)
    if active.size == 0:
        return C_out, iters_out, conv_out

    if config.step_params is None:
        abs_G = np.abs(G)
        abs_B = np.abs(B)
        tc = 1.0 / np.where(abs_G.sum(axis=0) > 0, abs_G.sum(axis=0), 1.0)
        tr = 1.0 / (1.0 + abs_B.sum(axis=0))
        ts = np.ones(p)
        s1 = 1.0 / (abs_G.sum(axis=1) + 1.0)
        s2 = 1.0 / (abs_B.sum(axis=1) + 1.0)
    else:
        tau, sigma = config.step_params
        L = _power_norm(op)
        if tau * sigma * L * L > 1.0 + 1e-12:
            raise ValueError(
                f"step sizes violate tau*sigma*||K||^2 <= 1 (||K|| ~ {L:.4g}, product "
                f"{tau * sigma * L * L:.4g})"
            )
        tc, tr, ts = np.full(p, tau), np.full(q, tau), np.full(p, tau)
        s1, s2 = np.full(q, sigma), np.full(p, sigma)
    tc, tr, ts, s1, s2 = (v[:, None] for v in (tc, tr, ts, s1, s2))

    cols = active.copy()
    g = g_all[:, cols]
    k = cols.size
    zq, zp = np.zeros((q, k)), np.zeros((p, k))
    st = _State(c=zp.copy(), r=zq.copy(), s=zp.copy(), l1=zq.copy(), l2=zp.copy(),
                kz1=zq.copy(), kz2=zp.copy(), ktc=zp.copy(), ktr=zq.copy())
    sums = _State(**{n: np.zeros_like(getattr(st, n)) for n in _State.names})
    n_avg = np.zeros(k)
    anchor = st.copy()
    omega = np.ones((1, k))
    last_restart = _kkt(st, g, delta, omega[0])
    prev_score = last_restart.copy()
    since_restart = np.zeros(k, dtype=int)

    def finish(local, C, it):
        """Record certified columns and drop them from the batch."""
        nonlocal cols, g, st, sums, anchor, n_avg, omega, last_restart, prev_score, since_restart
        C_out[:, cols[local]] = C
        iters_out[cols[local]] = it
        conv_out[cols[local]] = True
        keep = np.setdiff1d(np.arange(cols.size), local)
        cols, g = cols[keep], g[:, keep]
        st, sums, anchor = st.take(keep), sums.take(keep), anchor.take(keep)
        n_avg, omega = n_avg[keep], omega[:, keep]
        last_restart, prev_score = last_restart[keep], prev_score[keep]
        since_restart = since_restart[keep]

    it = 0
    while it < config.max_iters and cols.size:
        it += 1
        # primal step: prox of ||c||_1, identity on r, box projection on s
        tcw = tc / omega
        c_new = soft_threshold(st.c - tcw * st.ktc, tcw)
        r_new = st.r - (tr / omega) * st.ktr
        v = st.s + (ts / omega) * st.l2
        s_new = v - soft_threshold(v, delta)
        kz1 = G @ c_new - r_new
        kz2 = B @ r_new - s_new
        # dual step on the extrapolated point, using K(2z+ - z) = 2Kz+ - Kz
        l1 = st.l1 + (s1 * omega) * (2.0 * kz1 - st.kz1 - g)
        l2 = st.l2 + (s2 * omega) * (2.0 * kz2 - st.kz2)
        ktc = GT @ l1
        ktr = BT @ l2 - l1
        counter.iterations += 4 * op.mat(cols.size) + 16 * (p + q) * cols.size
        counter.iteration_count += 1
        st = _State(c=c_new, r=r_new, s=s_new, l1=l1, l2=l2, kz1=kz1, kz2=kz2, ktc=ktc, ktr=ktr)
        for n in _State.names:
            getattr(sums, n).__iadd__(getattr(st, n))
        n_avg += 1
        since_restart += 1

        if it % _CHECK_EVERY:
            continue
        if not np.all(np.isfinite(st.c)) or not np.all(np.isfinite(st.l1)):
            raise NumericalBreakdown("non-finite iterate in Dantzig solver", it)

        avg = _State(**{n: getattr(sums, n) / n_avg for n in _State.names})
        s_cur = _kkt(st, g, delta, omega[0])
        s_avg = _kkt(avg, g, delta, omega[0])
        counter.checks += 6 * (p + q) * cols.size
        use_avg = s_avg < s_cur
        cand = np.where(use_avg, s_avg, s_cur)
        best = st.copy()
        if use_avg.any():
            best.assign(np.flatnonzero(use_avg), avg)

        if it % (_CHECK_EVERY * _CERTIFY_EVERY) == 0:
            ok = cert.accept(best.c, best.l2, cols)
            for j in np.flatnonzero(~ok):
                sol = cert.polish(best.c[:, j], best.l2[:, j], cols[j])
                if sol is not None:
                    best.c[:, j] = sol
                    ok[j] = True
            if ok.any():
                local = np.flatnonzero(ok)
                finish(local, best.c[:, local], it)
                if not cols.size:
                    break
                keep = np.flatnonzero(~ok)
                best, use_avg, cand = best.take(keep), use_avg[keep], cand[keep]
                avg = avg.take(keep)

        restart = (
            (cand <= _BETA_SUFFICIENT * last_restart)
            | ((cand <= _BETA_NECESSARY * last_restart) & (cand > prev_score))
            | (since_restart >= _BETA_ARTIFICIAL * it)
        )
        prev_score = cand
        if not restart.any():
            continue
        ridx = np.flatnonzero(restart)
        st.assign(ridx, best)
        # primal weight: balance the distances moved by primal and dual since the last restart
        dx = np.sqrt(_norm(st.c[:, ridx] - anchor.c[:, ridx]) ** 2
                     + _norm(st.r[:, ridx] - anchor.r[:, ridx]) ** 2
                     + _norm(st.s[:, ridx] - anchor.s[:, ridx]) ** 2)
        dy = np.sqrt(_norm(st.l1[:, ridx] - anchor.l1[:, ridx]) ** 2
                     + _norm(st.l2[:, ridx] - anchor.l2[:, ridx]) ** 2)
        upd = (dx > _MOVE_FLOOR) & (dy > _MOVE_FLOOR)
        w = omega[0, ridx]
        w[upd] = np.exp(0.5 * np.log(dy[upd] / dx[upd]) + 0.5 * np.log(w[upd]))
        omega[0, ridx] = w
        anchor.assign(ridx, st)
        for n in _State.names:
            getattr(sums, n)[:, ridx] = 0.0
        n_avg[ridx] = 0
        since_restart[ridx] = 0
        last_restart[ridx] = cand[ridx]

        # at a restart the support is usually settled: try to jump to the vertex
        done, sols = [], []
        for j in ridx:
            sol = cert.polish(st.c[:, j], st.l2[:, j], cols[j])
            if sol is not None:
                done.append(j)
                sols.append(sol)
        if done:
            finish(np.array(done), np.stack(sols, axis=1), it)

    if cols.size:
        C_out[:, cols] = st.c
        iters_out[cols] = it
    return C_out, iters_out, conv_out


def solve_many(system: CollocationSystem, F, config: SolverConfig | None = None,
               counter: MultiplicationCounter | None = None) -> list[SolveResult]:
    """Solve for every column of ``F`` (shape ``(m, K)``) against one matrix ``X``."""
    config = config or SolverConfig()
    counter = counter if counter is not None else MultiplicationCounter()
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != system.m:
        raise DimensionError(f"right-hand sides have {F.shape[0]} rows, system has m={system.m}")
    if not np.all(np.isfinite(F)):
        raise NumericalBreakdown("non-finite samples", 0)
    X, D = np.asarray(system.X), np.asarray(system.D)
    C, iters, conv = _pdhg(X, D, F, config, counter)
    resid = np.max(np.abs(X.T @ (X @ C - F) / D[:, None]), axis=0, initial=0.0)
    out = []
    for j in range(F.shape[1]):
        c = C[:, j].copy()
        c.setflags(write=False)
        out.append(SolveResult(c, float(resid[j]), float(np.sum(np.abs(c))), int(iters[j]),
                               bool(conv[j] and resid[j] <= config.delta + config.tol)))
    return out


def solve(system: CollocationSystem, config: SolverConfig | None = None,
          counter: MultiplicationCounter | None = None) -> SolveResult:
    """Dantzig-selector coefficients for ``system``.

    Never raises on non-convergence: ``converged`` is False when
    ``max_iters`` is reached first.  Raises NumericalBreakdown on non-finite
    iterates.
    """
    return solve_many(system, system.f, config, counter)[0]
