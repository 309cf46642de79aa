"""Small dense SDP solver over complex Hermitian blocks.

Primal-dual path-following interior point method with Nesterov-Todd scaling
and a Mehrotra predictor-corrector. Blocks are handled natively as complex
Hermitian matrices; nonnegative scalar variables form a diagonal (LP) block.
Intended for a handful of constraints and blocks of order <= 8.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10


class NotHermitianError(ValueError):
    pass


def hermitian_eig(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(initial=0.0), 1e-300)
    if np.abs(M - M.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
        raise NotHermitianError("matrix is not Hermitian")
    return np.linalg.eigh(0.5 * (M + M.conj().T))


@dataclass
class Constraint:
    """``sum_b Tr(A_b X_b) + a . s  (= or <=)  rhs``.

    ``blocks`` holds one Hermitian coefficient per block (``None`` for zero).
    """

    blocks: Sequence[np.ndarray | None]
    scalars: Sequence[float] | None = None
    rhs: float = 0.0


@dataclass
class SdpStandardForm:
    """Maximize ``sum_b Tr(C_b X_b) + c . s`` over ``X_b >= 0`` (PSD), ``s >= 0``."""

    block_dims: Sequence[int]
    objective: Sequence[np.ndarray | None]
    num_scalars: int = 0
    scalar_objective: Sequence[float] | None = None
    eq_constraints: list[Constraint] = field(default_factory=list)
    ineq_constraints: list[Constraint] = field(default_factory=list)

    def __post_init__(self) -> None:
        nb = len(self.block_dims)
        if len(self.objective) != nb:
            raise ValueError("one objective matrix per block required")
        for con in list(self.eq_constraints) + list(self.ineq_constraints) + [Constraint(self.objective)]:
            if len(con.blocks) != nb:
                raise ValueError("constraint block count mismatch")
            for A, n in zip(con.blocks, self.block_dims):
                if A is None:
                    continue
                A = np.asarray(A)
                if A.shape != (n, n):
                    raise ValueError(f"coefficient shape {A.shape} does not match block order {n}")
                if np.abs(A - A.conj().T).max(initial=0.0) > HERMITIAN_TOL * max(np.abs(A).max(initial=0.0), 1e-300):
                    raise NotHermitianError("coefficient matrices must be Hermitian")
            if con.scalars is not None and len(con.scalars) != self.num_scalars:
                raise ValueError("scalar coefficient count mismatch")


@dataclass
class SdpSolution:
    blocks: list[np.ndarray]
    scalars: np.ndarray
    objective: float
    gap: float
    violation: float
    iterations: int
    status: str  # optimal | max-iters | infeasible
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# -- internal conic form -----------------------------------------------------
# minimize <C, X> + c.x  s.t.  <A_i, X> + a_i.x = b_i,  X_b PSD, x >= 0


def _inner(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.real(np.sum(A.conj() * B)))


def _herm(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


class _Conic:
    def __init__(self, C, c, A, a, b):
        self.C = C  # list of blocks
        self.c = c  # (nl,)
        self.A = A  # A[i][k] block matrices
        self.a = a  # (m, nl)
        self.b = b  # (m,)
        self.m = len(b)
        self.dims = [Cb.shape[0] for Cb in C]
        self.nl = c.size

    def op(self, X, x):
        return np.array([sum(_inner(Ai[k], X[k]) for k in range(len(X))) for Ai in self.A]) + self.a @ x

    def adj(self, y):
        blocks = [sum(y[i] * self.A[i][k] for i in range(self.m)) for k in range(len(self.C))]
        return blocks, self.a.T @ y


def _to_conic(prob: SdpStandardForm) -> tuple[_Conic, int]:
    dims = list(prob.block_dims)
    cons = [(con, False) for con in prob.eq_constraints] + [(con, True) for con in prob.ineq_constraints]
    n_slack = sum(1 for _, ineq in cons if ineq)
    ns = prob.num_scalars
    nl = ns + n_slack

    def blocks_of(con_blocks):
        return [np.zeros((n, n), dtype=complex) if B is None else _herm(np.asarray(B, dtype=complex))
                for B, n in zip(con_blocks, dims)]

    C = [-B for B in blocks_of(prob.objective)]
    c = np.zeros(nl)
    if prob.scalar_objective is not None:
        c[:ns] = -np.asarray(prob.scalar_objective, dtype=float)
    A, a, b = [], np.zeros((len(cons), nl)), np.zeros(len(cons))
    k_slack = ns
    for i, (con, ineq) in enumerate(cons):
        A.append(blocks_of(con.blocks))
        if con.scalars is not None:
            a[i, :ns] = con.scalars
        if ineq:
            a[i, k_slack] = 1.0
            k_slack += 1
        b[i] = con.rhs
    # equilibrate rows so that no single constraint dominates the Schur system
    scale = np.array([np.sqrt(sum(_inner(Ak, Ak) for Ak in A[i]) + float(a[i] @ a[i])) for i in range(len(cons))])
    scale[scale == 0] = 1.0
    A = [[Ak / scale[i] for Ak in A[i]] for i in range(len(cons))]
    conic = _Conic(C, c, A, a / scale[:, None], b / scale)
    conic.row_scale = scale
    return conic, ns


def _chol(M: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(_herm(M))
        w = np.maximum(w, 1e-300)
        # any square root factor works in place of the Cholesky factor
        Q, R = np.linalg.qr((V * np.sqrt(w)).conj().T)
        return R.conj().T


def _nt_scaling(X: np.ndarray, S: np.ndarray):
    Lx = _chol(X)
    Ls = _chol(S)
    U, d, Vh = np.linalg.svd(Ls.conj().T @ Lx)
    d = np.maximum(d, 1e-300)
    G = Lx @ (Vh.conj().T / np.sqrt(d))
    Ginv = (np.sqrt(d)[:, None] * Vh) @ np.linalg.inv(Lx)
    return G, Ginv, d


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    L = _chol(X)
    Li = np.linalg.inv(L)
    ev = np.linalg.eigvalsh(_herm(Li @ dX @ Li.conj().T))
    lo = ev[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _max_step_lp(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _solve_conic(P: _Conic, gap_tol: float, feas_tol: float, max_iters: int):
    nb = len(P.C)
    m = P.m
    nu = sum(P.dims) + P.nl
    normA = max([np.sqrt(sum(_inner(Ak, Ak) for Ak in Ai) + float(P.a[i] @ P.a[i])) for i, Ai in enumerate(P.A)] + [1.0])
    normC = np.sqrt(sum(_inner(Ck, Ck) for Ck in P.C) + float(P.c @ P.c))
    normb = float(np.linalg.norm(P.b))
    n_max = max(P.dims + [1])
    xi = max(10.0, np.sqrt(n_max), max([(1 + abs(P.b[i])) / (1 + np.sqrt(sum(_inner(Ak, Ak) for Ak in P.A[i]) + P.a[i] @ P.a[i])) for i in range(m)] + [1.0]))
    zeta = max(10.0, np.sqrt(n_max), normA, normC)
    X = [xi * np.eye(n, dtype=complex) for n in P.dims]
    S = [zeta * np.eye(n, dtype=complex) for n in P.dims]
    x = np.full(P.nl, xi)
    z = np.full(P.nl, zeta)
    y = np.zeros(m)

    best = None
    met = None
    polish = 0
    it = 0
    for it in range(1, max_iters + 1):
        rp = P.b - P.op(X, x)
        Aty, aty = P.adj(y)
        Rd = [P.C[k] - S[k] - Aty[k] for k in range(nb)]
        rd = P.c - z - aty
        pobj = sum(_inner(P.C[k], X[k]) for k in range(nb)) + float(P.c @ x)
        dobj = float(P.b @ y)
        mu = (sum(_inner(X[k], S[k]) for k in range(nb)) + float(x @ z)) / nu
        pinf = np.linalg.norm(rp) / (1.0 + normb)
        dinf = np.sqrt(sum(_inner(R, R) for R in Rd) + float(rd @ rd)) / (1.0 + normC)
        rgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        cgap = nu * mu / (1.0 + abs(pobj) + abs(dobj))
        gap = max(rgap, cgap)
        merit = max(pinf, dinf, gap)
        log.debug("it %d pobj %.6e dobj %.6e pinf %.2e dinf %.2e gap %.2e mu %.2e", it, pobj, dobj, pinf, dinf, gap, mu)
        if best is None or merit < best[0]:
            best = (merit, [Xk.copy() for Xk in X], x.copy(), y.copy(), pobj, gap, pinf, dinf)
        if pinf <= feas_tol and dinf <= feas_tol and gap <= gap_tol:
            met = (pinf, dinf, gap) if met is None else met
            # a couple of extra steps toward a 10x tighter gap are nearly free
            if gap <= 0.1 * gap_tol or polish >= 2:
                break
            polish += 1
        elif met is not None:
            break
        if not np.isfinite(merit) or abs(dobj) > 1e14 * (1 + normC + normb):
            break

        try:
            step = _ipm_step(P, X, x, S, z, y, rp, Rd, rd, mu, nu, it)
        except np.linalg.LinAlgError as exc:
            log.debug("stopping at iteration %d: %s", it, exc)
            break
        X, x, S, z, y = step

    _, X, x, y, pobj, gap, pinf, dinf = best
    ok = pinf <= feas_tol and dinf <= feas_tol and gap <= gap_tol
    status = "optimal" if ok else "max-iters"
    return X, x, y, pobj, gap, pinf, dinf, it, status


def _ipm_step(P: _Conic, X, x, S, z, y, rp, Rd, rd, mu, nu, it):
    """One Mehrotra predictor-corrector step with Nesterov-Todd scaling."""
    nb = len(P.C)
    m = P.m
    scal = [_nt_scaling(X[k], S[k]) for k in range(nb)]
    Wk = [G @ G.conj().T for G, _, _ in scal]
    dl = x / z
    M = np.empty((m, m))
    WAW = [[Wk[k] @ P.A[j][k] @ Wk[k] for k in range(nb)] for j in range(m)]
    for i in range(m):
        for j in range(i, m):
            v = sum(_inner(P.A[i][k], WAW[j][k]) for k in range(nb)) + float(P.a[i] @ (dl * P.a[j]))
            M[i, j] = M[j, i] = v
    WRW = [Wk[k] @ Rd[k] @ Wk[k] for k in range(nb)]

    def direction(rc_blocks, rc_lp):
        # rc_blocks in scaled coordinates (targets for lambda o (dX + dS))
        K = []
        for k, (G, Ginv, lam) in enumerate(scal):
            denom = lam[:, None] + lam[None, :]
            Rbar = 2.0 * rc_blocks[k] / denom
            K.append(G @ Rbar @ G.conj().T)
        klp = rc_lp / z
        rhs = rp - P.op(K, klp) + P.op(WRW, dl * rd)
        try:
            dy = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            dy = np.linalg.lstsq(M, rhs, rcond=None)[0]
        Atdy, atdy = P.adj(dy)
        dS = [_herm(Rd[k] - Atdy[k]) for k in range(nb)]
        dz = rd - atdy
        dX = [_herm(K[k] - Wk[k] @ dS[k] @ Wk[k]) for k in range(nb)]
        dx = klp - dl * dz
        return dX, dx, dy, dS, dz

    # predictor
    rc_aff = [-np.diag(lam * lam).astype(complex) for _, _, lam in scal]
    rc_lp_aff = -x * z
    dXa, dxa, dya, dSa, dza = direction(rc_aff, rc_lp_aff)
    ap = min(1.0, min([_max_step(X[k], dXa[k]) for k in range(nb)] + [_max_step_lp(x, dxa)]))
    ad = min(1.0, min([_max_step(S[k], dSa[k]) for k in range(nb)] + [_max_step_lp(z, dza)]))
    mu_aff = (sum(_inner(X[k] + ap * dXa[k], S[k] + ad * dSa[k]) for k in range(nb))
              + float((x + ap * dxa) @ (z + ad * dza))) / nu
    sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

    # corrector
    rc = []
    for k, (G, Ginv, lam) in enumerate(scal):
        dXb = Ginv @ dXa[k] @ Ginv.conj().T
        dSb = G.conj().T @ dSa[k] @ G
        corr = 0.5 * (dXb @ dSb + dSb @ dXb)
        rc.append(sigma * mu * np.eye(lam.size) - np.diag(lam * lam) - corr)
    rc_lp = sigma * mu - x * z - dxa * dza
    dX, dx, dy, dS, dz = direction(rc, rc_lp)

    ap_max = min([_max_step(X[k], dX[k]) for k in range(nb)] + [_max_step_lp(x, dx)])
    ad_max = min([_max_step(S[k], dS[k]) for k in range(nb)] + [_max_step_lp(z, dz)])
    tau = 0.98 if it < 3 else 0.995
    ap = min(1.0, tau * ap_max)
    ad = min(1.0, tau * ad_max)
    X = [_herm(X[k] + ap * dX[k]) for k in range(nb)]
    x = x + ap * dx
    S = [_herm(S[k] + ad * dS[k]) for k in range(nb)]
    z = z + ad * dz
    y = y + ad * dy
    return X, x, S, z, y


def _violation(prob: SdpStandardForm, blocks, scalars) -> float:
    worst = 0.0
    for con, ineq in [(c, False) for c in prob.eq_constraints] + [(c, True) for c in prob.ineq_constraints]:
        val = sum(_inner(np.asarray(A, dtype=complex), X) for A, X in zip(con.blocks, blocks) if A is not None)
        if con.scalars is not None:
            val += float(np.dot(con.scalars, scalars))
        r = val - con.rhs
        scale = 1.0 + abs(con.rhs)
        worst = max(worst, (max(r, 0.0) if ineq else abs(r)) / scale)
    for X in blocks:
        ev = np.linalg.eigvalsh(X)
        tr = max(abs(np.trace(X).real), 1.0)
        worst = max(worst, -ev[0] / tr)
    if scalars.size:
        worst = max(worst, float(-scalars.min()))
    return worst


def _phase1(prob: SdpStandardForm, feas_tol: float, max_iters: int) -> float:
    """Optimal value of the artificial-variable feasibility problem (0 if feasible)."""
    P, ns = _to_conic(prob)
    m = P.m
    nl = P.nl + 2 * m
    a = np.hstack([P.a, np.eye(m), -np.eye(m)])
    c = np.concatenate([np.zeros(P.nl), np.ones(2 * m)])
    C = [np.zeros_like(Ck) for Ck in P.C]
    aux = _Conic(C, c, P.A, a, P.b)
    X, x, y, pobj, *_ = _solve_conic(aux, 1e-10, 1e-10, max_iters)
    return float(np.sum(x[P.nl:])) / (1.0 + np.linalg.norm(P.b))


def solve_sdp(problem: SdpStandardForm, gap_tol: float = 1e-8, feas_tol: float = 1e-9,
              max_iters: int = 100) -> SdpSolution:
    """Maximize the linear objective of ``problem``.

    ``gap`` is the relative duality gap ``|p - d| / (1 + |p| + |d|)``. When the
    main iteration does not reach the tolerances, a phase-1 problem decides
    between ``infeasible`` and ``max-iters``.
    """
    P, ns = _to_conic(problem)
    X, x, y, pobj, gap, pinf, dinf, it, status = _solve_conic(P, gap_tol, feas_tol, max_iters)
    blocks = [_herm(Xk) for Xk in X]
    scalars = x[:ns].copy()
    if status != "optimal":
        if _phase1(problem, feas_tol, max_iters) > max(1e3 * feas_tol, 1e-7):
            status = "infeasible"
    return SdpSolution(
        blocks=blocks,
        scalars=scalars,
        objective=-pobj,
        gap=gap,
        violation=_violation(problem, blocks, scalars),
        iterations=it,
        status=status,
        dual=-y / P.row_scale,
    )
