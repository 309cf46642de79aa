"""Multi-waveguide secrecy-rate maximization by alternating optimization.

Covariance step: a slack ``gamma`` bounds Eve's SINR; for fixed ``gamma`` the
linear-fractional problem in ``(W, R_m)`` becomes an SDP after a
Charnes-Cooper change of variables. Position step: coordinate-wise grid
search along each waveguide.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .model import Position, SystemParams, WaveguideLayout, channel_array, waveguide_layout
from .rates import BeamformingState, RatePair, outer_product, rate
from .sdp import Constraint, SdpStandardForm, hermitian_eig, solve_sdp

log = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class MultiSolveConfig:
    grid_step: float = 0.05
    outer_tol: float = 1e-4
    inner_tol: float = 1e-4
    max_outer_iters: int = 30
    max_inner_iters: int = 50
    position_init_mode: str = "bob-aligned"  # bob-aligned | midpoint | uniform-random
    seed: int = 0
    joint_grid: bool = False  # exhaustive joint grid, N <= 2 only
    no_an_warm_start: bool = True

    def __post_init__(self) -> None:
        if not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        if not (self.outer_tol > 0 and self.inner_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.position_init_mode not in ("bob-aligned", "midpoint", "uniform-random"):
            raise ValueError(f"unknown position_init_mode {self.position_init_mode!r}")


@dataclass(frozen=True)
class Scenario:
    """Bob/Eve positions plus the waveguide geometry.

    ``guided=False`` turns the model into a conventional array: every element
    sits on ``y = 0`` with no in-waveguide phase.
    """

    bob: Position
    eve: Position
    params: SystemParams
    feed_x: float = 0.0
    guided: bool = True

    @property
    def layout(self) -> WaveguideLayout:
        return waveguide_layout(self.params, self.feed_x)

    def pa_y(self) -> np.ndarray:
        if not self.guided:
            return np.zeros(self.params.num_waveguides)
        return np.asarray(self.layout.y_coords)

    def channels(self, pa_x) -> tuple[np.ndarray, np.ndarray]:
        pa_x = np.asarray(pa_x, dtype=float)
        ys = self.pa_y()
        feed = np.full_like(pa_x, self.feed_x) if self.guided else pa_x
        return (channel_array(self.bob, pa_x, ys, feed, self.params),
                channel_array(self.eve, pa_x, ys, feed, self.params))


class TraceStep(NamedTuple):
    kind: str  # init | gamma | covariance | position | refine
    secrecy: float  # unclamped R_Bob - R_Eve


@dataclass
class FixedGammaResult:
    W: np.ndarray
    R_m: np.ndarray
    objective: float
    status: str


@dataclass
class MultiResult:
    state: BeamformingState
    rates: RatePair
    trace: list[TraceStep] = field(default_factory=list)
    converged: bool = True
    iterations: int = 0
    relaxed_state: BeamformingState | None = None  # before rank-1 refinement


def _tr(H: np.ndarray, X: np.ndarray) -> float:
    return float(np.real(np.sum(H.T * X)))


def _difference(Hb, He, W, R, params: SystemParams) -> float:
    return rate(Hb, W, R, params.noise_bob) - rate(He, W, R, params.noise_eve)


def gamma_star(W: np.ndarray, R_m: np.ndarray, H_E: np.ndarray, noise_eve: float) -> float:
    """Smallest feasible slack: ``1 + Tr(H_E W) / (Tr(H_E R_m) + noise_eve)``."""
    return 1.0 + max(_tr(H_E, W), 0.0) / (max(_tr(H_E, R_m), 0.0) + noise_eve)


def fixed_gamma_objective(gamma, W, R_m, H_B, noise_bob) -> float:
    bR = _tr(H_B, R_m)
    return (bR + _tr(H_B, W) + noise_bob) / (gamma * (bR + noise_bob))


def solve_fixed_gamma(gamma: float, H_B: np.ndarray, H_E: np.ndarray, noise_bob: float,
                      noise_eve: float, P: float, allow_an: bool = True,
                      gap_tol: float = 1e-8, feas_tol: float = 1e-9) -> FixedGammaResult:
    """Maximize Bob's SINR ratio subject to Eve's SINR ``<= gamma - 1``.

    Variables are normalized by the budget (``X = W / P``) and channels by
    the noise powers; with ``t = 1 / (Tr(Hb R) + 1)`` the problem becomes
    linear in ``(tX, tR, t)``.
    """
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    N = H_B.shape[0]
    Hb = P * np.asarray(H_B, dtype=complex) / noise_bob
    He = P * np.asarray(H_E, dtype=complex) / noise_eve
    g1 = gamma - 1.0
    eye = np.eye(N)
    zero = None
    if allow_an:
        dims = [N, N]
        obj = [Hb, zero]
        eqs = [Constraint([zero, Hb], [1.0], 1.0), Constraint([eye, eye], [-1.0], 0.0)]
        ineqs = [Constraint([He, -g1 * He], [-g1], 0.0)]
    else:
        dims = [N]
        obj = [Hb]
        eqs = [Constraint([zero], [1.0], 1.0), Constraint([eye], [-1.0], 0.0)]
        ineqs = [Constraint([He], [-g1], 0.0)]
    prob = SdpStandardForm(dims, obj, num_scalars=1, eq_constraints=eqs, ineq_constraints=ineqs)
    sol = solve_sdp(prob, gap_tol=gap_tol, feas_tol=feas_tol)
    t = float(sol.scalars[0])
    if not t > 0:
        raise ArithmeticError("Charnes-Cooper variable collapsed to zero")
    W = P * sol.blocks[0] / t
    R = P * sol.blocks[1] / t if allow_an else np.zeros((N, N), dtype=complex)
    # scale onto the budget exactly; the normalization holds to feas_tol
    total = np.trace(W).real + np.trace(R).real
    W, R = W * (P / total), R * (P / total)
    return FixedGammaResult(W, R, fixed_gamma_objective(gamma, W, R, H_B, noise_bob), sol.status)


def rank1_refine(W: np.ndarray) -> np.ndarray:
    """Principal eigenvector scaled by the square root of the top eigenvalue.

    The phase is fixed so the largest-magnitude entry (first on ties) is real
    and positive, which makes the output deterministic.
    """
    lam, V = hermitian_eig(W)
    u = V[:, -1]
    k = int(np.argmax(np.abs(u) >= np.abs(u).max() * (1 - 1e-12)))
    u = u * np.exp(-1j * np.angle(u[k]))
    return np.sqrt(max(lam[-1], 0.0)) * u


def _grid(D: float, step: float) -> np.ndarray:
    n = int(np.floor(D / step + 1e-9))
    if n < 2:
        raise ValueError("grid_step must split the waveguide into at least 2 intervals")
    g = np.arange(n + 1) * step
    if D - g[-1] > 1e-9:
        g = np.append(g, D)
    return g


def _batch_difference(hb_rows, he_rows, W, R, params: SystemParams) -> np.ndarray:
    sb = np.einsum("gi,ij,gj->g", hb_rows.conj(), W, hb_rows).real
    ib = np.einsum("gi,ij,gj->g", hb_rows.conj(), R, hb_rows).real
    se = np.einsum("gi,ij,gj->g", he_rows.conj(), W, he_rows).real
    ie = np.einsum("gi,ij,gj->g", he_rows.conj(), R, he_rows).real
    sb, ib, se, ie = (np.maximum(v, 0.0) for v in (sb, ib, se, ie))
    return np.log2(1 + sb / (ib + params.noise_bob)) - np.log2(1 + se / (ie + params.noise_eve))


def grid_search_positions(W: np.ndarray, R_m: np.ndarray, pa_x, scen: Scenario,
                          grid_step: float, joint: bool = False) -> tuple[np.ndarray, float]:
    """Cyclic coordinate sweeps over ``{0, step, ..., D}`` with ``W, R_m`` fixed.

    The current coordinate value is always a candidate, so the secrecy rate
    never decreases; ties go to the smaller position. Returns the positions
    and the (unclamped) secrecy rate there.
    """
    params = scen.params
    grid = _grid(params.region_side, grid_step)
    x = np.array(pa_x, dtype=float)
    N = x.size
    ys = scen.pa_y()
    hb, he = scen.channels(x)
    current = float(_batch_difference(hb[None], he[None], W, R_m, params)[0])

    if joint and N <= 2:
        if N == 1:
            cols = [grid]
        else:
            g0, g1 = np.meshgrid(grid, grid, indexing="ij")
            cols = [g0.ravel(), g1.ravel()]
        X = np.stack(cols, axis=1)
        feed = np.full_like(X, scen.feed_x) if scen.guided else X
        hb_rows = channel_array(scen.bob, X, ys[None, :], feed, params)
        he_rows = channel_array(scen.eve, X, ys[None, :], feed, params)
        vals = _batch_difference(hb_rows, he_rows, W, R_m, params)
        k = int(np.argmax(vals))
        if vals[k] > current + MONOTONE_SLACK:
            return X[k].copy(), float(vals[k])
        return x, current

    while True:
        cycle_start = current
        for n in range(N):
            cands = np.union1d(grid, [x[n]])
            feed = np.full_like(cands, scen.feed_x) if scen.guided else cands
            hb_rows = np.repeat(hb[None], cands.size, axis=0)
            he_rows = np.repeat(he[None], cands.size, axis=0)
            hb_rows[:, n] = channel_array(scen.bob, cands, ys[n], feed, params)
            he_rows[:, n] = channel_array(scen.eve, cands, ys[n], feed, params)
            vals = _batch_difference(hb_rows, he_rows, W, R_m, params)
            k = int(np.argmax(vals))
            if vals[k] > current + MONOTONE_SLACK:
                x[n] = cands[k]
                hb, he = hb_rows[k].copy(), he_rows[k].copy()
                current = float(vals[k])
        if current - cycle_start <= 1e-9:
            break
    return x, current


def initial_positions(scen: Scenario, config: MultiSolveConfig) -> np.ndarray:
    N = scen.params.num_waveguides
    D = scen.params.region_side
    if config.position_init_mode == "bob-aligned":
        return np.full(N, min(max(scen.bob.x, 0.0), D))
    if config.position_init_mode == "midpoint":
        return np.full(N, D / 2)
    return np.random.default_rng(config.seed).uniform(0.0, D, N)


def mrt_covariance(h_b: np.ndarray, P: float) -> np.ndarray:
    """Maximum-ratio transmission covariance with trace ``P``."""
    return P * outer_product(h_b) / float(np.vdot(h_b, h_b).real)


def optimize_covariances(h_b, h_e, W, R_m, P: float, params: SystemParams,
                         config: MultiSolveConfig, allow_an: bool = True,
                         trace: list[TraceStep] | None = None):
    """Alternate the closed-form slack update and the fixed-slack SDP.

    Returns ``(W, R_m, difference, converged)``. A covariance update that
    would lower the secrecy rate (solver inaccuracy) is rejected.
    """
    Hb, He = outer_product(h_b), outer_product(h_e)
    current = _difference(Hb, He, W, R_m, params)
    converged = False
    for _ in range(config.max_inner_iters):
        gamma = gamma_star(W, R_m, He, params.noise_eve)
        if trace is not None:
            trace.append(TraceStep("gamma", current))
        try:
            res = solve_fixed_gamma(gamma, Hb, He, params.noise_bob, params.noise_eve, P, allow_an)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            log.debug("fixed-gamma step failed: %s", exc)
            break
        new = _difference(Hb, He, res.W, res.R_m, params)
        gain = new - current
        if new >= current:
            W, R_m, current = res.W, res.R_m, new
        if trace is not None:
            trace.append(TraceStep("covariance", current))
        if gain < config.inner_tol:
            converged = True
            break
    return W, R_m, current, converged


def solve_multi(scen: Scenario, P: float, config: MultiSolveConfig | None = None,
                allow_an: bool = True, optimize_positions: bool = True,
                pa_x=None, warm_start: tuple[np.ndarray, np.ndarray] | None = None,
                base: MultiResult | None = None) -> MultiResult:
    """Alternate covariance and position steps until the outer gain is below tolerance.

    With ``allow_an`` and ``config.no_an_warm_start`` the AN-free problem is
    solved first and its solution seeds the AN-aided alternation, so the
    AN-aided result can never fall below the AN-free one. ``base`` passes an
    already computed AN-free result for the same scenario and config.
    """
    config = config or MultiSolveConfig()
    params = scen.params
    N = params.num_waveguides
    trace: list[TraceStep] = []

    if pa_x is None:
        pa_x = initial_positions(scen, config)
    pa_x = np.asarray(pa_x, dtype=float)

    prior_iters = 0
    if allow_an and config.no_an_warm_start and warm_start is None:
        if base is None:
            base = solve_multi(scen, P, config, allow_an=False,
                               optimize_positions=optimize_positions, pa_x=pa_x)
        trace.extend(base.trace[:-1])  # drop its refinement step
        pa_x = base.relaxed_state.pa_x
        warm_start = (base.relaxed_state.W, base.relaxed_state.R_m)
        prior_iters = base.iterations

    h_b, h_e = scen.channels(pa_x)
    if warm_start is None:
        W = mrt_covariance(h_b, P)
        R = np.zeros((N, N), dtype=complex)
    else:
        W, R = (np.array(m, dtype=complex) for m in warm_start)
    current = _difference(outer_product(h_b), outer_product(h_e), W, R, params)
    trace.append(TraceStep("init", current))

    converged = False
    it = 0
    for it in range(1, config.max_outer_iters + 1):
        start = current
        W, R, current, _ = optimize_covariances(h_b, h_e, W, R, P, params, config, allow_an, trace)
        if optimize_positions:
            pa_x, current = grid_search_positions(W, R, pa_x, scen, config.grid_step, config.joint_grid)
            h_b, h_e = scen.channels(pa_x)
            trace.append(TraceStep("position", current))
        if current - start < config.outer_tol:
            converged = True
            break

    relaxed = BeamformingState(W, R, pa_x.copy())
    w = rank1_refine(W)
    W1 = np.outer(w, w.conj())
    Hb, He = outer_product(h_b), outer_product(h_e)
    rates = RatePair(rate(Hb, W1, R, params.noise_bob), rate(He, W1, R, params.noise_eve))
    trace.append(TraceStep("refine", rates.difference))
    return MultiResult(BeamformingState(W1, R, pa_x.copy()), rates, trace, converged,
                       prior_iters + it, relaxed)
