"""Single-waveguide secrecy-rate maximization.

Alternates a closed-form PA-position step and an endpoint power split
between the confidential signal and artificial noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Position, SystemParams
from .quartic import QuarticWorkspace, real_roots, stationarity_coefficients
from .rates import BeamformingState, RatePair


@dataclass(frozen=True)
class ScalarScenario:
    bob: Position
    eve: Position
    params: SystemParams
    power: float  # mW
    waveguide_y: float = 0.0

    def __post_init__(self) -> None:
        if not self.power > 0:
            raise ValueError("power budget must be positive")
        D = self.params.region_side
        for name, u in (("bob", self.bob), ("eve", self.eve)):
            if not (0 <= u.x <= D and 0 <= u.y <= D) or u.z != 0:
                raise ValueError(f"{name} must lie in the [0, D]^2 region at z = 0, got {u}")

    def sq_dist(self, x, user: Position):
        dy = user.y - self.waveguide_y
        return (np.asarray(x, dtype=float) - user.x) ** 2 + dy * dy + self.params.height ** 2


def sr_difference(x, w2: float, r_m: float, scen: ScalarScenario):
    """Unclamped ``R_Bob - R_Eve`` for scalar powers, vectorized over ``x``."""
    p = scen.params
    rb2 = scen.sq_dist(x, scen.bob)
    re2 = scen.sq_dist(x, scen.eve)
    sb = np.log2(1.0 + w2 * p.eta / (r_m * p.eta + p.noise_bob * rb2))
    se = np.log2(1.0 + w2 * p.eta / (r_m * p.eta + p.noise_eve * re2))
    return sb - se


def rate_pair(x: float, w2: float, r_m: float, scen: ScalarScenario) -> RatePair:
    p = scen.params
    rb2 = float(scen.sq_dist(x, scen.bob))
    re2 = float(scen.sq_dist(x, scen.eve))
    return RatePair(
        math.log2(1.0 + w2 * p.eta / (r_m * p.eta + p.noise_bob * rb2)),
        math.log2(1.0 + w2 * p.eta / (r_m * p.eta + p.noise_eve * re2)),
    )


def sr_closed_form(r_m: float, x: float, scen: ScalarScenario) -> float:
    """Secrecy rate with the full budget used (``w^2 = P - R_m``), unclamped."""
    p = scen.params
    P = scen.power
    rb2 = float(scen.sq_dist(x, scen.bob))
    re2 = float(scen.sq_dist(x, scen.eve))
    num = (p.eta * P + rb2 * p.noise_bob) * (p.eta * r_m + re2 * p.noise_eve)
    den = (p.eta * P + re2 * p.noise_eve) * (p.eta * r_m + rb2 * p.noise_bob)
    return math.log2(num / den)


def quartic_position_candidates(w2: float, r_m: float, scen: ScalarScenario,
                                ws: QuarticWorkspace | None = None) -> list[float]:
    """All real stationary points of the secrecy rate along the waveguide."""
    if w2 < 0 or r_m < 0:
        raise ValueError("powers must be nonnegative")
    p = scen.params
    coeffs = stationarity_coefficients(
        w2, r_m,
        (scen.bob.x, scen.bob.y - scen.waveguide_y),
        (scen.eve.x, scen.eve.y - scen.waveguide_y),
        p.eta, p.height, p.noise_bob, p.noise_eve, ws,
    )
    return real_roots(coeffs, x_scale=p.region_side, ws=ws)


def optimal_position_single(w2: float, r_m: float, scen: ScalarScenario) -> float:
    """Best PA position in ``[0, D]`` among the stationary points and both endpoints."""
    D = scen.params.region_side
    cands = {0.0, D}
    cands.update(x for x in quartic_position_candidates(w2, r_m, scen) if 0.0 <= x <= D)
    xs = np.array(sorted(cands))
    vals = sr_difference(xs, w2, r_m, scen)
    return float(xs[int(np.argmax(vals))])


def optimal_power_split(x: float, scen: ScalarScenario) -> tuple[float, float]:
    """Endpoint split ``(w^2, R_m)``: all power to Bob unless Eve's link is stronger."""
    p = scen.params
    gb = float(scen.sq_dist(x, scen.bob)) * p.noise_bob
    ge = float(scen.sq_dist(x, scen.eve)) * p.noise_eve
    if gb > ge:
        return 0.0, scen.power
    return scen.power, 0.0


@dataclass
class SingleResult:
    state: BeamformingState
    rates: RatePair
    trace: list[float] = field(default_factory=list)
    converged: bool = True
    iterations: int = 0


def solve_single(scen: ScalarScenario, tol: float = 1e-9, max_iters: int = 50,
                 allow_an: bool = True) -> SingleResult:
    """Alternate position and power steps until the round gain drops below ``tol``.

    With ``allow_an=False`` the AN power is pinned to zero and only the
    position step runs.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    D = scen.params.region_side
    x = min(max(scen.bob.x, 0.0), D)
    w2, r_m = scen.power, 0.0
    current = float(sr_difference(x, w2, r_m, scen))
    trace = [current]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        start = current
        x_new = optimal_position_single(w2, r_m, scen)
        val = float(sr_difference(x_new, w2, r_m, scen))
        if val >= current:
            x, current = x_new, val
        trace.append(current)
        if allow_an:
            w2_new, r_new = optimal_power_split(x, scen)
            val = float(sr_difference(x, w2_new, r_new, scen))
            if val >= current:
                w2, r_m, current = w2_new, r_new, val
            trace.append(current)
        if current - start < tol:
            converged = True
            break
    state = BeamformingState.scalar(w2, r_m, x)
    return SingleResult(state, rate_pair(x, w2, r_m, scen), trace, converged, it)
