"""Brute-force reference computations used to cross-check the solvers.

Each oracle only evaluates the objective on a grid; none of them calls the
closed forms or the SDP solver it is checking.
"""

from __future__ import annotations

import math

import numpy as np

from .model import Position, make_params
from .multi import Scenario, gamma_star, mrt_covariance, solve_fixed_gamma
from .rates import outer_product
from .sdp import Constraint, SdpStandardForm, solve_sdp
from .single import (ScalarScenario, optimal_position_single, sr_closed_form,
                     sr_difference)


def random_scalar_scenario(rng: np.random.Generator, power: float | None = None,
                           D: float = 30.0) -> ScalarScenario:
    params = make_params(D=D)
    bob = Position(*rng.uniform(0.0, D, 2))
    eve = Position(*rng.uniform(0.0, D, 2))
    if power is None:
        power = 10.0 ** (rng.uniform(-10.0, 20.0) / 10.0)
    return ScalarScenario(bob, eve, params, power)


def grid_best_position(w2: float, r_m: float, scen: ScalarScenario, step: float = 1e-3) -> tuple[float, float]:
    D = scen.params.region_side
    xs = np.linspace(0.0, D, int(round(D / step)) + 1)
    vals = sr_difference(xs, w2, r_m, scen)
    k = int(np.argmax(vals))
    return float(xs[k]), float(vals[k])


def quartic_suite(seed: int, count: int = 1000, step: float = 1e-3) -> dict:
    """Closed-form PA position versus a dense grid, equal noise, random power splits.

    Returns the worst shortfall ``SR_grid - SR_closed`` (negative is better).
    """
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(count):
        scen = random_scalar_scenario(rng)
        w2 = scen.power * rng.uniform()
        r_m = scen.power - w2
        x = optimal_position_single(w2, r_m, scen)
        closed = float(sr_difference(x, w2, r_m, scen))
        _, best = grid_best_position(w2, r_m, scen, step)
        worst = max(worst, best - closed)
    return {"suite": "quartic", "count": count, "worst_shortfall": worst, "passed": worst <= 1e-6}


def power_split_suite(seed: int, count: int = 1000, points: int = 101) -> dict:
    """Maximize the full-budget secrecy rate over an AN-power grid and check the endpoint."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    mismatches = 0
    for _ in range(count):
        scen = random_scalar_scenario(rng)
        x = rng.uniform(0.0, scen.params.region_side)
        grid = np.linspace(0.0, scen.power, points)
        vals = np.array([sr_closed_form(r, x, scen) for r in grid])
        p = scen.params
        gb = float(scen.sq_dist(x, scen.bob)) * p.noise_bob
        ge = float(scen.sq_dist(x, scen.eve)) * p.noise_eve
        predicted = scen.power if gb > ge else 0.0
        at_end = sr_closed_form(predicted, x, scen)
        worst = max(worst, abs(at_end - vals.max()))
        if gb != ge and grid[int(np.argmax(vals))] != predicted:
            mismatches += 1
    return {"suite": "lemma2", "count": count, "worst_gap": worst, "argmax_mismatches": mismatches,
            "passed": worst <= 1e-9 and mismatches == 0}


def random_channels(rng: np.random.Generator, N: int):
    """``(h_b, h_e, params)`` for a random Bob/Eve pair and random PA positions."""
    params = make_params(N=N)
    D = params.region_side
    scen = Scenario(Position(*rng.uniform(0, D, 2)), Position(*rng.uniform(0, D, 2)), params)
    return scen.channels(rng.uniform(0, D, N)) + (params,)


def _psd2_grid(n_c: int = 6, n_rho: int = 4, n_psi: int = 8) -> np.ndarray:
    """Unit-trace 2x2 PSD matrices ``[[c, r e^{j psi} sqrt(c(1-c))], [.., 1-c]]``."""
    mats = []
    for c in np.linspace(0.0, 1.0, n_c):
        for r in np.linspace(0.0, 1.0, n_rho):
            for psi in np.linspace(0.0, 2 * np.pi, n_psi, endpoint=False):
                off = r * np.exp(1j * psi) * math.sqrt(c * (1 - c))
                mats.append([[c, off], [np.conj(off), 1 - c]])
    return np.array(mats, dtype=complex)


def fixed_gamma_grid_oracle(gamma, H_B, H_E, noise_bob, noise_eve, P,
                            n_theta: int = 16, n_phi: int = 16, n_split: int = 11) -> float:
    """Best fixed-gamma objective over rank-1 ``W`` times a parameterized PSD ``R_m`` grid (N = 2)."""
    th = np.linspace(0.0, np.pi / 2, n_theta)
    ph = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    T, F = np.meshgrid(th, ph, indexing="ij")
    u = np.stack([np.cos(T).ravel(), (np.sin(T) * np.exp(1j * F)).ravel()], axis=1)
    qb_w = np.einsum("gi,ij,gj->g", u.conj(), H_B, u).real
    qe_w = np.einsum("gi,ij,gj->g", u.conj(), H_E, u).real
    Rs = _psd2_grid()
    qb_r = np.einsum("ij,kji->k", H_B, Rs).real
    qe_r = np.einsum("ij,kji->k", H_E, Rs).real
    best = -math.inf
    for s in np.linspace(0.0, 1.0, n_split):
        pw, pr = s * P, (1 - s) * P
        bw = pw * qb_w[:, None]
        ew = pw * qe_w[:, None]
        br = pr * qb_r[None, :]
        er = pr * qe_r[None, :]
        feasible = ew <= (gamma - 1.0) * (er + noise_eve) * (1 + 1e-12)
        obj = (br + bw + noise_bob) / (gamma * (br + noise_bob))
        obj = np.where(feasible, obj, -np.inf)
        best = max(best, float(obj.max()))
    return best


def sdp_suite(seed: int, count: int = 100) -> dict:
    """Max-eigenvalue SDPs and N = 2 fixed-slack subproblems against their oracles."""
    rng = np.random.default_rng(seed)
    eig_err = 0.0
    gaps = []
    for _ in range(count):
        n = int(rng.integers(1, 7))
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        C = (A + A.conj().T) / 2
        sol = solve_sdp(SdpStandardForm([n], [C], eq_constraints=[Constraint([np.eye(n)], rhs=1.0)]))
        eig_err = max(eig_err, abs(sol.objective - np.linalg.eigvalsh(C)[-1]))
        if sol.optimal:
            gaps.append(sol.gap)
    shortfall = -math.inf
    for _ in range(count):
        h_b, h_e, params = random_channels(rng, 2)
        P = 10.0 ** (rng.uniform(-10.0, 20.0) / 10.0)
        Hb, He = outer_product(h_b), outer_product(h_e)
        gamma = gamma_star(mrt_covariance(h_b, P), np.zeros((2, 2)), He, params.noise_eve) * rng.uniform(0.5, 1.5)
        gamma = max(gamma, 1.0 + 1e-6)
        res = solve_fixed_gamma(gamma, Hb, He, params.noise_bob, params.noise_eve, P)
        oracle = fixed_gamma_grid_oracle(gamma, Hb, He, params.noise_bob, params.noise_eve, P)
        shortfall = max(shortfall, oracle - res.objective)
    return {"suite": "sdp", "count": count, "max_eig_error": eig_err, "worst_grid_shortfall": shortfall,
            "max_gap_when_optimal": max(gaps) if gaps else math.nan,
            "passed": eig_err <= 1e-7 and shortfall <= 1e-3 and all(g <= 1e-8 for g in gaps)}


SUITES = {"quartic": quartic_suite, "lemma2": power_split_suite, "sdp": sdp_suite}
