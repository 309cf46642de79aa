import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pasec import oracles
from pasec.model import Position, make_params
from pasec.quartic import (QuarticWorkspace, ferrari_roots, real_roots, root_residual_ok,
                           stationarity_coefficients)
from pasec.rates import outer_product, rate
from pasec.single import (ScalarScenario, optimal_position_single, optimal_power_split,
                          quartic_position_candidates, rate_pair, solve_single, sr_closed_form,
                          sr_difference)

P10 = 10.0  # 10 dBm in mW


def scen(bob, eve, power=P10, **kw):
    return ScalarScenario(Position(*bob), Position(*eve), make_params(**kw), power)


# -- polynomial root finding ---------------------------------------------------

@pytest.mark.parametrize("roots", [(1, 2, 3, 4), (-5, -1, 0.5, 7), (2, 2, 3, 3), (0.1, 0.2, 30, 31)])
def test_ferrari_four_real_roots(roots):
    c = np.poly(roots)
    got = sorted(ferrari_roots(*c))
    np.testing.assert_allclose(got, sorted(roots), atol=1e-5)


def test_ferrari_complex_pairs():
    # (x^2 + 1)(x^2 + 4) has no real roots
    assert ferrari_roots(1, 0, 5, 0, 4) == []
    # (x - 1)(x + 2)(x^2 + x + 3)
    c = np.polymul(np.poly([1, -2]), [1, 1, 3])
    np.testing.assert_allclose(sorted(ferrari_roots(*c)), [-2, 1], atol=1e-9)


def test_ferrari_biquadratic_branch():
    ws = QuarticWorkspace()
    got = sorted(ferrari_roots(1, 0, -5, 0, 4, ws))
    assert ws.branch == "biquadratic"
    np.testing.assert_allclose(got, [-2, -1, 1, 2], atol=1e-12)


def test_degenerate_leading_coefficient_falls_back():
    ws = QuarticWorkspace()
    got = real_roots(np.array([0, 0, 0, 1.0, -3.0, 2.0]), ws=ws)
    assert ws.branch == "degree-2"
    np.testing.assert_allclose(got, [1, 2], atol=1e-12)


def test_quintic_is_deflated():
    c = np.poly([-3, -1, 0.5, 2, 4])
    np.testing.assert_allclose(real_roots(c, x_scale=4), [-3, -1, 0.5, 2, 4], atol=1e-7)


def test_non_finite_coefficients():
    with pytest.raises(ArithmeticError):
        real_roots(np.array([0, 1, math.nan, 0, 0, 1]))


def test_roots_match_companion_matrix():
    rng = np.random.default_rng(11)
    for _ in range(300):
        s = oracles.random_scalar_scenario(rng)
        w2 = s.power * rng.uniform()
        c = stationarity_coefficients(w2, s.power - w2, (s.bob.x, s.bob.y), (s.eve.x, s.eve.y),
                                      s.params.eta, s.params.height, s.params.noise_bob, s.params.noise_eve)
        ours = quartic_position_candidates(w2, s.power - w2, s)
        ref = np.roots(c[1:])
        ref = np.sort(ref[np.abs(ref.imag) < 1e-6 * np.maximum(1, np.abs(ref))].real)
        assert len(ours) == len(ref)
        np.testing.assert_allclose(ours, ref, atol=1e-6)
        for x in ours:
            assert root_residual_ok(c, x)


def test_colocated_x_is_a_root():
    s = scen((10, 4), (10, 20))
    cands = quartic_position_candidates(s.power, 0.0, s)
    assert min(abs(x - 10) for x in cands) < 1e-8


def test_equal_noise_has_no_quintic_term():
    ws = QuarticWorkspace()
    c = stationarity_coefficients(1.0, 0.5, (3, 1), (20, 9), 7e-7, 3.0, 1e-9, 1e-9, ws)
    assert c[0] == 0.0
    assert c[-1] == -ws.alpha[-1]


def test_unequal_noise_candidates_are_stationary():
    s = scen((8, 6), (22, 14), noise_eve_dbm=-84)
    for x in quartic_position_candidates(2.0, 8.0, s):
        h = 1e-5
        d = (sr_difference(x + h, 2.0, 8.0, s) - sr_difference(x - h, 2.0, 8.0, s)) / (2 * h)
        assert abs(d) < 1e-6


# -- position and power steps -------------------------------------------------

def test_far_eve_puts_pa_under_bob():
    s = ScalarScenario(Position(12.3, 5.0), Position(5000.0, 5000.0), make_params(D=5000), 1e-3)
    assert optimal_position_single(s.power, 0.0, s) == pytest.approx(12.3, abs=1e-4)


def test_position_matches_grid_reference():
    s = scen((10, 5), (20, 25))
    x = optimal_position_single(s.power, 0.0, s)
    _, best = oracles.grid_best_position(s.power, 0.0, s, 1e-3)
    assert float(sr_difference(x, s.power, 0.0, s)) >= best - 1e-6


def test_coincident_users():
    s = scen((10, 10), (10, 10))
    x = optimal_position_single(s.power, 0.0, s)
    assert 0 <= x <= 30
    assert float(sr_difference(x, s.power, 0.0, s)) == pytest.approx(0.0, abs=1e-12)


def test_closed_form_examples():
    s = scen((5, 3), (20, 20))
    assert sr_closed_form(s.power, 7.0, s) == pytest.approx(0.0, abs=1e-12)
    # Bob and Eve at the same distance from the PA
    t = scen((10, 4), (14, 4))
    for r in (0.0, 1.0, 5.0):
        assert sr_closed_form(r, 12.0, t) == pytest.approx(0.0, abs=1e-12)


def test_closed_form_matches_rates_module():
    rng = np.random.default_rng(7)
    for _ in range(50):
        s = oracles.random_scalar_scenario(rng)
        x = rng.uniform(0, 30)
        r_m = s.power * rng.uniform()
        p = s.params
        hb2 = p.eta / float(s.sq_dist(x, s.bob))
        he2 = p.eta / float(s.sq_dist(x, s.eve))
        W, R = np.array([[s.power - r_m]]), np.array([[r_m]])
        ref = rate(np.array([[hb2]]), W, R, p.noise_bob) - rate(np.array([[he2]]), W, R, p.noise_eve)
        assert sr_closed_form(r_m, x, s) == pytest.approx(ref, abs=1e-10)
        assert rate_pair(x, s.power - r_m, r_m, s).difference == pytest.approx(ref, abs=1e-10)


def test_power_split_rules():
    s = scen((10, 2), (25, 25))
    assert optimal_power_split(10.0, s) == (s.power, 0.0)
    assert optimal_power_split(25.0, scen((10, 28), (25, 2))) == (0.0, s.power)
    tie = scen((8, 4), (12, 4))
    assert optimal_power_split(10.0, tie) == (tie.power, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 30), st.floats(0, 30), st.floats(0, 30), st.floats(0, 30), st.floats(0, 30),
       st.floats(0.01, 0.99))
def test_sr_is_monotone_in_an_power(bx, by, ex, ey, x, frac):
    # with the budget tight, SR moves monotonically in R_m; its sign is set by the distance comparison
    s = scen((bx, by), (ex, ey))
    gb = float(s.sq_dist(x, s.bob))
    ge = float(s.sq_dist(x, s.eve))
    lo, hi = sr_closed_form(0.0, x, s), sr_closed_form(frac * s.power, x, s)
    if gb < ge:
        assert hi <= lo + 1e-12
    elif gb > ge:
        assert hi >= lo - 1e-12


def test_scenario_validation():
    with pytest.raises(ValueError):
        scen((10, 10), (40, 10))
    with pytest.raises(ValueError):
        scen((10, 10), (20, 10), power=0.0)


# -- alternating solver -------------------------------------------------------

def test_eve_dominant_everywhere():
    # Eve directly beneath the waveguide, Bob far away across the room
    s = scen((15, 29), (15, 0.0))
    res = solve_single(s)
    assert res.rates.secrecy_rate == 0.0
    assert res.state.R_m[0, 0].real == pytest.approx(s.power)


def test_brute_force_two_dimensional():
    s = scen((15, 0.5), (15, 25))
    res = solve_single(s)
    xs = np.arange(0, 30 + 1e-9, 1e-2)
    best = -math.inf
    for r in np.linspace(0, s.power, 101):
        best = max(best, float(np.max(sr_difference(xs, s.power - r, r, s))))
    assert res.rates.secrecy_rate == pytest.approx(max(best, 0.0), abs=1e-3)
    assert res.rates.secrecy_rate >= best - 1e-9


def test_single_round_still_improves():
    s = scen((4, 12), (18, 3))
    res = solve_single(s, tol=math.inf)
    assert res.iterations == 1
    assert res.trace[-1] >= res.trace[0]
    assert np.all(np.diff(res.trace) >= 0)


def test_no_an_keeps_full_signal_power():
    s = scen((6, 20), (6, 2))
    res = solve_single(s, allow_an=False)
    assert res.state.R_m[0, 0] == 0
    assert res.state.W[0, 0].real == pytest.approx(s.power)


def test_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        solve_single(scen((1, 1), (2, 2)), tol=0)


def test_state_matches_reported_rates():
    s = scen((9, 9), (21, 3))
    res = solve_single(s)
    x = float(res.state.pa_x[0])
    h_b2 = s.params.eta / float(s.sq_dist(x, s.bob))
    rb = rate(np.array([[h_b2]]), res.state.W, res.state.R_m, s.params.noise_bob)
    assert rb == pytest.approx(res.rates.rate_bob, rel=1e-12)
    assert res.state.power == pytest.approx(s.power)
