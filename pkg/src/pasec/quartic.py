"""Closed-form real roots of the single-waveguide stationarity polynomial.

The derivative of the secrecy rate with respect to the PA position vanishes
on the real roots of a quartic (equal noise powers). Roots are obtained with
Ferrari's factorization into two quadratics, whose resolvent cubic is solved
with Cardano's formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEGENERACY_TOL = 1e-12
ROOT_TOL = 1e-7


@dataclass
class QuarticWorkspace:
    """Intermediate quantities of one Ferrari solve, kept for inspection."""

    K1: float = math.nan
    K1_eve: float = math.nan
    K2: float = math.nan
    K3: float = math.nan
    alpha: tuple[float, ...] = ()  # alpha_4, alpha_3, alpha_2, alpha_1, alpha_0 (constant term is -alpha_0)
    depressed: tuple[float, float, float] = (math.nan, math.nan, math.nan)  # alpha'_2, alpha'_1, alpha'_0
    beta: tuple[float, float, float] = (math.nan, math.nan, math.nan)
    beta_depressed: tuple[float, float] = (math.nan, math.nan)
    discriminant: float = math.nan
    theta: float = math.nan
    z: float = math.nan
    l: float = math.nan
    omega: float = math.nan
    p: tuple[float, float] = (math.nan, math.nan)  # p_1, p_0
    q: tuple[float, float] = (math.nan, math.nan)  # q_1, q_0
    branch: str = ""
    extra_roots: list[float] = field(default_factory=list)


def stationarity_coefficients(
    w2: float,
    r_m: float,
    bob: tuple[float, float],
    eve: tuple[float, float],
    eta: float,
    height: float,
    noise_bob: float,
    noise_eve: float,
    ws: QuarticWorkspace | None = None,
) -> np.ndarray:
    """Coefficients (highest degree first, length 6) of the polynomial whose
    real roots are the stationary points of the secrecy rate in ``x``.

    ``bob`` and ``eve`` are (x, y-offset from the waveguide) pairs. With equal
    noise powers the degree-5 coefficient is zero and the remaining five are
    ``alpha_4, alpha_3, alpha_2, alpha_1, -alpha_0``.
    """
    xb, yb = bob
    xe, ye = eve
    d2 = height * height
    K1b = w2 * eta / noise_bob
    K1e = w2 * eta / noise_eve
    K2 = xb * xb + yb * yb + d2 + eta * r_m / noise_bob
    K3 = xe * xe + ye * ye + d2 + eta * r_m / noise_eve
    rho = noise_eve / noise_bob
    if ws is not None:
        ws.K1, ws.K1_eve, ws.K2, ws.K3 = K1b, K1e, K2, K3

    if rho == 1.0:
        K1 = K1b
        a4 = 3 * xe - 3 * xb
        a3 = 4 * xb**2 - 4 * xe**2 + 2 * K2 - 2 * K3
        a2 = (K1 * xe - K1 * xb - 4 * K2 * xb + 2 * K3 * xb - 2 * K2 * xe
              + 4 * K3 * xe + 4 * xe**2 * xb - 4 * xb**2 * xe)
        a1 = K2**2 - K3**2 + K1 * K2 - K1 * K3 + 4 * K2 * xb * xe - 4 * K3 * xb * xe
        a0 = K2**2 * xe - K3**2 * xb + K1 * K2 * xe - K1 * K3 * xb
        if ws is not None:
            ws.alpha = (a4, a3, a2, a1, a0)
        return np.array([0.0, a4, a3, a2, a1, -a0])

    c5 = 1.0 - rho
    c4 = (-4 * xb - xe) + rho * (xb + 4 * xe)
    c3 = (K1b + 2 * K2 + 4 * xb**2 + 4 * xb * xe) + rho * (-K1e - 2 * K3 - 4 * xb * xe - 4 * xe**2)
    c2 = ((-2 * K1b * xb - K1b * xe - 4 * K2 * xb - 2 * K2 * xe - 4 * xb**2 * xe)
          + rho * (K1e * xb + 2 * K1e * xe + 2 * K3 * xb + 4 * K3 * xe + 4 * xb * xe**2))
    c1 = ((K1b * K2 + 2 * K1b * xb * xe + K2**2 + 4 * K2 * xb * xe)
          + rho * (-K1e * K3 - 2 * K1e * xb * xe - K3**2 - 4 * K3 * xb * xe))
    c0 = (-K1b * K2 * xe - K2**2 * xe) + rho * (K1e * K3 * xb + K3**2 * xb)
    if ws is not None:
        ws.alpha = (c4, c3, c2, c1, -c0)
    return np.array([c5, c4, c3, c2, c1, c0])


def _cbrt(v: float) -> float:
    return math.copysign(abs(v) ** (1.0 / 3.0), v)


def _quadratic_real(b: float, c: float, scale: float) -> list[float]:
    """Real roots of ``u^2 + b u + c``; a slightly negative discriminant is a double root."""
    disc = b * b - 4.0 * c
    if disc < 0:
        if disc < -1e-12 * max(b * b, abs(c), scale):
            return []
        disc = 0.0
    s = math.sqrt(disc)
    # avoid cancellation
    t = -0.5 * (b + math.copysign(s, b)) if b != 0 else 0.5 * s
    if t == 0.0:
        return [0.0, 0.0]
    return [t, c / t]


def _depressed_cubic_one_root(p: float, q: float, ws: QuarticWorkspace | None = None) -> float:
    """One real root of ``z^3 + p z + q``; the largest one when all three are real."""
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if ws is not None:
        ws.discriminant = disc
    if disc >= 0:
        s = math.sqrt(disc)
        u1 = _cbrt(-q / 2.0 - math.copysign(s, q) if q != 0 else s)
        z = u1 - p / (3.0 * u1) if u1 != 0 else 0.0
        if ws is not None:
            ws.branch = "cardano"
        return z
    r = math.sqrt(-p / 3.0)
    cos_arg = max(-1.0, min(1.0, (-q / 2.0) / math.sqrt(-((p / 3.0) ** 3))))
    theta = math.acos(cos_arg)
    if ws is not None:
        ws.theta = theta
        ws.branch = "trigonometric"
    return 2.0 * r * math.cos(theta / 3.0)


def _cubic_real(a3: float, a2: float, a1: float, a0: float) -> list[float]:
    """All real roots of a cubic with nonzero leading coefficient."""
    b, c, d = a2 / a3, a1 / a3, a0 / a3
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc >= 0:
        z = _depressed_cubic_one_root(p, q)
        roots = [z + shift]
        # remaining quadratic z^2 + z0 z + (z0^2 + p) may carry a double root
        roots += [r + shift for r in _quadratic_real(z, z * z + p, abs(p))]
        return roots
    r = 2.0 * math.sqrt(-p / 3.0)
    theta = math.acos(max(-1.0, min(1.0, (-q / 2.0) / math.sqrt(-((p / 3.0) ** 3)))))
    return [r * math.cos((theta - 2.0 * math.pi * k) / 3.0) + shift for k in range(3)]


def _lower_degree_real(coeffs: np.ndarray) -> list[float]:
    """Real roots of a polynomial of degree <= 3 (leading zeros allowed)."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if c.size <= 1:
        return []
    if c.size == 2:
        return [-c[1] / c[0]]
    if c.size == 3:
        return _quadratic_real(c[1] / c[0], c[2] / c[0], 0.0)
    return _cubic_real(*c)


def ferrari_roots(a4: float, a3: float, a2: float, a1: float, a0: float,
                  ws: QuarticWorkspace | None = None) -> list[float]:
    """Real roots of ``a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0`` (``a4 != 0``)."""
    if ws is None:
        ws = QuarticWorkspace()
    A3, A2, A1, A0 = a3 / a4, a2 / a4, a1 / a4, a0 / a4
    d2 = A2 - 3.0 / 8.0 * A3**2
    d1 = A1 - A2 * A3 / 2.0 + A3**3 / 8.0
    d0 = A0 + A3**2 * A2 / 16.0 - A3 * A1 / 4.0 - 3.0 / 256.0 * A3**4
    ws.depressed = (d2, d1, d0)
    shift = -A3 / 4.0
    scale = max(abs(A3) ** 4, abs(A2) ** 2, abs(A1) ** (4.0 / 3.0), abs(A0), 1e-300)

    if abs(d1) <= 1e-14 * scale ** 0.75:
        # biquadratic: u^4 + d2 u^2 + d0
        ws.branch = "biquadratic"
        us = []
        for v in _quadratic_real(d2, d0, scale ** 0.5):
            if v >= 0:
                us += [math.sqrt(v), -math.sqrt(v)]
            elif v > -1e-12 * scale ** 0.5:
                us.append(0.0)
        return [u + shift for u in us]

    b2 = 4.0 * d0 - d2 * d2
    b1 = -2.0 * d2 * d1 * d1
    b0 = -(d1**4)
    ws.beta = (b2, b1, b0)
    bp1 = b1 - b2 * b2 / 3.0
    bp0 = 2.0 * b2**3 / 27.0 - b1 * b2 / 3.0 + b0
    ws.beta_depressed = (bp1, bp0)
    z = _depressed_cubic_one_root(bp1, bp0, ws)
    ws.z = z
    l = z - b2 / 3.0
    ws.l = l
    if not math.isfinite(l):
        raise ArithmeticError("non-finite resolvent root")
    if l <= 0:
        # rounding pushed the positive resolvent root to zero; polish with Newton
        l = max(abs(d1) ** (2.0 / 3.0), 1e-300)
        for _ in range(60):
            f = ((l + b2) * l + b1) * l + b0
            fp = (3 * l + 2 * b2) * l + b1
            if fp == 0:
                break
            step = f / fp
            l = max(l - step, l / 10)
            if abs(step) <= 1e-15 * l:
                break
        ws.l = l
    omega = math.sqrt(l)
    ws.omega = omega
    p1 = d1 / omega
    p0 = 0.5 * (d2 - omega + d1 * d1 / l)
    q1 = -p1
    q0 = omega + p0
    ws.p = (p1, p0)
    ws.q = (q1, q0)
    us = _quadratic_real(p1, p0, scale ** 0.5) + _quadratic_real(q1, q0, scale ** 0.5)
    return [u + shift for u in us]


def _polish(coeffs: np.ndarray, x: float, iters: int = 3) -> float:
    deriv = np.polyder(coeffs)
    f = np.polyval(coeffs, x)
    for _ in range(iters):
        fp = np.polyval(deriv, x)
        if fp == 0 or not math.isfinite(fp):
            break
        xn = x - f / fp
        fn = np.polyval(coeffs, xn)
        if not abs(fn) < abs(f):
            break
        x, f = xn, fn
    return float(x)


def _bisect_real_root(coeffs: np.ndarray) -> float:
    """One real root of an odd-degree polynomial by bracketing bisection."""
    c = coeffs / coeffs[0]
    bound = 1.0 + float(np.max(np.abs(c[1:])))
    lo, hi = -bound, bound
    flo = np.polyval(c, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = np.polyval(c, mid)
        if fm == 0 or hi - lo <= 1e-15 * max(1.0, abs(mid)):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def polynomial_scale(coeffs: np.ndarray, x_scale: float) -> float:
    """Magnitude of the largest term ``|c_k| X^k`` for a typical ``|x| = X``."""
    c = np.asarray(coeffs, dtype=float)
    deg = c.size - 1
    powers = x_scale ** np.arange(deg, -1, -1, dtype=float)
    return float(np.max(np.abs(c) * powers))


def real_roots(coeffs: np.ndarray, x_scale: float = 1.0,
               ws: QuarticWorkspace | None = None) -> list[float]:
    """Real roots of a polynomial of degree <= 5 (highest degree first, length 6).

    Degree-4 problems go through Ferrari's method. A degree-5 polynomial is
    deflated by one bracketed real root first. Leading coefficients below the
    degeneracy threshold fall through to the lower-degree closed forms.
    """
    c = np.asarray(coeffs, dtype=float)
    if not np.all(np.isfinite(c)):
        raise ArithmeticError("non-finite polynomial coefficients")
    X = max(1.0, x_scale)
    scale = polynomial_scale(c, X)
    if scale == 0.0:
        return []
    deg = c.size - 1
    tiny = DEGENERACY_TOL * scale
    # strip negligible leading coefficients
    k = 0
    while k < c.size and abs(c[k]) * X ** (deg - k) < tiny:
        k += 1
    c = c[k:]
    if ws is None:
        ws = QuarticWorkspace()
    roots: list[float] = []
    if c.size == 6:
        r = _bisect_real_root(c)
        ws.extra_roots.append(r)
        roots.append(r)
        quartic, _ = np.polydiv(c, np.array([1.0, -r]))
        c4 = quartic
    else:
        c4 = c
    if c4.size == 5:
        roots += ferrari_roots(*c4, ws=ws)
    else:
        ws.branch = f"degree-{c4.size - 1}"
        roots += _lower_degree_real(c4)
    out = []
    for r in roots:
        if not math.isfinite(r):
            raise ArithmeticError("non-finite root")
        out.append(_polish(c, r))
    return sorted(out)


def root_residual_ok(coeffs: np.ndarray, x: float, tol: float = ROOT_TOL) -> bool:
    """``|p(x)|`` relative to the largest term magnitude at ``|x|``."""
    c = np.asarray(coeffs, dtype=float)
    scale = polynomial_scale(c, max(1.0, abs(x)))
    return abs(np.polyval(c, x)) <= tol * scale
