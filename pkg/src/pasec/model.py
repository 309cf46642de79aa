"""Geometry, physical constants and the pinching-antenna channel model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8  # m/s


def dbm_to_linear(p_dbm: float) -> float:
    """Convert dBm to linear milliwatts."""
    return 10.0 ** (p_dbm / 10.0)


def linear_to_dbm(p_mw: float) -> float:
    return 10.0 * math.log10(p_mw)


@dataclass(frozen=True)
class SystemParams:
    """Carrier, geometry and noise constants.

    All powers are linear milliwatts. ``eta`` is the free-space reference
    gain ``(wavelength / 4 pi)^2`` in m^2.
    """

    carrier_frequency: float
    n_eff: float
    height: float
    region_side: float
    num_waveguides: int
    noise_bob: float
    noise_eve: float
    wavelength: float = field(init=False)
    guided_wavelength: float = field(init=False)
    eta: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.carrier_frequency > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.carrier_frequency}")
        if not self.n_eff >= 1:
            raise ValueError(f"n_eff must be >= 1, got {self.n_eff}")
        if int(self.num_waveguides) != self.num_waveguides or self.num_waveguides < 1:
            raise ValueError(f"num_waveguides must be a positive integer, got {self.num_waveguides}")
        for name in ("height", "region_side", "noise_bob", "noise_eve"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        lam = SPEED_OF_LIGHT / self.carrier_frequency
        object.__setattr__(self, "wavelength", lam)
        object.__setattr__(self, "guided_wavelength", lam / self.n_eff)
        object.__setattr__(self, "eta", (lam / (4.0 * math.pi)) ** 2)

    def with_waveguides(self, n: int) -> "SystemParams":
        return make_params(
            self.carrier_frequency,
            self.n_eff,
            self.height,
            self.region_side,
            n,
            linear_to_dbm(self.noise_bob),
            linear_to_dbm(self.noise_eve),
        )


def make_params(
    f_c: float = 28e9,
    n_eff: float = 1.4,
    d: float = 3.0,
    D: float = 30.0,
    N: int = 1,
    noise_bob_dbm: float = -90.0,
    noise_eve_dbm: float = -90.0,
) -> SystemParams:
    """Build :class:`SystemParams` from the usual simulation knobs.

    Noise powers are given in dBm and stored in mW. Defaults are the
    28 GHz indoor setup (d = 3 m, D = 30 m, n_eff = 1.4, -90 dBm noise).
    """
    return SystemParams(
        carrier_frequency=f_c,
        n_eff=n_eff,
        height=d,
        region_side=D,
        num_waveguides=N,
        noise_bob=dbm_to_linear(noise_bob_dbm),
        noise_eve=dbm_to_linear(noise_eve_dbm),
    )


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite position {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class WaveguideLayout:
    feed_points: tuple[Position, ...]
    y_coords: tuple[float, ...]
    height: float

    @property
    def num_waveguides(self) -> int:
        return len(self.y_coords)

    def pa_position(self, n: int, x: float) -> Position:
        return Position(x, self.y_coords[n], self.height)


def waveguide_layout(params: SystemParams, feed_x: float = 0.0) -> WaveguideLayout:
    """Waveguides parallel to x, waveguide n at y = n D / N (0-based), height d."""
    D = params.region_side
    if not 0.0 <= feed_x <= D:
        raise ValueError(f"feed_x={feed_x} outside [0, {D}]")
    N = params.num_waveguides
    ys = tuple(n * D / N for n in range(N))
    feeds = tuple(Position(feed_x, y, params.height) for y in ys)
    return WaveguideLayout(feeds, ys, params.height)


def channel_coeff(user: Position, pa: Position, feed: Position, params: SystemParams) -> complex:
    """Free-space path loss with free-space and in-waveguide phase shifts."""
    if pa.y != feed.y or pa.z != feed.z:
        raise ValueError("PA and feed point must lie on the same waveguide")
    r = float(np.linalg.norm(user.as_array() - pa.as_array()))
    if r == 0.0:
        raise ValueError("user coincides with the pinching antenna (singular channel)")
    g = float(np.linalg.norm(feed.as_array() - pa.as_array()))
    phase = -2.0 * math.pi * (r / params.wavelength + g / params.guided_wavelength)
    return math.sqrt(params.eta) * complex(math.cos(phase), math.sin(phase)) / r


def channel_vector(
    user: Position,
    pa_x: Sequence[float],
    layout: WaveguideLayout,
    params: SystemParams,
    guided: bool = True,
) -> np.ndarray:
    """Channel vector from every PA to ``user`` as a complex array of length N.

    ``guided=False`` drops the in-waveguide phase, which is the conventional
    antenna array case.
    """
    pa_x = np.asarray(pa_x, dtype=float)
    if pa_x.shape != (layout.num_waveguides,):
        raise ValueError(f"expected {layout.num_waveguides} PA positions, got shape {pa_x.shape}")
    if np.any(pa_x < 0) or np.any(pa_x > params.region_side):
        raise ValueError("PA positions must lie in [0, D]")
    ys = np.asarray(layout.y_coords, dtype=float)
    feed_x = np.array([f.x for f in layout.feed_points]) if guided else pa_x
    return channel_array(user, pa_x, ys, feed_x, params)


def channel_array(
    user: Position,
    pa_x: np.ndarray,
    pa_y: np.ndarray,
    feed_x: np.ndarray,
    params: SystemParams,
) -> np.ndarray:
    """Vectorized channel coefficients; all array arguments broadcast together."""
    dx = pa_x - user.x
    dy = pa_y - user.y
    dz = params.height - user.z
    r = np.sqrt(dx * dx + dy * dy + dz * dz)
    if np.any(r == 0.0):
        raise ValueError("user coincides with a pinching antenna (singular channel)")
    g = np.abs(pa_x - feed_x)
    phase = -2.0 * np.pi * (r / params.wavelength + g / params.guided_wavelength)
    return np.sqrt(params.eta) * np.exp(1j * phase) / r
