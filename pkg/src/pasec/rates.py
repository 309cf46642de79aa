"""Achievable rates for Bob and Eve and the resulting secrecy rate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PSD_EPS = 1e-9


@dataclass(frozen=True)
class BeamformingState:
    """Beamforming covariance ``W``, AN covariance ``R_m`` and PA x-positions."""

    W: np.ndarray
    R_m: np.ndarray
    pa_x: np.ndarray

    @classmethod
    def scalar(cls, w2: float, r_m: float, x: float) -> "BeamformingState":
        return cls(np.array([[w2]], dtype=complex), np.array([[r_m]], dtype=complex), np.array([x]))

    @property
    def power(self) -> float:
        return float(np.trace(self.W).real + np.trace(self.R_m).real)


@dataclass(frozen=True)
class RatePair:
    rate_bob: float
    rate_eve: float
    secrecy_rate: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "secrecy_rate", max(0.0, self.rate_bob - self.rate_eve))

    @property
    def difference(self) -> float:
        """Unclamped ``rate_bob - rate_eve`` used by the optimizers."""
        return self.rate_bob - self.rate_eve


def outer_product(h) -> np.ndarray:
    h = np.atleast_1d(np.asarray(h, dtype=complex))
    if h.size == 0:
        raise ValueError("empty channel vector")
    return np.outer(h, h.conj())


def _quad(H: np.ndarray, X: np.ndarray) -> float:
    # Tr(H X) for Hermitian H, X
    return float(np.real(np.vdot(H.conj().T, X)))


def rate(H: np.ndarray, W: np.ndarray, R_m: np.ndarray, noise: float) -> float:
    """``log2(1 + Tr(H W) / (Tr(H R_m) + noise))`` in bps/Hz."""
    if not noise > 0:
        raise ValueError("noise power must be positive")
    H = np.atleast_2d(H)
    sig = _quad(H, np.atleast_2d(W))
    intf = _quad(H, np.atleast_2d(R_m))
    scale = abs(np.trace(H).real) * max(abs(np.trace(np.atleast_2d(W))), abs(np.trace(np.atleast_2d(R_m))), 1e-300)
    tol = PSD_EPS * scale
    if sig < -tol or intf < -tol:
        raise ValueError(f"negative trace term (signal={sig}, interference={intf}); inputs not PSD")
    sig = max(sig, 0.0)
    intf = max(intf, 0.0)
    return math.log2(1.0 + sig / (intf + noise))


def rate_vector_form(h: np.ndarray, w: np.ndarray, R_m: np.ndarray, noise: float) -> float:
    """Rate written with a beamforming vector ``w`` instead of its covariance."""
    h = np.asarray(h, dtype=complex)
    num = abs(np.vdot(h, w)) ** 2
    den = float(np.real(np.vdot(h, np.atleast_2d(R_m) @ h))) + noise
    return math.log2(1.0 + num / den)


def secrecy_rate(h_b, h_e, state: BeamformingState, noise_bob: float, noise_eve: float) -> RatePair:
    rb = rate(outer_product(h_b), state.W, state.R_m, noise_bob)
    re = rate(outer_product(h_e), state.W, state.R_m, noise_eve)
    return RatePair(rb, re)


def secrecy_difference(H_b: np.ndarray, H_e: np.ndarray, W: np.ndarray, R_m: np.ndarray,
                       noise_bob: float, noise_eve: float) -> float:
    """Unclamped ``R_Bob - R_Eve`` from precomputed channel covariances."""
    return rate(H_b, W, R_m, noise_bob) - rate(H_e, W, R_m, noise_eve)
