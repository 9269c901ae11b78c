"""Air-to-ground channel: LoS probability, pathloss and the coverage disk.

The LoS probability is the elevation-angle sigmoid

    P_LoS(theta) = 1 / (1 + a * exp(-b * (theta - a)))

with theta in degrees, and the mean pathloss mixes free-space loss with the
LoS/NLoS excess losses weighted by that probability.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InfeasibleError, ValidationError

SPEED_OF_LIGHT = 3e8  # m/s

# slack on the threshold comparison, absorbs float rounding at the disk edge
GAMMA_SLACK_DB = 1e-9


@dataclass(frozen=True)
class ChannelParams:
    a: float = 9.61
    b: float = 0.16
    eta_los: float = 1.0
    eta_nlos: float = 20.0
    carrier_hz: float = 2e9
    gamma_db: float = 92.5

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ConfigError("channel: a and b must be positive")
        if not (self.eta_nlos >= self.eta_los >= 0):
            raise ConfigError("channel: need eta_nlos >= eta_los >= 0")
        if not self.carrier_hz > 0:
            raise ConfigError("channel: carrier_hz must be positive")
        if not self.gamma_db > fspl_db(1.0, self.carrier_hz):
            raise ConfigError("channel: gamma_db must exceed the 1 m free-space loss")


@dataclass(frozen=True)
class UavPose:
    x: float
    y: float
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValidationError(f"UAV altitude must be positive, got {self.h}")


def fspl_db(distance_m, carrier_hz):
    """Free-space pathloss 20*log10(4*pi*d*f/c)."""
    return 20.0 * np.log10(4.0 * math.pi * np.asarray(distance_m) * carrier_hz / SPEED_OF_LIGHT)


def los_probability(elevation_deg, p: ChannelParams):
    theta = np.asarray(elevation_deg, dtype=float)
    if np.any(~(theta > 0)) or np.any(theta > 90):
        raise ValidationError("elevation angle must lie in (0, 90] degrees")
    out = 1.0 / (1.0 + p.a * np.exp(-p.b * (theta - p.a)))
    return float(out) if out.ndim == 0 else out


def _excess_db(elevation_deg, p: ChannelParams):
    plos = los_probability(elevation_deg, p)
    return plos * p.eta_los + (1.0 - plos) * p.eta_nlos


def pathloss_db(horizontal_m, h, p: ChannelParams):
    """Mean ATG pathloss in dB for a ground distance ``horizontal_m`` and altitude ``h``.

    Works elementwise on arrays.
    """
    r = np.asarray(horizontal_m, dtype=float)
    hh = np.asarray(h, dtype=float)
    if np.any(~(hh > 0)):
        raise ValidationError("altitude must be positive")
    if np.any(r < 0):
        raise ValidationError("horizontal distance must be non-negative")
    d = np.hypot(r, hh)
    theta = np.degrees(np.arctan2(hh, r))
    out = fspl_db(d, p.carrier_hz) + _excess_db(theta, p)
    return float(out) if out.ndim == 0 else out


def _log_radius(theta_deg, p: ChannelParams):
    # ln r(theta) up to an additive constant, where r is the ground radius at
    # which the pathloss hits gamma for elevation angle theta
    return math.log(math.cos(math.radians(theta_deg))) - _excess_db(theta_deg, p) * math.log(10) / 20.0


def optimal_elevation(p: ChannelParams, tol: float = 1e-6) -> float:
    """Elevation angle (deg) maximizing the coverage radius; golden-section search.

    Depends only on the sigmoid and excess-loss constants, not on gamma.
    """
    invphi = (math.sqrt(5) - 1) / 2
    lo, hi = 1e-9, 90.0 - 1e-9
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = _log_radius(c, p), _log_radius(d, p)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = _log_radius(c, p)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = _log_radius(d, p)
    return (lo + hi) / 2


@functools.lru_cache(maxsize=64)
def max_coverage_radius(p: ChannelParams) -> tuple[float, float]:
    """Largest ground radius ``r_max`` with pathloss <= gamma, and the altitude achieving it.

    Returns ``(r_max, h_opt)``. Raises InfeasibleError when gamma cannot be met
    even at 1 m.
    """
    theta = optimal_elevation(p)
    # invert the pathloss along the ray at angle theta
    log_d = (p.gamma_db - _excess_db(theta, p)) / 20.0 - math.log10(4 * math.pi * p.carrier_hz / SPEED_OF_LIGHT)
    d = 10.0 ** log_d
    r = d * math.cos(math.radians(theta))
    if r < 1.0:
        raise InfeasibleError(f"gamma_db={p.gamma_db} cannot be met at 1 m ground distance")
    return r, d * math.sin(math.radians(theta))


def is_covered(pose: UavPose, user, p: ChannelParams) -> bool:
    r = math.hypot(user[0] - pose.x, user[1] - pose.y)
    return bool(pathloss_db(r, pose.h, p) <= p.gamma_db + GAMMA_SLACK_DB)


def covered_mask(pose: UavPose, users, p: ChannelParams) -> np.ndarray:
    """Vectorized ``is_covered`` over an (n, 2) array of user positions."""
    users = np.asarray(users, dtype=float).reshape(-1, 2)
    r = np.hypot(users[:, 0] - pose.x, users[:, 1] - pose.y)
    return pathloss_db(r, pose.h, p) <= p.gamma_db + GAMMA_SLACK_DB
