import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavlab.channel import (ChannelParams, UavPose, covered_mask, fspl_db, is_covered, los_probability,
                            max_coverage_radius, optimal_elevation, pathloss_db)
from uavlab.errors import ConfigError, InfeasibleError, ValidationError

URBAN = ChannelParams(a=9.61, b=0.16, eta_los=1.0, eta_nlos=20.0, carrier_hz=2e9)


def test_los_probability_at_zenith():
    expected = 1.0 / (1.0 + 9.61 * math.exp(-0.16 * (90 - 9.61)))
    assert los_probability(90, URBAN) == pytest.approx(expected, rel=1e-15)
    assert los_probability(90, URBAN) == pytest.approx(0.99997, abs=1e-5)


def test_los_probability_at_theta_equal_a():
    assert los_probability(9.61, URBAN) == pytest.approx(1 / 10.61, rel=1e-14)


def test_los_probability_domain():
    for bad in (0.0, -1.0, 90.0001):
        with pytest.raises(ValidationError):
            los_probability(bad, URBAN)


@given(st.floats(1e-6, 90), st.floats(1e-6, 90))
def test_los_probability_monotone(t1, t2):
    lo, hi = sorted((t1, t2))
    p_lo, p_hi = los_probability(lo, URBAN), los_probability(hi, URBAN)
    assert 0 < p_lo < 1 and 0 < p_hi < 1
    assert p_lo <= p_hi
    if hi - lo > 1e-3:
        assert p_lo < p_hi


def test_pathloss_overhead():
    fspl = 20 * math.log10(4 * math.pi * 1000 * 2e9 / 3e8)
    assert fspl == pytest.approx(98.46, abs=5e-3)
    plos = los_probability(90, URBAN)
    expected = fspl + plos * 1.0 + (1 - plos) * 20.0
    assert pathloss_db(0.0, 1000.0, URBAN) == pytest.approx(expected, rel=1e-14)
    assert pathloss_db(0.0, 1000.0, URBAN) == pytest.approx(99.46, abs=5e-3)


@given(st.floats(1.0, 5000.0), st.floats(1.0, 89.0), st.floats(1.01, 50.0))
def test_pathloss_scaling_law(d, theta_deg, k):
    th = math.radians(theta_deg)
    base = pathloss_db(d * math.cos(th), d * math.sin(th), URBAN)
    scaled = pathloss_db(k * d * math.cos(th), k * d * math.sin(th), URBAN)
    assert scaled - base == pytest.approx(20 * math.log10(k), rel=1e-9)


def test_pathloss_grazing_limit():
    val = pathloss_db(1000.0, 0.01, URBAN)
    plos0 = 1 / (1 + 9.61 * math.exp(0.16 * 9.61))  # sigmoid at theta -> 0
    expected = fspl_db(math.hypot(1000.0, 0.01), 2e9) + plos0 * 1.0 + (1 - plos0) * 20.0
    assert val == pytest.approx(expected, abs=1e-4)
    assert val - fspl_db(1000.0, 2e9) > 19.5


def test_pathloss_domain():
    with pytest.raises(ValidationError):
        pathloss_db(10.0, 0.0, URBAN)
    with pytest.raises(ValidationError):
        pathloss_db(-1.0, 10.0, URBAN)


def _sweep_best_elevation(p, gamma):
    """Brute-force oracle: for every angle on a 0.01 deg grid, bisect the slant
    distance at which pathloss_db reaches gamma, and keep the largest ground radius."""
    theta = np.arange(0.01, 90.0, 0.01)
    rad = np.radians(theta)
    lo, hi = np.full_like(theta, 1e-3), np.full_like(theta, 1e6)
    for _ in range(100):
        mid = np.sqrt(lo * hi)
        over = pathloss_db(mid * np.cos(rad), mid * np.sin(rad), p) > gamma
        hi = np.where(over, mid, hi)
        lo = np.where(over, lo, mid)
    r = lo * np.cos(rad)
    i = int(np.argmax(r))
    return theta[i], r[i]


def test_optimal_elevation_matches_sweep():
    p = ChannelParams(gamma_db=92.5)
    theta_sweep, r_sweep = _sweep_best_elevation(p, p.gamma_db)
    theta = optimal_elevation(p)
    assert theta == pytest.approx(42.44, abs=0.01)
    assert abs(theta - theta_sweep) <= 0.01
    r, h = max_coverage_radius(p)
    assert r == pytest.approx(r_sweep, rel=1e-6)
    assert math.degrees(math.atan2(h, r)) == pytest.approx(theta, abs=1e-9)


def test_max_radius_hits_threshold():
    for gamma in (80.0, 92.5, 110.0):
        p = ChannelParams(gamma_db=gamma)
        r, h = max_coverage_radius(p)
        assert abs(pathloss_db(r, h, p) - gamma) < 1e-6


def test_gamma_plus_6db_doubles_radius():
    r1, _ = max_coverage_radius(ChannelParams(gamma_db=92.5))
    r2, _ = max_coverage_radius(ChannelParams(gamma_db=92.5 + 20 * math.log10(2)))
    assert r2 / r1 == pytest.approx(2.0, rel=1e-9)
    assert optimal_elevation(ChannelParams(gamma_db=92.5)) == optimal_elevation(ChannelParams(gamma_db=120))


def test_infeasible_threshold():
    one_metre = fspl_db(1.0, 2e9)
    with pytest.raises(ConfigError):
        ChannelParams(gamma_db=one_metre - 1.0)
    with pytest.raises(InfeasibleError):
        max_coverage_radius(ChannelParams(gamma_db=one_metre + 0.5))


def test_params_validation():
    with pytest.raises(ConfigError):
        ChannelParams(a=-1)
    with pytest.raises(ConfigError):
        ChannelParams(eta_los=5, eta_nlos=1)
    with pytest.raises(ValidationError):
        UavPose(0, 0, 0)


def test_is_covered_cases():
    p = ChannelParams()
    r, h = max_coverage_radius(p)
    pose = UavPose(1000.0, 1000.0, h)
    assert is_covered(pose, (1000.0, 1000.0), p)
    assert is_covered(pose, (1000.0 + r, 1000.0), p)
    assert not is_covered(pose, (1000.0 + r + 1.0, 1000.0), p)


def test_is_covered_equals_disk():
    p = ChannelParams()
    r, h = max_coverage_radius(p)
    pose = UavPose(1000.0, 1000.0, h)
    g = np.random.default_rng(3)
    users = g.uniform(0, 2000, (10_000, 2))
    dist = np.hypot(users[:, 0] - 1000, users[:, 1] - 1000)
    np.testing.assert_array_equal(covered_mask(pose, users, p), dist <= r)
    assert all(is_covered(pose, u, p) == (d <= r) for u, d in zip(users[:500], dist[:500]))
