"""
Coverage disk of a hovering UAV
===============================

How far from the UAV can a ground user be and still get a pathloss under
the threshold? The answer depends on altitude, and there is a single best
elevation angle that makes the disk as large as possible.
"""

import numpy as np

from uavlab.channel import ChannelParams, los_probability, max_coverage_radius, optimal_elevation, pathloss_db

p = ChannelParams()  # urban sigmoid constants, 2 GHz carrier, 92.5 dB threshold
print(p)

# LoS probability climbs steeply with the elevation angle
for theta in (10, 20, 30, 45, 60, 90):
    print(f"theta {theta:2d} deg  P_LoS {los_probability(theta, p):.4f}")

# the radius-maximizing elevation does not depend on the threshold
theta_opt = optimal_elevation(p)
r_max, h_opt = max_coverage_radius(p)
print(f"\nbest elevation {theta_opt:.2f} deg -> r_max {r_max:.1f} m at h {h_opt:.1f} m")

# pathloss along the ground at the best altitude crosses the threshold exactly at r_max
r = np.array([0.0, 100.0, 200.0, r_max, 350.0, 500.0])
for ri, li in zip(r, pathloss_db(r, h_opt, p)):
    print(f"r {ri:7.1f} m  L {li:7.3f} dB  {'covered' if li <= p.gamma_db + 1e-9 else '-'}")

# flying higher or lower than h_opt only shrinks the disk
for h in (0.5 * h_opt, h_opt, 2 * h_opt):
    grid = np.linspace(1, 1000, 20000)
    inside = grid[pathloss_db(grid, h, p) <= p.gamma_db]
    print(f"h {h:6.1f} m  radius {inside.max() if inside.size else 0.0:6.1f} m")
