"""Trace-map geometry: the fixed point, its preimages and escape times.

Run: python3 demos/01_trace_map.py
"""
from fractions import Fraction

import numpy as np

from drivencft import tracemap as tm

# (4, 3/2) lands exactly on the fixed point (4, 2) after four steps.
pt = (Fraction(4), Fraction(3, 2))
for n in range(5):
    print(f"step {n}: p = {pt[0]}, q = {pt[1]}")
    pt = (pt[1] ** 2, pt[0] * pt[1] - 2 * pt[0] + 2)

# Nearby starts leave the box [0, 2500] x [-50, 50] after a few steps;
# the closer to the preimage, the later.
for name, start in [("A", (4, 1.5)), ("B", (4, 1.45)), ("C", (4, 1.4)), ("D", (5.9, -1.8))]:
    r = tm.escape_time(start)
    print(f"{name} {start}: region {tm.region_classify(start).value}, "
          f"escape step {'never' if r.never else r.n_star}")

# Preimage curves of order <= 4 in the window p <= 10.
for order, pts in tm.preimage_layers(4, 10.0, 401):
    print(f"order {order}: {len(pts)} points, q in [{pts[:, 1].min():.2f}, {pts[:, 1].max():.2f}]")
print("A is a preimage of order", tm.is_preimage((4, 1.5), 8))

# Duration pairs reaching a trace point, and the round trip.
t0, t1 = tm.params_from_trace_point((4, 1.5))
back = tm.initial_condition_from_params(t0, t1)
print(f"T0/L = {t0:.6f}, T1/L = {t1:.6f} -> ({back.p:.12f}, {back.q:.12f})")

# A coarse escape-time raster, the data behind a heatmap.
p, q = np.meshgrid(np.linspace(0, 8, 9), np.linspace(-3, 3, 7), indexing="ij")
print(tm.escape_time_grid(p.ravel(), q.ravel()).reshape(p.shape).T)
