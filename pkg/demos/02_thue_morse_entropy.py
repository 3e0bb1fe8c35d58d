"""Entanglement growth under Thue-Morse driving of a deformed CFT.

Run: python3 demos/02_thue_morse_entropy.py
"""
import numpy as np

from drivencft import tracemap as tm
from drivencft.drive import Protocol, StepSpec, ThueMorse
from drivencft.entropy import EntropyBoundary, lyapunov_estimate, tm_entropy_series
from drivencft.mobius import build_u0, build_u1


def series(pt, n_max=30, boundary=EntropyBoundary.OPEN_HALF_CHAIN):
    t0, t1 = tm.params_from_trace_point(pt)
    return tm_entropy_series(build_u0(t0, 1), build_u1(t1, 1), n_max=n_max, boundary=boundary,
                             durations=(t0, t1))


# Half-chain entropy at stroboscopic times 2^n. A sits on a preimage of
# the fixed point and stays bounded; B and C heat after a delay.
for name, pt in [("A", (4, 1.5)), ("B", (4, 1.45)), ("C", (4, 1.4))]:
    s = series(pt)
    above = np.nonzero(s.dS > 10)[0]
    print(f"{name}: max dS = {s.dS.max():8.3f}, first n with dS > 10: {above[0] if above.size else 'none'}")

# Deep in the heating phase dS grows linearly in time with slope (2c/3) lambda.
pt = (5.9, -1.8)
t0, t1 = tm.params_from_trace_point(pt)
s = series(pt, 40, EntropyBoundary.PERIODIC)
slope = np.polyfit(2.0 ** s.step[-10:], s.dS[-10:], 1)[0]
proto = Protocol(StepSpec.from_matrices(build_u0(t0, 1)), StepSpec.from_matrices(build_u1(t1, 1)), ThueMorse(0))
lam = lyapunov_estimate(proto, 2 ** 40)
print(f"D: slope {slope:.6f}, (2/3) lambda = {2 / 3 * lam:.6f}")
