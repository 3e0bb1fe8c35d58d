"""Free-fermion lattice check of the continuum entropy formulas.

Run: python3 demos/05_free_fermion.py  (about ten seconds)
"""
import numpy as np

from drivencft import tracemap as tm
from drivencft.drive import Protocol, StepSpec, ThueMorse
from drivencft.entropy import protocol_entropy_series
from drivencft.fermion import LatticeSpec, half_chain_entropy, run_protocol_lattice
from drivencft.mobius import DeformationParams

# Ground-state half-chain entropy grows as (c/6) log L with c = 1.
Ls = np.array([100, 200, 400, 800])
S = [half_chain_entropy(LatticeSpec(L=int(L))) for L in Ls]
print(f"central charge fit: {6 * np.polyfit(np.log(Ls), S, 1)[0]:.3f}")

# Thue-Morse driving on L = 600 sites next to the continuum prediction.
spec = LatticeSpec(L=600)
for name, pt, order in (("A", (4, 1.5), 5), ("D", (5.9, -1.8), 6)):
    t0, t1 = tm.params_from_trace_point(pt)
    p = Protocol(StepSpec.from_deformation(DeformationParams(1, 0, 0), t0),
                 StepSpec.from_deformation(DeformationParams(1, 1, 0), t1), ThueMorse(order))
    lat = run_protocol_lattice(spec, p)
    cft = protocol_entropy_series(p, boundary="open-half-chain")
    diff = np.abs(lat.dS - cft.dS)
    print(f"{name}: {len(diff)} steps, |lattice - CFT| first 8 {diff[:8].max():.3f}, last 8 {diff[-8:].max():.3f}")
