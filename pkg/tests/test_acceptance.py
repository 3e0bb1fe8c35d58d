"""Numbered acceptance criteria, one test each.

Every test prints ``criterion N: PASS|FAIL`` with its measured values and
asserts the verdict; the terminal summary repeats all lines.
"""
import math
import os
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from drivencft import tracemap as tm
from drivencft.cli import main
from drivencft.drive import Protocol, StepSpec, ThueMorse, mix
from drivencft.entropy import (EntropyBoundary, EvolutionState, entanglement_delta, lyapunov_estimate,
                               protocol_entropy_series, su11_entropy, tm_entropy_series)
from drivencft.fermion import LatticeSpec, half_chain_entropy, run_protocol_lattice
from drivencft.mobius import (DeformationParams, build_from_deformation, build_u0, build_u1, build_u2,
                              build_u3)
from drivencft.nonhermitian import (CombinedParams, NotReducible, PhaseLabel, Reducible, label_transitions,
                                    multipolar_dipoles, phase_boundary_residual, phase_classify, residual_zeros,
                                    rmd_nonhermitian_run, su2_reducibility_test, tm_nonhermitian_run)
from drivencft.rmd import RmdParams, averaged_blocks, averaged_det, ensemble_lifetime, orbit_distance, \
    scaling_fit, trace_trajectory
from drivencft.scaled import ScaledProduct

from test_mobius import random_su11

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
MINUTES = 600.0
POINT_A, POINT_B, POINT_C, POINT_D = (4, 1.5), (4, 1.45), (4, 1.4), (5.9, -1.8)
NH_A, NH_B = CombinedParams(0.1, 0.1), CombinedParams(0.5, 0.2)


def best_time(fn, repeat=5):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def point_protocol(pt, law):
    t0, t1 = tm.params_from_trace_point(pt)
    return Protocol(StepSpec.from_deformation(DeformationParams(1, 0, 0), t0),
                    StepSpec.from_deformation(DeformationParams(1, 1, 0), t1), law)


def point_series(pt, n_max, boundary):
    t0, t1 = tm.params_from_trace_point(pt)
    return tm_entropy_series(build_u0(t0, 1), build_u1(t1, 1), n_max=n_max, boundary=boundary,
                             durations=(t0, t1))


def loglog_slope(x, y):
    return np.polyfit(np.log(x), np.log(y), 1)[0]


def verdict(criterion, number, checks):
    ok, detail = criterion(number, checks)
    assert ok, detail


def test_criterion_01_fixed_point_orbit(criterion):
    orbit = [(Fraction(4), Fraction(3, 2))]
    for _ in range(4):
        p, q = orbit[-1]
        orbit.append((q * q, p * q - 2 * p + 2))
    exact = orbit[4] == (4, 2) and all(o != (4, 2) for o in orbit[:4])
    pt = tm.k_iterate((4.0, 1.5), 4)
    err = max(abs(pt.p - 4), abs(pt.q - 2))
    runtime, res = best_time(lambda: tm.escape_time(POINT_A, maxiter=64))
    verdict(criterion, 1, [
        ("rational orbit hits (4,2) at step 4 exactly", exact),
        (f"double error {err:.1e} < 1e-12", err < 1e-12),
        ("escape_time(4,1.5) never at maxiter 64", res.never),
        (f"runtime {runtime * 1e3:.3f} ms < 1 ms", runtime < 1e-3),
    ])


def test_criterion_02_region_invariance(criterion):
    rng = np.random.default_rng(2)
    n = 100_000
    boxes = {1: ((0, 4), (-2, 2)), 2: ((0, 100), (2, 12)), 3: ((0, 100), (-12, 12))}
    t = time.perf_counter()
    checks = []
    for code, ((p0, p1), (q0, q1)) in boxes.items():
        p, q = np.empty(0), np.empty(0)
        while p.size < n:
            pp, qq = rng.uniform(p0, p1, 4 * n), rng.uniform(q0, q1, 4 * n)
            keep = tm.region_grid(pp, qq) == code
            p, q = np.concatenate([p, pp[keep]]), np.concatenate([q, qq[keep]])
        p, q = p[:n], q[:n]
        P, Q = tm.k_map_grid(p, q)
        bad = int(np.count_nonzero(tm.region_grid(P, Q) != code))
        checks.append((f"region {tm.REGION_CODES[code].value}: {bad} violations of {n}", bad == 0))
    runtime = time.perf_counter() - t
    checks.append((f"runtime {runtime:.2f} s < 1 s", runtime < 1))
    verdict(criterion, 2, checks)


def test_criterion_03_closed_forms(criterion):
    t = time.perf_counter()
    durations = np.linspace(0.01, 2.0, 20)

    def worst(dp, ref, chirality="holo"):
        return max(np.abs(build_from_deformation(dp, T, chirality).array - ref(T).array).max() for T in durations)

    e0 = worst(DeformationParams(1, 0, 0), lambda T: build_u0(T, 1.0))
    e1 = worst(DeformationParams(1, 1, 0), lambda T: build_u1(T, 1.0))
    e2 = worst(DeformationParams(0, 0, 1), lambda T: build_u2(T, 1.0))
    e2_rot = worst(DeformationParams(0, -1, 0), lambda T: build_u2(T, 1.0))
    e3 = max(worst(DeformationParams.su2(G), lambda T, G=G: build_u3(T, 1.0, G, ch), ch)
             for G in (0.3, math.pi / 2, 2.0) for ch in ("holo", "antiholo"))
    runtime = time.perf_counter() - t
    verdict(criterion, 3, [
        (f"U0 via (1,0,0): {e0:.1e}", e0 < 1e-10),
        (f"U1 via (1,1,0): {e1:.1e}", e1 < 1e-10),
        (f"U2 via (0,0,1): {e2:.1e} (via (0,-1,0): {e2_rot:.1e})", e2 < 1e-10),
        (f"U3 via (cos G, i sin G, 0): {e3:.1e}", e3 < 1e-10),
        (f"runtime {runtime:.2f} s < 1 s", runtime < 1),
    ])


def test_criterion_04_entropy_forms(criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        m = random_su11(rng)
        st = EvolutionState(ScaledProduct.from_matrix(m), ScaledProduct.from_matrix(m))
        worst = max(worst, abs(entanglement_delta(st)[0] - su11_entropy(m[0, 0], m[0, 1])))
    s = point_series(POINT_D, 40, EntropyBoundary.PERIODIC)
    lam = lyapunov_estimate(point_protocol(POINT_D, ThueMorse(0)), 2 ** 40)
    slope = np.polyfit(2.0 ** s.step[-10:], s.dS[-10:], 1)[0]
    rel = abs(slope / (2 / 3 * lam) - 1)
    verdict(criterion, 4, [
        (f"general vs SU(1,1) form max diff {worst:.1e}", worst < 1e-10),
        (f"D slope {slope:.5f} vs (2c/3) lambda {2 / 3 * lam:.5f} (rel {rel:.3f})", rel < 0.05),
    ])


def test_criterion_05_heating_order(criterion):
    t = time.perf_counter()
    nA, nB, nC = (tm.escape_time(pt).n_star for pt in (POINT_A, POINT_B, POINT_C))
    sA = point_series(POINT_A, 30, EntropyBoundary.OPEN_HALF_CHAIN)
    peak = float(np.abs(sA.dS).max())
    runtime = time.perf_counter() - t
    verdict(criterion, 5, [
        (f"n*(C)={nC} < n*(B)={nB} < n*(A)={'never' if nA is None else nA}",
         nA is None and nB is not None and nC is not None and nC < nB),
        (f"max |dS(A)| for n <= 30 is {peak:.3f} <= 1", peak <= 1),
        (f"runtime {runtime:.2f} s < 1 s", runtime < 1),
    ])


def _lifetime_slopes(family, etas, Ks, realizations, seed, **kw):
    slopes = {}
    cell = 0
    for eta in etas:
        pts = []
        for K in Ks:
            st = ensemble_lifetime(RmdParams(eta, K, family, **kw), realizations, mix(seed, cell))
            pts.append((K, st.t_star))
            cell += 1
        slopes[eta] = scaling_fit(pts).slope
    return slopes


@pytest.mark.slow
def test_criterion_06_fixed_point_scaling(criterion):
    t = time.perf_counter()
    slopes = _lifetime_slopes("fixed_point", (0, 1, 2), (0.1, 0.07, 0.05, 0.03), 50, 20240601)
    runtime = time.perf_counter() - t
    checks = [(f"eta={eta}: slope {s:.2f} vs {2 * eta + 2}", abs(s - (2 * eta + 2)) <= 0.5)
              for eta, s in slopes.items()]
    checks.append((f"runtime {runtime:.0f} s", runtime <= MINUTES))
    verdict(criterion, 6, checks)


@pytest.mark.slow
def test_criterion_07_preimage_scaling(criterion):
    t = time.perf_counter()
    slopes = _lifetime_slopes("preimage", (0, 1, 2, 3), (0.1, 0.07, 0.05, 0.03, 0.02, 0.01), 200, 20240602,
                              T0_over_L=2 / 3, xi=1)
    runtime = time.perf_counter() - t
    checks = [(f"eta={eta}: slope {slopes[eta]:.2f} vs 0", abs(slopes[eta]) <= 0.3) for eta in (0, 1)]
    checks += [(f"eta={eta}: slope {slopes[eta]:.2f} vs {2 * (eta - 1)}", abs(slopes[eta] - 2 * (eta - 1)) <= 0.4)
               for eta in (2, 3)]
    checks.append((f"runtime {runtime:.0f} s", runtime <= MINUTES))
    verdict(criterion, 7, checks)


def test_criterion_08_determinant_expansion(criterion):
    t = time.perf_counter()
    Ks = np.array([0.1, 0.07, 0.05, 0.03])
    checks = []
    for eta in (0, 1, 2):
        s = loglog_slope(Ks, [averaged_det(RmdParams(eta, K)).real - 1 for K in Ks])
        checks.append((f"fixed point eta={eta}: slope {s:.2f} vs {2 * eta + 2}", abs(s - (2 * eta + 2)) <= 0.3))
    Kp = np.array([0.1, 0.07, 0.05, 0.03, 0.02, 0.01])
    for eta in (0, 1):
        dev = np.abs([averaged_det(RmdParams(eta, K, "preimage")).real - 1 for K in Kp])
        s = loglog_slope(Kp, dev)
        checks.append((f"preimage eta={eta}: det-1 slope {s:.3f} (constant)", abs(s) < 0.1))
    runtime = time.perf_counter() - t
    checks.append((f"runtime {runtime:.2f} s < 10 s", runtime < 10))
    verdict(criterion, 8, checks)


def test_criterion_09_closed_orbit(criterion):
    out = {}
    for eta in (3, 0):
        rp = RmdParams(eta, 0.04)
        theta = averaged_blocks(rp).theta
        d = orbit_distance(trace_trajectory(rp, 1000, seed=1, normalized=True), theta / 2)
        out[eta] = d
    first_bad = int(np.argmax(out[0] > 0.05)) if (out[0] > 0.05).any() else None
    verdict(criterion, 9, [
        (f"eta=3 max distance {out[3].max():.4f} < 0.05 over 1000 blocks", out[3].max() < 0.05),
        (f"eta=0 leaves the orbit at block {first_bad}", first_bad is not None),
    ])


def test_criterion_10_phase_diagram(criterion):
    lambdas = np.round(np.arange(0, 0.5 + 1e-9, 0.005), 10)
    res = [phase_boundary_residual(CombinedParams(0.5, lam)) for lam in lambdas]
    labels = [phase_classify(CombinedParams(0.5, lam)) for lam in lambdas]
    zeros = residual_zeros(0.5, lambdas, res)
    found = label_transitions(lambdas, labels)
    gap = min((abs(f - z) for f in found for z in zeros), default=math.inf)
    sB = tm_nonhermitian_run(NH_B, 12)
    imag = float(np.abs(sB.residual).max())
    verdict(criterion, 10, [
        (f"detected {[round(float(x), 4) for x in found]} vs analytic {[round(float(x), 4) for x in zeros]} "
         f"(gap {gap:.4f})",
         gap <= 0.005),
        ("A non-heating", phase_classify(NH_A) is PhaseLabel.NONHEATING),
        ("B heating", phase_classify(NH_B) is PhaseLabel.HEATING),
        (f"B imaginary residual {imag:.1e} < 1e-9", imag < 1e-9),
    ])


def test_criterion_11_rmd_robustness(criterion):
    checks = []
    hot = rmd_nonhermitian_run(NH_A, 0, 10_000, seed=1)
    checks.append((f"A eta=0 heats: max dS {hot.dS.max():.1f}", hot.dS.max() > 10))
    for eta in (1, 2):
        s = rmd_nonhermitian_run(NH_A, eta, 10_000 >> eta, seed=1)
        peak = float(np.abs(s.dS[s.step <= 10_000]).max())
        checks.append((f"A eta={eta}: max |dS| {peak:.2f} < 2 over 1e4 steps", peak < 2))
    slopes = []
    for eta in (0, 1, 2):
        s = rmd_nonhermitian_run(NH_B, eta, 20_000 >> eta, seed=1)
        h = len(s) // 2
        slopes.append(np.polyfit(s.step[h:], s.dS[h:], 1)[0])
    spread = (max(slopes) - min(slopes)) / np.mean(slopes)
    checks.append((f"B slopes {', '.join(f'{x:.4f}' for x in slopes)} (spread {spread:.3f})", spread <= 0.1))
    checks.append(("A reducible", isinstance(su2_reducibility_test(*multipolar_dipoles(NH_A)), Reducible)))
    checks.append(("B not reducible", isinstance(su2_reducibility_test(*multipolar_dipoles(NH_B)), NotReducible)))
    verdict(criterion, 11, checks)


@pytest.mark.slow
def test_criterion_12_free_fermion(criterion):
    t = time.perf_counter()
    spec = LatticeSpec(L=600)
    pa = point_protocol(POINT_A, ThueMorse(5))
    da = np.abs(run_protocol_lattice(spec, pa).dS - protocol_entropy_series(pa, boundary="open-half-chain").dS)
    pd = point_protocol(POINT_D, ThueMorse(6))
    dd = np.abs(run_protocol_lattice(spec, pd).dS - protocol_entropy_series(pd, boundary="open-half-chain").dS)
    Ls = np.array([100, 200, 400, 800])
    c = 6 * np.polyfit(np.log(Ls), [half_chain_entropy(LatticeSpec(L=int(L))) for L in Ls], 1)[0]
    runtime = time.perf_counter() - t
    verdict(criterion, 12, [
        (f"A: max |lattice - CFT| {da.max():.3f} < 0.1 over {len(da)} steps", da.max() < 0.1),
        (f"D: early (8 steps) {dd[:8].max():.3f} < 0.1", dd[:8].max() < 0.1),
        (f"D: late (last 8 of {len(dd)}) {dd[-8:].max():.3f} > 0.1", dd[-8:].max() > 0.1),
        (f"ground-state c = {c:.3f}", abs(c - 1) <= 0.05),
        (f"runtime {runtime:.0f} s", runtime <= MINUTES),
    ])


@pytest.mark.slow
def test_criterion_13_reproducibility(criterion, tmp_path):
    checks = []
    for cfg in sorted(CONFIGS.glob("*.cfg")):
        outs = []
        for tag, threads in (("a", "1"), ("b", str(max(2, os.cpu_count() or 2))), ("c", "1")):
            d = tmp_path / f"{cfg.stem}_{tag}"
            d.mkdir()
            code = main(["--config", str(cfg), "--out", str(d / "out.csv"), "--threads", threads])
            files = {p.name: p.read_bytes() for p in sorted(d.iterdir()) if not p.name.endswith(".manifest.json")}
            outs.append((code, files))
        same = all(o == outs[0] for o in outs[1:]) and outs[0][0] == 0
        checks.append((cfg.stem, same))
    verdict(criterion, 13, checks)
