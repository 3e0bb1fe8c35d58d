import math

import numpy as np
import pytest

from drivencft import _kernels
from drivencft.drive import Random, rmd_sequence, tm_blocks
from drivencft.errors import DegenerateInputError, InvalidParameterError
from drivencft.mobius import SIGMA_Z, GroupClass, classify_group
from drivencft.nonhermitian import (CombinedParams, NotReducible, PhaseLabel, Reducible, build_combined_blocks,
                                    combined_protocol, label_transitions, multipolar_dipoles, phase_boundary_residual,
                                    phase_classify, phase_diagram, residual_zeros, rmd_nonhermitian_run,
                                    su2_reducibility_test, tm_nonhermitian_run)
from drivencft.tracemap import Region, escape_time, region_classify

A = CombinedParams(0.1, 0.1)
B = CombinedParams(0.5, 0.2)


def random_params(rng, lam_max=1.0):
    return CombinedParams(rng.uniform(-0.5, 0.5), rng.uniform(0, lam_max), rng.uniform(0.1, math.pi - 0.1))


class TestBlocks:
    def test_lambda_zero_is_su2(self):
        m0, n0, m0t, n0t = build_combined_blocks(CombinedParams(0.23, 0.0))
        for m in (m0, n0, m0t, n0t):
            assert classify_group(m) is GroupClass.SU2

    def test_delta_zero(self):
        m0, n0, _, _ = build_combined_blocks(CombinedParams(0.0, 0.3))
        np.testing.assert_array_equal(m0, n0)

    def test_unimodular(self):
        rng = np.random.default_rng(30)
        for _ in range(100):
            for m in build_combined_blocks(random_params(rng)):
                assert abs(np.linalg.det(m) - 1) < 1e-10

    def test_conjugation_relation(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            cp = random_params(rng)
            m0, n0, _, _ = build_combined_blocks(cp)
            assert np.abs(m0 - SIGMA_Z @ n0.conj() @ SIGMA_Z).max() < 1e-12
            for order in (1, 2, 3):
                M, N = multipolar_dipoles(cp, order)
                assert np.abs(M - SIGMA_Z @ N.conj() @ SIGMA_Z).max() < 1e-12 * max(1, np.abs(M).max())

    def test_block_traces_real(self):
        # real from the first doubling on; single steps carry complex traces
        rng = np.random.default_rng(32)
        for _ in range(100):
            M1, N1 = multipolar_dipoles(random_params(rng, 0.5))
            for order in range(1, 6):
                t = tm_blocks(M1, N1, order - 1).M.trace()
                assert abs(t.imag) < 1e-10 * max(1, abs(t))

    def test_dipole_words_real(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            M1, N1 = multipolar_dipoles(random_params(rng, 0.5))
            P = np.eye(2, dtype=complex)
            for s in Random(30, int(rng.integers(1 << 30))).letters():
                P = P @ (N1 if s else M1)
            t = np.trace(P)
            assert abs(t.imag) < 1e-10 * max(1, abs(t))

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            CombinedParams(0.1, -0.1)
        with pytest.raises(InvalidParameterError):
            CombinedParams(0.1, 0.1, r=1)


class TestPhase:
    def test_residual_signs(self):
        for d in np.linspace(-0.5, 0.5, 11):
            assert phase_boundary_residual(CombinedParams(d, 0.0)) <= 1e-12
        assert phase_boundary_residual(A) < 0
        assert phase_boundary_residual(B) > 0

    def test_classify(self):
        assert phase_classify(A) is PhaseLabel.NONHEATING
        assert phase_classify(B) is PhaseLabel.HEATING
        assert phase_classify(CombinedParams(0.2, 2.0)) is PhaseLabel.HEATING
        with pytest.raises(InvalidParameterError):
            phase_classify(A, steps=10)

    def test_small_diagram(self):
        deltas = [-0.3, 0.1, 0.3]
        lambdas = np.linspace(0, 0.4, 9)
        pd = phase_diagram(deltas, lambdas, steps=2 ** 14, threads=1)
        assert all(lab is PhaseLabel.NONHEATING for lab in pd.labels[:, 0])
        assert pd.labels.shape == (3, 9)
        assert len(list(pd.rows())) == 27
        for d, z in pd.boundary:
            assert abs(phase_boundary_residual(CombinedParams(d, z))) < 1e-5
        pd2 = phase_diagram(deltas, lambdas, steps=2 ** 14, threads=3)
        np.testing.assert_array_equal(pd.lyapunov, pd2.lyapunov)

    def test_transition_matches_residual(self):
        lambdas = np.linspace(0, 0.3, 61)
        labels = [phase_classify(CombinedParams(0.3, lam), 2 ** 16) for lam in lambdas]
        res = [phase_boundary_residual(CombinedParams(0.3, lam)) for lam in lambdas]
        zeros = residual_zeros(0.3, lambdas, res)
        found = label_transitions(lambdas, labels)
        assert len(found) >= 1 and len(zeros) >= 1
        assert min(abs(found[0] - z) for z in zeros) <= lambdas[1] - lambdas[0]

    def test_label_transitions_skip_boundary(self):
        H, N, Bd = PhaseLabel.HEATING, PhaseLabel.NONHEATING, PhaseLabel.BOUNDARY
        assert label_transitions([0, 1, 2, 3], [N, Bd, H, H]) == [1.0]


class TestReducibility:
    def test_point_a(self):
        v = su2_reducibility_test(*multipolar_dipoles(A))
        assert isinstance(v, Reducible)
        for m in (v.M1, v.N1):
            assert abs(m[1, 1] - np.conj(m[0, 0])) < 1e-8 and abs(m[1, 0] + np.conj(m[0, 1])) < 1e-8
            assert abs(np.linalg.det(m) - 1) < 1e-8
        assert abs(np.linalg.det(v.P) - 1) < 1e-12
        assert v.identity_residual < 1e-10

    def test_point_b(self):
        v = su2_reducibility_test(*multipolar_dipoles(B))
        assert isinstance(v, NotReducible) and not v.reducible
        assert "trace" in v.reason

    def test_identity_degenerate(self):
        with pytest.raises(DegenerateInputError):
            su2_reducibility_test(np.eye(2), np.eye(2))

    def test_defective(self):
        # trace 2 and tr(M1 N1) = 2, but a single Jordan block
        x = 0.3
        M1 = np.array([[1 + 1j * x, x], [x, 1 - 1j * x]])
        N1 = SIGMA_Z @ M1.conj() @ SIGMA_Z
        with pytest.raises(DegenerateInputError):
            su2_reducibility_test(M1, N1)

    def test_conjugation_failure(self):
        M1, N1 = multipolar_dipoles(A)
        assert isinstance(su2_reducibility_test(M1, N1 @ N1), NotReducible)

    def test_trace_modes(self):
        M1, N1 = multipolar_dipoles(A)
        assert isinstance(su2_reducibility_test(M1, N1, trace_mode="abs"), Reducible)

    def test_random_instances(self):
        rng = np.random.default_rng(34)
        found = 0
        worst_identity, worst_literal = 0.0, 0.0
        while found < 1000:
            cp = CombinedParams(rng.uniform(-0.5, 0.5), rng.uniform(0, 0.3), rng.uniform(0.2, math.pi - 0.2))
            v = su2_reducibility_test(*multipolar_dipoles(cp))
            if isinstance(v, Reducible):
                found += 1
                worst_identity = max(worst_identity, v.identity_residual)
                worst_literal = max(worst_literal, v.literal_residual)
        assert worst_identity < 1e-10
        # the bare 2 + 4 X Y form misses the sin^2 factor
        assert worst_literal > 1e-3

    def test_products_bounded(self):
        M1, N1 = multipolar_dipoles(A)
        v = su2_reducibility_test(M1, N1)
        kappa = np.linalg.cond(v.S)
        units = np.stack([M1, N1]).astype(complex)
        bits = rmd_sequence(0, 100000, 8)
        u, ls = _kernels.chain_product(units, np.zeros(2), bits, False)
        assert math.exp(ls) * math.sqrt(2) <= math.sqrt(2) * kappa ** 2

    def test_region_one_consistency(self):
        rng = np.random.default_rng(35)
        checked = 0
        while checked < 30:
            M1, N1 = multipolar_dipoles(CombinedParams(rng.uniform(-0.5, 0.5), rng.uniform(0, 0.3)))
            t12 = np.trace(M1 @ N1)
            if t12.real > 2:
                continue
            x1 = np.trace(M1).real
            x2 = t12.real
            pt = (x1 * x1, x2)
            assert region_classify(pt) is Region.I
            assert escape_time(pt, maxiter=1000).never
            checked += 1


class TestRuns:
    def test_residual_small(self):
        for cp in (A, B, CombinedParams(-0.2, 0.37, 1.1)):
            s = tm_nonhermitian_run(cp, 10)
            assert np.abs(s.residual).max() < 1e-9

    def test_point_b_linear_growth(self):
        s = tm_nonhermitian_run(B, 12)
        slope = np.polyfit(s.step[2000:], s.dS[2000:], 1)[0]
        lam = tm_blocks(*build_combined_blocks(B)[:2], 20).M.log_norm() / 2 ** 20
        assert slope == pytest.approx(2 / 3 * lam, rel=0.05)

    def test_point_a_rmd(self):
        hot = rmd_nonhermitian_run(A, 0, 10000, seed=1)
        assert hot.dS.max() > 5
        cold = rmd_nonhermitian_run(A, 1, 5000, seed=1)
        assert np.abs(cold.dS).max() < 2

    def test_protocol_durations(self):
        p = combined_protocol(A, Random(4, 0))
        np.testing.assert_allclose(p.step_times(), [A.T0 / A.L, A.T1 / A.L])
