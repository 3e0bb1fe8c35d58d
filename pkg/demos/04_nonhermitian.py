"""Combined SU(2) / SL(2,R) drive: phase boundary, pseudo-entropy, emergent SU(2).

Run: python3 demos/04_nonhermitian.py
"""
import numpy as np

from drivencft.nonhermitian import (CombinedParams, label_transitions, multipolar_dipoles, phase_boundary_residual,
                                    phase_classify, residual_zeros, rmd_nonhermitian_run, su2_reducibility_test,
                                    tm_nonhermitian_run)

A, B = CombinedParams(0.1, 0.1), CombinedParams(0.5, 0.2)
for name, cp in (("A", A), ("B", B)):
    print(f"{name}: residual {phase_boundary_residual(cp):+.4f}, phase {phase_classify(cp).value}")

# The sign of tr(M0^2 N0^2) - 2 separates the phases; compare with the
# Lyapunov-based labels along one cut.
lambdas = np.linspace(0, 0.3, 61)
res = [phase_boundary_residual(CombinedParams(0.3, lam)) for lam in lambdas]
labels = [phase_classify(CombinedParams(0.3, lam), 2 ** 16) for lam in lambdas]
print("delta = 0.3: analytic", np.round(residual_zeros(0.3, lambdas, res), 4),
      "numeric", np.round(label_transitions(lambdas, labels), 4))

# Pseudo-entropy is real for these protocols; the residual stays at rounding level.
s = tm_nonhermitian_run(B, 12)
print(f"B under Thue-Morse: dS after {s.step[-1]} steps {s.dS[-1]:.2f}, imag residual {np.abs(s.residual).max():.1e}")

# Random multipolar driving at A: eta = 0 heats, eta >= 1 does not.
for eta in (0, 1, 2):
    r = rmd_nonhermitian_run(A, eta, 10_000 >> eta, seed=1)
    print(f"A, eta={eta}: max |dS| {np.abs(r.dS).max():.2f}")

# The dipoles at A can be conjugated into SU(2) simultaneously; at B they cannot.
print("A:", type(su2_reducibility_test(*multipolar_dipoles(A))).__name__)
print("B:", su2_reducibility_test(*multipolar_dipoles(B)).reason)
