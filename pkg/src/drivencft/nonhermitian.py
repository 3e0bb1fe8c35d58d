"""Combined SU(2) / SL(2,R) drive: phase diagram, pseudo-entropy and the
emergent-SU(2) reducibility test.

Each elementary step is ``U2(lam l) U0(T) U3(T)`` with ``T/l = 1/2 + Delta``
for letter 0 and ``1/2 - Delta`` for letter 1; the antiholomorphic sector
uses the antiholomorphic ``U3``.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import optimize

from .drive import RMD, Protocol, StepSpec, ThueMorse, tm_blocks
from .entropy import EntropyBoundary, EntropySeries, protocol_entropy_series
from .errors import DegenerateInputError, InvalidParameterError
from .mobius import SIGMA_Z, MatrixLike, as_array, build_u0, build_u2, build_u3


class PhaseLabel(enum.Enum):
    HEATING = "heating"
    NONHEATING = "nonheating"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class CombinedParams:
    Delta: float
    lam: float
    Gamma: float = math.pi / 2
    l: float = 1.0
    r: int = 2
    c: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidParameterError("lambda must be non-negative")
        if self.l <= 0 or self.r < 2:
            raise InvalidParameterError("need l > 0 and winding r >= 2")

    @property
    def T0(self) -> float:
        return (0.5 + self.Delta) * self.l

    @property
    def T1(self) -> float:
        return (0.5 - self.Delta) * self.l

    @property
    def L(self) -> float:
        return self.r * self.l


def _step(cp: CombinedParams, T: float, chirality: str) -> np.ndarray:
    return (build_u2(cp.lam * cp.l, cp.l).array @ build_u0(T, cp.l).array
            @ build_u3(T, cp.l, cp.Gamma, chirality).array)


def build_combined_blocks(cp: CombinedParams) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(M0, N0, M0~, N0~)``: holomorphic and antiholomorphic steps."""
    return (_step(cp, cp.T0, "holo"), _step(cp, cp.T1, "holo"),
            _step(cp, cp.T0, "antiholo"), _step(cp, cp.T1, "antiholo"))


def combined_protocol(cp: CombinedParams, law) -> Protocol:
    m0, n0, m0t, n0t = build_combined_blocks(cp)
    return Protocol(StepSpec.from_matrices(m0, m0t, cp.T0 / cp.L),
                    StepSpec.from_matrices(n0, n0t, cp.T1 / cp.L), law)


def phase_boundary_residual(cp: CombinedParams) -> float:
    """``Re tr(M0^2 N0^2) - 2``; negative inside the non-heating phase."""
    m0, n0, _, _ = build_combined_blocks(cp)
    return float(np.trace(m0 @ m0 @ n0 @ n0).real - 2.0)


def tm_lyapunov(m0: MatrixLike, n0: MatrixLike, steps: int = 2 ** 20) -> float:
    """Lyapunov exponent per elementary step of the Thue-Morse drive,
    from the block of order ``ceil(log2 steps)``."""
    n = max(0, math.ceil(math.log2(steps)))
    bp = tm_blocks(m0, n0, n)
    return bp.M.log_norm() / 2 ** n


def phase_classify(cp: CombinedParams, steps: int = 2 ** 20, lyap_threshold: float = 1e-3) -> PhaseLabel:
    lab, _ = _classify(cp, steps, lyap_threshold)
    return lab


def _classify(cp, steps, thr):
    if steps < 1000:
        raise InvalidParameterError("need at least 1000 steps")
    m0, n0, _, _ = build_combined_blocks(cp)
    lyap = tm_lyapunov(m0, n0, steps)
    if lyap > thr:
        return PhaseLabel.HEATING, lyap
    if lyap < thr / 10:
        return PhaseLabel.NONHEATING, lyap
    return PhaseLabel.BOUNDARY, lyap


@dataclass
class PhaseDiagram:
    """Labels, exponents and residuals indexed ``[i_delta, i_lambda]``;
    ``boundary`` lists ``(Delta, lambda)`` zeros of the residual per column."""

    deltas: np.ndarray
    lambdas: np.ndarray
    labels: np.ndarray
    lyapunov: np.ndarray
    residual: np.ndarray
    boundary: list = field(default_factory=list)

    def rows(self):
        for i, d in enumerate(self.deltas):
            for j, lam in enumerate(self.lambdas):
                yield d, lam, self.labels[i, j], self.lyapunov[i, j], self.residual[i, j]


def residual_zeros(delta: float, lambdas: Sequence[float], residual: Sequence[float], Gamma: float = math.pi / 2,
                   xtol: float = 1e-6, ztol: float = 1e-12) -> list[float]:
    """Zeros of the boundary residual along one column of fixed ``delta``:
    grid points where it vanishes plus bisection-refined sign changes."""
    lambdas = np.asarray(lambdas, float)
    res = np.asarray(residual, float)
    out = [float(x) for x, r in zip(lambdas, res) if abs(r) <= ztol]
    f = lambda lam: phase_boundary_residual(CombinedParams(delta, lam, Gamma))
    for j in range(len(lambdas) - 1):
        r0, r1 = res[j], res[j + 1]
        if abs(r0) > ztol and abs(r1) > ztol and r0 * r1 < 0:
            out.append(float(optimize.brentq(f, lambdas[j], lambdas[j + 1], xtol=xtol)))
    return sorted(out)


def label_transitions(lambdas: Sequence[float], labels: Sequence[PhaseLabel]) -> list[float]:
    """Midpoints between neighbouring cells whose labels differ, skipping
    ``boundary`` cells."""
    pts = [(lam, lab) for lam, lab in zip(lambdas, labels) if lab is not PhaseLabel.BOUNDARY]
    return [0.5 * (a[0] + b[0]) for a, b in zip(pts, pts[1:]) if a[1] is not b[1]]


def phase_diagram(deltas: Sequence[float], lambdas: Sequence[float], Gamma: float = math.pi / 2,
                  steps: int = 2 ** 20, lyap_threshold: float = 1e-3, threads=None) -> PhaseDiagram:
    deltas = np.asarray(deltas, float)
    lambdas = np.asarray(lambdas, float)
    if deltas.size == 0 or lambdas.size == 0:
        raise InvalidParameterError("empty grid")
    cells = [(d, lam) for d in deltas for lam in lambdas]

    def one(cell):
        cp = CombinedParams(cell[0], cell[1], Gamma)
        lab, ly = _classify(cp, steps, lyap_threshold)
        return lab, ly, phase_boundary_residual(cp)

    n = len(cells) if threads is None else max(1, int(threads))
    n = min(n, os.cpu_count() or 1, len(cells))
    if n <= 1:
        out = [one(c) for c in cells]
    else:
        with ThreadPoolExecutor(n) as ex:
            out = list(ex.map(one, cells))
    shape = (deltas.size, lambdas.size)
    labels = np.array([o[0] for o in out], dtype=object).reshape(shape)
    lyap = np.array([o[1] for o in out]).reshape(shape)
    res = np.array([o[2] for o in out]).reshape(shape)
    boundary = [(float(d), z) for i, d in enumerate(deltas) for z in residual_zeros(d, lambdas, res[i], Gamma)]
    return PhaseDiagram(deltas, lambdas, labels, lyap, res, boundary)


# -- pseudo-entropy runs --------------------------------------------------

def rmd_nonhermitian_run(cp: CombinedParams, eta: int, blocks: int, seed: int, c: Optional[float] = None) -> EntropySeries:
    """Pseudo-entropy after every elementary step of an ``eta``-RMD word of
    the combined steps."""
    c = cp.c if c is None else c
    return protocol_entropy_series(combined_protocol(cp, RMD(eta, blocks, seed)), c, EntropyBoundary.PERIODIC)


def tm_nonhermitian_run(cp: CombinedParams, order: int, c: Optional[float] = None) -> EntropySeries:
    c = cp.c if c is None else c
    return protocol_entropy_series(combined_protocol(cp, ThueMorse(order)), c, EntropyBoundary.PERIODIC)


# -- emergent SU(2) -------------------------------------------------------

@dataclass(frozen=True)
class Reducible:
    """``S`` maps both matrices into SU(2): ``S^-1 M1 S`` and ``S^-1 N1 S``.

    ``identity_residual`` compares ``tr(M1 N1)`` with
    ``2 + 4 sin^2(phi) X Y`` where ``e^{+-i phi}`` are the eigenvalues of
    ``M1``; ``literal_residual`` compares it with ``2 + 4 X Y``.
    """

    P: np.ndarray
    W: np.ndarray
    S: np.ndarray
    M1: np.ndarray
    N1: np.ndarray
    X: float
    Y: float
    identity_residual: float
    literal_residual: float

    reducible = True


@dataclass(frozen=True)
class NotReducible:
    reason: str
    reducible = False


Verdict = Union[Reducible, NotReducible]


def _is_su2(m, tol):
    return abs(m[1, 1] - np.conj(m[0, 0])) <= tol and abs(m[1, 0] + np.conj(m[0, 1])) <= tol


def _trace_ok(t: complex, tol: float, mode: str) -> bool:
    if abs(t.imag) > tol * max(1.0, abs(t)):
        return False
    if mode == "abs":
        return abs(t) <= 2 + tol
    return -2 - tol <= t.real <= 2 + tol


def su2_reducibility_test(M1: MatrixLike, N1: MatrixLike, tol: float = 1e-8, trace_mode: str = "real") -> Verdict:
    """Decide whether ``M1`` and ``N1`` are simultaneously similar to SU(2).

    Conditions: ``M1 = sigma_z N1* sigma_z``; ``M1`` not triangular;
    ``tr M1`` and ``tr M1 N1`` real and at most 2 (``trace_mode="real"``
    bounds the real part to ``[-2, 2]``, ``"abs"`` bounds the modulus).
    On success the eigenvector matrix ``P`` of ``M1`` (unit columns, then
    rescaled to ``det P = 1``) and ``W = diag(1, sqrt(X / Y))`` give the
    similarity ``S = P W^-1``, with ``P = [[a, b], [c, d]]``,
    ``X = b* d + b d*`` and ``Y = a* c + a c*``.

    Raises
    ------
    DegenerateInputError
        ``M1`` is triangular or not diagonalizable.
    """
    M1, N1 = as_array(M1), as_array(N1)
    scale = max(1.0, float(np.abs(M1).max()))
    if np.abs(M1 - SIGMA_Z @ N1.conj() @ SIGMA_Z).max() > tol * scale:
        return NotReducible("conjugation relation M1 = sz N1* sz fails")
    if abs(M1[0, 1]) <= tol * scale or abs(M1[1, 0]) <= tol * scale:
        raise DegenerateInputError("M1 is triangular")
    t1 = complex(np.trace(M1))
    t12 = complex(np.trace(M1 @ N1))
    if not _trace_ok(t1, tol, trace_mode):
        return NotReducible(f"tr(M1) = {t1:.6g} violates the trace bound")
    if not _trace_ok(t12, tol, trace_mode):
        return NotReducible(f"tr(M1 N1) = {t12:.6g} violates the trace bound")
    w, P = np.linalg.eig(M1)
    detP = np.linalg.det(P)
    if abs(w[0] - w[1]) <= 1e-7 or abs(detP) < 1e-10:
        raise DegenerateInputError("M1 is not diagonalizable")
    P = P / np.sqrt(detP)
    a, b, c, d = P.ravel()
    X = float((np.conj(b) * d + b * np.conj(d)).real)
    Y = float((np.conj(a) * c + a * np.conj(c)).real)
    if Y == 0 or X == 0:
        return NotReducible("rebalancing weight undefined (X or Y vanishes)")
    W = np.diag([1.0, np.sqrt(complex(X / Y))])
    S = P @ np.linalg.inv(W)
    Si = np.linalg.inv(S)
    tM, tN = Si @ M1 @ S, Si @ N1 @ S
    if not (_is_su2(tM, tol * 10) and _is_su2(tN, tol * 10)):
        return NotReducible("similarity does not reach SU(2)")
    sin2 = 1.0 - (t1.real / 2) ** 2
    ident = abs(t12 - (2 + 4 * sin2 * X * Y))
    literal = abs(t12 - (2 + 4 * X * Y))
    return Reducible(P, W, S, tM, tN, X, Y, float(ident), float(literal))


def multipolar_dipoles(cp: CombinedParams, order: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Order-``order`` blocks ``(M_n, N_n)`` of the holomorphic sector."""
    m0, n0, _, _ = build_combined_blocks(cp)
    bp = tm_blocks(m0, n0, order)
    return bp.M.matrix(), bp.N.matrix()
