"""Entanglement and pseudo-entropy of driven CFT states from 2x2 products.

For a product ``Pi = [[a, b], [c, d]]`` the two-sector entropy change is

    dS = k * log(f(Pi) f(Pi')) ,   f = a c - a d - c b + b d ,

with ``k = c (1 + m) / (12 m)`` (``c / 6`` for von Neumann) on a periodic
system and half of that for a half chain with open ends. Products are held
as :class:`ScaledProduct` so ``f`` is evaluated on the unit matrix and the
scale enters as ``2 * log_scale`` per sector.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .drive import BlockPair, Ordering, Protocol, ThueMorse, tm_blocks
from .errors import InvalidParameterError, SingularConfigurationError
from .mobius import MatrixLike
from .scaled import ScaledProduct

__all__ = [
    "ScaledProduct", "EvolutionState", "EntropySeries", "EntropyBoundary", "evolve_product",
    "entanglement_delta", "pseudo_entropy_delta", "lyapunov_estimate", "tm_entropy_series",
    "protocol_entropy_series", "entropy_factor", "prefactor",
]


class EntropyBoundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN_HALF_CHAIN = "open-half-chain"


@dataclass(frozen=True)
class EvolutionState:
    chiral: ScaledProduct = field(default_factory=ScaledProduct.identity)
    antichiral: ScaledProduct = field(default_factory=ScaledProduct.identity)
    steps: int = 0
    phys_time: float = 0.0

    @classmethod
    def initial(cls) -> "EvolutionState":
        return cls()


def evolve_product(state: EvolutionState, step_holo: MatrixLike, step_anti: Optional[MatrixLike] = None,
                   ordering=Ordering.FORWARD, duration: float = 0.0) -> EvolutionState:
    """Append one step to both sector products.

    With the default ordering the new step multiplies from the right,
    ``Pi_j = G_1 G_2 ... G_j``.
    """
    h = ScaledProduct.from_matrix(step_holo)
    a = h if step_anti is None else ScaledProduct.from_matrix(step_anti)
    if Ordering(ordering) is Ordering.FORWARD:
        ch, an = state.chiral @ h, state.antichiral @ a
    else:
        ch, an = h @ state.chiral, a @ state.antichiral
    return EvolutionState(ch, an, state.steps + 1, state.phys_time + duration)


def entropy_factor(m: np.ndarray) -> complex:
    """``a c - a d - c b + b d`` of a 2x2 matrix, evaluated as ``(a - b)(c - d)``."""
    (a, b), (c, d) = np.asarray(m)
    return complex((a - b) * (c - d))


def prefactor(c: float = 1.0, boundary=EntropyBoundary.PERIODIC, m: float = 1.0) -> float:
    if m < 1:
        raise InvalidParameterError("Renyi index must be >= 1")
    k = c * (1 + m) / (12 * m)
    if EntropyBoundary(boundary) is EntropyBoundary.OPEN_HALF_CHAIN:
        k /= 2
    return k


def _log_argument(state: EvolutionState) -> complex:
    ff = entropy_factor(state.chiral.unit) * entropy_factor(state.antichiral.unit)
    if ff == 0:
        raise SingularConfigurationError("entropy factor vanishes")
    return complex(np.log(ff)) + 2 * (state.chiral.log_scale + state.antichiral.log_scale)


def entanglement_delta(state: EvolutionState, c: float = 1.0, boundary=EntropyBoundary.PERIODIC,
                       m: float = 1.0) -> tuple[float, float]:
    """Entropy change and the imaginary residual of the log argument.

    Returns
    -------
    dS : float
    residual : float
        ``k * arg(f f')``; zero for unitary evolution.
    """
    z = prefactor(c, boundary, m) * _log_argument(state)
    return z.real, z.imag


def pseudo_entropy_delta(state: EvolutionState, c: float = 1.0, boundary=EntropyBoundary.PERIODIC) -> complex:
    """Pseudo-entropy change as ``dS + 1j * residual`` (von Neumann limit)."""
    return prefactor(c, boundary, 1.0) * _log_argument(state)


# -- series ---------------------------------------------------------------

@dataclass
class EntropySeries:
    """Entropy samples: ``step`` (elementary steps or stroboscopic index),
    ``phys_time`` (accumulated duration over system length), real part and
    imaginary residual."""

    step: np.ndarray
    phys_time: np.ndarray
    dS: np.ndarray
    residual: np.ndarray
    c: float = 1.0
    boundary: EntropyBoundary = EntropyBoundary.PERIODIC
    m: float = 1.0
    source: str = "cft"

    def __post_init__(self):
        self.step = np.asarray(self.step)
        self.phys_time = np.asarray(self.phys_time, dtype=float)
        self.dS = np.asarray(self.dS, dtype=float)
        self.residual = np.asarray(self.residual, dtype=float)
        self.boundary = EntropyBoundary(self.boundary)
        n = len(self.step)
        if not (len(self.phys_time) == len(self.dS) == len(self.residual) == n):
            raise InvalidParameterError("series columns differ in length")
        if n > 1 and np.any(np.diff(self.step) <= 0):
            raise InvalidParameterError("sample times must increase strictly")

    def __len__(self):
        return len(self.step)

    @property
    def samples(self):
        return list(zip(self.step.tolist(), self.dS.tolist(), self.residual.tolist()))

    def rows(self, with_source: bool = False):
        for i in range(len(self)):
            row = [int(self.step[i]), f"{self.phys_time[i]:.16e}", f"{self.dS[i]:.16e}", f"{self.residual[i]:.16e}"]
            if with_source:
                row.append(self.source)
            yield row

    def to_csv(self, path, with_source: bool = False) -> None:
        header = ["n_or_step", "phys_time", "dS_real", "dS_imag_residual"] + (["source"] if with_source else [])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(self.rows(with_source))


def protocol_entropy_series(protocol: Protocol, c: float = 1.0, boundary=EntropyBoundary.PERIODIC,
                            m: float = 1.0, letters: Optional[np.ndarray] = None) -> EntropySeries:
    """Entropy after every elementary step of ``protocol``."""
    if letters is None:
        letters = protocol.letters()
    letters = np.ascontiguousarray(letters, dtype=np.uint8)
    hu, hs = protocol.sector_arrays("holo")
    au, as_ = protocol.sector_arrays("anti")
    logs = _kernels.chain_entropy(hu, hs, au, as_, letters, protocol.ordering is Ordering.REVERSED)
    if np.any(np.isinf(logs.real)):
        raise SingularConfigurationError("entropy factor vanished along the protocol")
    z = prefactor(c, boundary, m) * logs
    t = np.cumsum(protocol.step_times()[letters])
    return EntropySeries(np.arange(1, len(letters) + 1), t, z.real, z.imag, c, boundary, m)


def lyapunov_estimate(protocol: Protocol, steps: int) -> float:
    """``log ||Pi_j||_F / j`` after ``j = steps`` elementary steps.

    A Thue-Morse protocol with ``steps`` a power of two uses block doubling,
    so ``steps`` may be far beyond what could be materialized.
    """
    if steps < 1:
        raise InvalidParameterError("steps must be positive")
    if isinstance(protocol.law, ThueMorse) and steps & (steps - 1) == 0:
        n = steps.bit_length() - 1
        bp = tm_blocks(protocol.step0.holo, protocol.step1.holo, n)
        prod = bp.M
    else:
        letters = np.ascontiguousarray(protocol.letters()[:steps])
        if len(letters) < steps:
            raise InvalidParameterError(f"protocol provides only {len(letters)} steps")
        units, scales = protocol.sector_arrays("holo")
        u, ls = _kernels.chain_product(units, scales, letters, protocol.ordering is Ordering.REVERSED)
        prod = ScaledProduct(u, ls)
    return prod.log_norm() / steps


def _blocks_delta(bh: BlockPair, ba: BlockPair, which: str, k: float) -> complex:
    h, a = getattr(bh, which), getattr(ba, which)
    ff = entropy_factor(h.unit) * entropy_factor(a.unit)
    if ff == 0:
        raise SingularConfigurationError("entropy factor vanishes")
    return k * (complex(np.log(ff)) + 2 * (h.log_scale + a.log_scale))


def tm_entropy_series(m0: MatrixLike, n0: MatrixLike, m0_anti: Optional[MatrixLike] = None,
                      n0_anti: Optional[MatrixLike] = None, n_max: int = 30, c: float = 1.0,
                      boundary=EntropyBoundary.PERIODIC, m: float = 1.0,
                      durations: tuple[float, float] = (0.0, 0.0)) -> EntropySeries:
    """Entropy at stroboscopic times ``j = 2**n``, ``n = 0..n_max``.

    The state after ``2**n`` Thue-Morse steps is the block ``M_n``, built by
    doubling. ``durations`` are the two step durations over system length
    and only feed the ``phys_time`` column. The ``step`` column holds ``n``.
    """
    if not 0 <= n_max <= 60:
        raise InvalidParameterError("n_max must be in [0, 60]")
    m0_anti = m0 if m0_anti is None else m0_anti
    n0_anti = n0 if n0_anti is None else n0_anti
    k = prefactor(c, boundary, m)
    hM, hN = ScaledProduct.from_matrix(m0), ScaledProduct.from_matrix(n0)
    aM, aN = ScaledProduct.from_matrix(m0_anti), ScaledProduct.from_matrix(n0_anti)
    vals, times = [], []
    for n in range(n_max + 1):
        bh, ba = BlockPair(hM, hN, n), BlockPair(aM, aN, n)
        vals.append(_blocks_delta(bh, ba, "M", k))
        times.append(durations[0] if n == 0 else 2 ** (n - 1) * (durations[0] + durations[1]))
        hM, hN = hM @ hN, hN @ hM
        aM, aN = aM @ aN, aN @ aM
    z = np.array(vals)
    return EntropySeries(np.arange(n_max + 1), times, z.real, z.imag, c, boundary, m)


def su11_entropy(a: complex, b: complex, c: float = 1.0) -> float:
    """``(2c/3) log|a - b|`` for an SU(1,1) product on a periodic system."""
    return 2 * c / 3 * math.log(abs(a - b))
