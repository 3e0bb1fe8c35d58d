"""Free-fermion chain with deformed hopping: ground state, driven
evolution and correlation-matrix entanglement entropy.

Hopping amplitude ``1/2`` gives Fermi velocity 1 at half filling, so a CFT
step of duration ``T`` on a system of length ``L_cft`` corresponds to lattice
time ``T * L_sites / L_cft``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg

from .drive import Protocol
from .entropy import EntropyBoundary, EntropySeries
from .errors import InvalidParameterError, NumericError
from .mobius import DeformationParams

EPS = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Open chain of ``L`` sites.

    ``origin`` shifts the deformation envelope,
    ``f(j) = s0 + s+ cos(2 pi r (j - origin)/L) + s- sin(...)``; ``None``
    places it at ``L/2`` so that the envelope minimum of the sine-square
    deformation sits at the chain ends.
    """

    L: int = 600
    filling: float = 0.5
    boundary: str = "open"
    origin: Optional[float] = None

    def __post_init__(self):
        if self.L < 4 or self.L % 2:
            raise InvalidParameterError("L must be an even integer >= 4")
        if self.boundary != "open":
            raise InvalidParameterError("only open chains are supported")
        if not 0 <= self.filling <= 1:
            raise InvalidParameterError("filling must lie in [0, 1]")

    @property
    def n_particles(self) -> int:
        return int(round(self.filling * self.L))

    @property
    def envelope_origin(self) -> float:
        return self.L / 2 if self.origin is None else self.origin


def hopping_matrix(spec: LatticeSpec, dp: Optional[DeformationParams] = None, origin: float = 0.0) -> np.ndarray:
    """Tridiagonal single-particle Hamiltonian with ``h[j-1, j] = f(j)/2`` for
    bonds ``j = 1..L-1`` (``f = 1`` without deformation)."""
    L = spec.L
    j = np.arange(1, L)
    if dp is None:
        f = np.ones(L - 1)
    else:
        s = dp.coefficients
        if np.any(np.abs(s.imag) > 0):
            raise InvalidParameterError("lattice deformation must be real")
        x = 2 * np.pi * dp.r * (j - origin) / L
        f = s[0].real + s[1].real * np.cos(x) + s[2].real * np.sin(x)
    h = np.zeros((L, L))
    h[j - 1, j] = f / 2
    h[j, j - 1] = f / 2
    return h


def ground_state_orbitals(h: np.ndarray, filling: float = 0.5) -> np.ndarray:
    """Lowest ``filling * L`` eigenvectors of ``h`` as columns."""
    h = np.asarray(h)
    if not np.allclose(h, h.conj().T):
        raise InvalidParameterError("hopping matrix must be Hermitian")
    try:
        _, v = linalg.eigh(h)
    except linalg.LinAlgError as exc:
        raise NumericError(str(exc)) from exc
    n = int(round(filling * h.shape[0]))
    return v[:, :n].astype(complex)


def correlation_from_orbitals(phi: np.ndarray, sites=None) -> np.ndarray:
    """``C_mn = <c_m^dag c_n> = sum_k conj(phi_mk) phi_nk``."""
    if sites is not None:
        phi = phi[np.asarray(_indices(sites, phi.shape[0]))]
    return phi.conj() @ phi.T


def ground_state_correlation(h: np.ndarray, filling: float = 0.5) -> np.ndarray:
    return correlation_from_orbitals(ground_state_orbitals(h, filling))


def propagator(h: np.ndarray, T: float) -> np.ndarray:
    """``exp(-i h T)`` for a Hermitian ``h``."""
    w, v = linalg.eigh(h)
    ph = np.exp(-1j * w * T)
    if not np.all(np.isfinite(ph)):
        raise NumericError("non-finite propagator")
    return (v * ph) @ v.conj().T


def evolve_correlation(C: np.ndarray, h: np.ndarray, T: float) -> np.ndarray:
    """``C -> conj(u) C u^T`` with ``u = exp(-i h T)`` (orbitals evolve as
    ``phi -> u phi``)."""
    u = propagator(h, T)
    return u.conj() @ C @ u.T


def _indices(sites, L):
    if isinstance(sites, slice):
        return np.arange(L)[sites]
    return np.asarray(list(sites) if isinstance(sites, range) else sites, dtype=int)


def subsystem_entropy(C: np.ndarray, sites: Union[Sequence[int], range, slice]) -> float:
    """Von Neumann entropy of the sites (0-based indices) from the
    eigenvalues of the restricted correlation block."""
    idx = _indices(sites, C.shape[0])
    if idx.size == 0:
        return 0.0
    nu = np.clip(linalg.eigvalsh(C[np.ix_(idx, idx)]), EPS, 1 - EPS)
    return float(-np.sum(nu * np.log(nu) + (1 - nu) * np.log(1 - nu)))


def half_chain_entropy(spec: LatticeSpec, h: Optional[np.ndarray] = None) -> float:
    if h is None:
        h = hopping_matrix(spec)
    phi = ground_state_orbitals(h, spec.filling)
    return subsystem_entropy(correlation_from_orbitals(phi, range(spec.L // 2)), range(spec.L // 2))


def run_protocol_lattice(spec: LatticeSpec, protocol: Protocol, subsystem=None,
                         letters: Optional[np.ndarray] = None) -> EntropySeries:
    """Entropy change of ``subsystem`` (default left half) after every step.

    The initial state is the ground state of the uniform chain. Each step
    needs its ``deformation``; its lattice duration is ``T / dp.L * spec.L``.
    """
    steps = (protocol.step0, protocol.step1)
    if any(s.deformation is None for s in steps):
        raise InvalidParameterError("lattice runs need steps built from deformations")
    sub = _indices(range(spec.L // 2) if subsystem is None else subsystem, spec.L)
    org = spec.envelope_origin
    us = [propagator(hopping_matrix(spec, s.deformation, org), s.duration / s.deformation.L * spec.L)
          for s in steps]
    if letters is None:
        letters = protocol.letters()
    phi = ground_state_orbitals(hopping_matrix(spec), spec.filling)
    s0 = subsystem_entropy(correlation_from_orbitals(phi, sub), range(sub.size))
    out = np.empty(len(letters))
    for k, s in enumerate(letters):
        phi = us[s] @ phi
        out[k] = subsystem_entropy(correlation_from_orbitals(phi, sub), range(sub.size)) - s0
    t = np.cumsum(protocol.step_times()[np.asarray(letters, dtype=np.intp)])
    return EntropySeries(np.arange(1, len(letters) + 1), t, out, np.zeros_like(out), 1.0,
                         EntropyBoundary.OPEN_HALF_CHAIN, source="lattice")
