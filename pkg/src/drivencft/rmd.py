"""Random multipolar driving: lifetimes, scaling fits, averaged blocks,
closed orbits and effective Hamiltonians."""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, stats

from . import _kernels
from .drive import RMD, Protocol, StepSpec, mix, rmd_sequence, tm_blocks
from .entropy import EntropyBoundary, EntropySeries, prefactor, protocol_entropy_series
from .errors import ClassError, DomainError, InvalidParameterError, NormalizationError
from .mobius import (DeformationParams, GroupClass, MatrixLike, as_array, build_from_deformation, build_u0,
                     build_u1, classify_group, SIGMA_X, SIGMA_Y, SIGMA_Z)
from .tracemap import first_preimage_params

DEFAULT_MAX_STEPS = 2 ** 34


class Family(enum.Enum):
    FIXED_POINT = "fixed_point"
    PREIMAGE = "preimage"


@dataclass(frozen=True)
class RmdParams:
    """Drive of the uniform step ``U0(T0)`` and the sine-square step ``U1(T1)``.

    ``fixed_point``: ``T0/L = ell1 + K``, ``T1/L = K``.
    ``preimage``: ``T0/L`` given, ``T1/L`` from :func:`first_preimage_params`.
    ``xi`` labels the preimage order (0 for the fixed-point family).
    """

    eta: int
    K: float
    family: Family = Family.FIXED_POINT
    ell1: int = 0
    T0_over_L: float = 2.0 / 3.0
    xi: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.eta < 0:
            raise InvalidParameterError("eta must be non-negative")
        if not self.K > 0:
            raise InvalidParameterError("K must be positive")
        if self.ell1 % 2:
            # odd ell1 differs from ell1 - 1 by a global sign of U0, which drops out
            raise InvalidParameterError("ell1 must be even; odd values reduce to even by a global pi phase")
        if self.xi is None:
            object.__setattr__(self, "xi", 0 if self.family is Family.FIXED_POINT else 1)
        if self.xi < 0:
            raise InvalidParameterError("xi must be non-negative")

    @property
    def durations(self) -> tuple[float, float]:
        """``(T0/L, T1/L)``."""
        if self.family is Family.FIXED_POINT:
            return self.ell1 + self.K, self.K
        return first_preimage_params(self.T0_over_L, self.K)

    def with_(self, **kw) -> "RmdParams":
        d = dict(eta=self.eta, K=self.K, family=self.family, ell1=self.ell1, T0_over_L=self.T0_over_L, xi=self.xi)
        d.update(kw)
        return RmdParams(**d)


def step_matrices(rp: RmdParams) -> tuple[np.ndarray, np.ndarray]:
    t0, t1 = rp.durations
    return build_u0(t0, 1.0).array, build_u1(t1, 1.0).array


def step_protocol(rp: RmdParams, blocks: int, seed: int) -> Protocol:
    m0, n0 = step_matrices(rp)
    t0, t1 = rp.durations
    return Protocol(StepSpec.from_matrices(m0, duration=t0), StepSpec.from_matrices(n0, duration=t1),
                    RMD(rp.eta, blocks, seed))


def _block_arrays(rp: RmdParams):
    m0, n0 = step_matrices(rp)
    bp = tm_blocks(m0, n0, rp.eta)
    return np.stack([bp.M.unit, bp.N.unit]), np.array([bp.M.log_scale, bp.N.log_scale])


def run_seed(seed: int, index: int) -> int:
    """Seed of realization ``index`` in an ensemble started from ``seed``."""
    return mix(seed, index)


# -- lifetimes -----------------------------------------------------------

def lifetime(series: EntropySeries, S_star: float = 10.0) -> Optional[float]:
    """First sample time with ``dS > S_star``; ``None`` if never reached."""
    if len(series) == 0:
        raise InvalidParameterError("empty series")
    hit = np.flatnonzero(series.dS > S_star)
    return None if hit.size == 0 else float(series.step[hit[0]])


def rmd_entropy_series(rp: RmdParams, blocks: int, seed: int, c: float = 1.0,
                       boundary=EntropyBoundary.PERIODIC) -> EntropySeries:
    """Entropy sampled at the end of every block of one realization.

    ``seed`` is the realization's own seed (see :func:`run_seed`).
    """
    series = protocol_entropy_series(step_protocol(rp, blocks, seed), c, boundary)
    w = 2 ** rp.eta
    idx = np.arange(w - 1, len(series), w)
    return EntropySeries(series.step[idx], series.phys_time[idx], series.dS[idx], series.residual[idx],
                         c, boundary)


@dataclass(frozen=True)
class LifetimeStats:
    """Mean lifetime in elementary steps over the reached realizations.

    ``values`` holds per-run lifetimes with ``nan`` for runs that did not
    cross within the step budget; ``censored`` counts them.
    """

    t_star: float
    realizations: int
    dispersion: float
    S_star: float = 10.0
    values: np.ndarray = field(default=None, compare=False, repr=False)
    censored: int = 0

    @property
    def stderr(self) -> float:
        n = self.realizations - self.censored
        return self.dispersion / math.sqrt(n) if n > 0 else math.nan


def _threads(threads):
    if threads in (None, "auto", 0):
        return os.cpu_count() or 1
    return max(1, int(threads))


def lifetimes(rp: RmdParams, realizations: int, seed: int, S_star: float = 10.0, c: float = 1.0,
              boundary=EntropyBoundary.PERIODIC, max_steps: int = DEFAULT_MAX_STEPS,
              threads=None) -> np.ndarray:
    """Per-realization lifetimes (elementary steps, ``nan`` if not reached)."""
    if realizations < 1:
        raise InvalidParameterError("need at least one realization")
    units, scales = _block_arrays(rp)
    w = 2 ** rp.eta
    max_blocks = max(1, max_steps // w)
    thr = S_star / prefactor(c, boundary)

    def one(i):
        s = np.uint64(run_seed(seed, i))
        k = _kernels.rmd_first_crossing(units, scales, units, scales, s, max_blocks, thr)
        return math.nan if k < 0 else float(k * w)

    n_threads = min(_threads(threads), realizations)
    if n_threads == 1:
        return np.array([one(i) for i in range(realizations)])
    with ThreadPoolExecutor(n_threads) as ex:
        return np.array(list(ex.map(one, range(realizations))))


def ensemble_lifetime(rp: RmdParams, realizations: int, seed: int, S_star: float = 10.0, c: float = 1.0,
                      boundary=EntropyBoundary.PERIODIC, max_steps: int = DEFAULT_MAX_STEPS,
                      threads=None) -> LifetimeStats:
    """Arithmetic mean and standard deviation of lifetimes over
    ``realizations`` runs seeded by ``run_seed(seed, i)``."""
    vals = lifetimes(rp, realizations, seed, S_star, c, boundary, max_steps, threads)
    ok = vals[~np.isnan(vals)]
    mean = float(np.mean(ok)) if ok.size else math.nan
    disp = float(np.std(ok, ddof=1)) if ok.size > 1 else 0.0
    return LifetimeStats(mean, realizations, disp, S_star, vals, int(vals.size - ok.size))


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float


def scaling_fit(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least squares of ``log t`` against ``log(1/K)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise InvalidParameterError("need at least three (K, t) points")
    if np.any(~(pts > 0)):
        raise DomainError("scaling fit needs positive K and t")
    res = stats.linregress(np.log(1 / pts[:, 0]), np.log(pts[:, 1]))
    return ScalingFit(float(res.slope), float(res.intercept), float(res.stderr))


# -- averaged blocks -----------------------------------------------------

@dataclass(frozen=True)
class AveragedPair:
    Mbar: np.ndarray
    D: np.ndarray
    MbarNorm: np.ndarray
    theta: float
    det: complex


def averaged_matrices(Meta: MatrixLike, Neta: MatrixLike) -> AveragedPair:
    """``Mbar = (M + N)/2``, ``D = (M - N)/2`` and ``Mbar / sqrt(det Mbar)``."""
    M, N = as_array(Meta), as_array(Neta)
    Mbar, D = (M + N) / 2, (M - N) / 2
    det = complex(np.linalg.det(Mbar))
    if not (det.real > 0 and abs(det.imag) <= 1e-9 * abs(det)):
        raise NormalizationError(f"det(Mbar) = {det} is not positive")
    Mn = Mbar / math.sqrt(det.real)
    theta = math.acos(min(1.0, max(-1.0, np.trace(Mn).real / 2)))
    return AveragedPair(Mbar, D, Mn, theta, det)


def averaged_blocks(rp: RmdParams) -> AveragedPair:
    m0, n0 = step_matrices(rp)
    bp = tm_blocks(m0, n0, rp.eta)
    return averaged_matrices(bp.M.matrix(), bp.N.matrix())


def averaged_det(rp: RmdParams) -> complex:
    """``det((M_eta + N_eta) / 2)`` without normalization; may be negative."""
    m0, n0 = step_matrices(rp)
    bp = tm_blocks(m0, n0, rp.eta)
    return complex(np.linalg.det((bp.M.matrix() + bp.N.matrix()) / 2))


def d_eigen_magnitude(pair: AveragedPair) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(pair.D))))


# -- closed orbit --------------------------------------------------------

def closed_orbit(theta: float, i_max: int) -> np.ndarray:
    """Pairs ``(cos 2i theta, cos 2(i+1) theta)`` for ``i = 0..i_max``."""
    if i_max < 1:
        raise InvalidParameterError("i_max must be >= 1")
    i = np.arange(i_max + 1)
    return np.column_stack([np.cos(2 * i * theta), np.cos(2 * (i + 1) * theta)])


def orbit_distance(pairs: np.ndarray, theta: float, grid: int = 4096) -> np.ndarray:
    """L-infinity distance of each pair to the curve traced by
    :func:`closed_orbit`, ``{(cos phi, cos(phi + 2 theta))}``."""
    pairs = np.atleast_2d(np.asarray(pairs, dtype=float))
    phi = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    cx, cy = np.cos(phi), np.cos(phi + 2 * theta)
    h = 2 * np.pi / grid
    out = np.empty(len(pairs))
    for k, (x, y) in enumerate(pairs):
        if not (np.isfinite(x) and np.isfinite(y)):
            out[k] = np.inf
            continue
        d = np.maximum(np.abs(cx - x), np.abs(cy - y))
        j = int(np.argmin(d))
        f = lambda t: max(abs(math.cos(t) - x), abs(math.cos(t + 2 * theta) - y))
        g = lambda t: (math.cos(t) - x) ** 2 + (math.cos(t + 2 * theta) - y) ** 2
        # candidates matching one coordinate exactly
        ax, ay = math.acos(min(1.0, max(-1.0, x))), math.acos(min(1.0, max(-1.0, y)))
        best = min(d[j], f(ax), f(-ax), f(ay - 2 * theta), f(-ay - 2 * theta))
        for obj in (f, g):
            r = optimize.minimize_scalar(obj, bounds=(phi[j] - h, phi[j] + h), method="bounded",
                                         options={"xatol": 1e-12})
            best = min(best, f(r.x))
        out[k] = best
    return out


def trace_trajectory(rp: RmdParams, blocks: int, seed: int, normalized: bool = False) -> np.ndarray:
    """Consecutive trace pairs ``(x_i, x_{i+1})`` of the running block product,
    ``x_i = tr(Pi_i)`` for ``i = 1..blocks`` (halved when ``normalized``).
    Entries become ``nan`` once the product leaves double range."""
    if blocks < 2:
        raise InvalidParameterError("need at least two blocks")
    units, scales = _block_arrays(rp)
    bits = rmd_sequence(rp.eta, blocks, seed)
    tr = _kernels.chain_traces(units, scales, bits, False).real
    if normalized:
        tr = tr / 2
    return np.column_stack([tr[:-1], tr[1:]])


# -- effective Hamiltonian -----------------------------------------------

def effective_su11_params(V: MatrixLike, duration: float = 1.0, L: float = 1.0) -> tuple[float, float, float, float]:
    """Deformation whose step of length ``duration`` reproduces ``V``.

    Uses the principal logarithm of an elliptic SU(1,1) matrix (or
    ``V - I`` for a parabolic one with trace 2); the
    returned ``(sigma0, sigma_plus, sigma_minus, duration)`` satisfies
    ``build_from_deformation(DeformationParams(s0, s+, s-, L=L), duration) == V``.
    """
    V = as_array(V)
    if classify_group(V) is not GroupClass.SU11:
        raise ClassError("matrix is not SU(1,1)")
    ct = np.trace(V).real / 2
    if abs(ct - 1) <= 1e-12:
        G = V - np.eye(2)  # parabolic: V - I is nilpotent, so log V = V - I
    elif abs(ct) >= 1:
        raise ClassError("matrix is neither elliptic nor parabolic with trace 2")
    else:
        th = math.acos(ct)
        G = th / math.sin(th) * (V - ct * np.eye(2))
    norm = math.pi * duration / L
    s0 = (np.trace(G @ SIGMA_Z) / 2j).real / norm
    sp = (np.trace(G @ SIGMA_Y) / 2).real / norm
    sm = (np.trace(G @ SIGMA_X) / 2).real / norm
    back = build_from_deformation(DeformationParams(s0, sp, sm, L=L), duration).array
    if not np.allclose(back, V, rtol=0, atol=1e-9):
        raise ClassError("logarithm does not reproduce the matrix")
    return float(s0), float(sp), float(sm), float(duration)
