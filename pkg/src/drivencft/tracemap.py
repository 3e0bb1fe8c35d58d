"""The Thue-Morse trace map and its planar form ``K(p, q) = (q^2, pq - 2p + 2)``.

Coordinates are ``p = x_n^2`` and ``q = x_{n+1}`` where ``x_n`` is the trace
of the order-``n`` block. The point ``(4, 2)`` is a fixed point; drives whose
initial point lands on one of its preimages never heat.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, InvalidParameterError, NoRootError

FIXED_POINT = (4.0, 2.0)


class TracePoint(NamedTuple):
    p: float
    q: float
    escaped: bool = False


class Region(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    NONE = "none"


class _Escaped:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ESCAPED"


ESCAPED = _Escaped()


def tm_trace_step(x_prev, x_curr):
    """``x_{n+1} = x_{n-1}^2 (x_n - 2) + 2``; real or complex inputs.

    Returns ``ESCAPED`` on overflow.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            out = x_prev * x_prev * (x_curr - 2) + 2
        except OverflowError:
            return ESCAPED
    return out if np.isfinite(out) else ESCAPED


def k_map(pt) -> TracePoint:
    """One step of ``K``; overflowing results are flagged ``escaped``."""
    p, q = float(pt[0]), float(pt[1])
    with np.errstate(over="ignore", invalid="ignore"):
        p2 = np.float64(q) * q
        q2 = np.float64(p) * q - 2 * p + 2
    if not (np.isfinite(p2) and np.isfinite(q2)):
        return TracePoint(float(p2), float(q2), True)
    return TracePoint(float(p2), float(q2))


def k_iterate(pt, n: int) -> TracePoint:
    pt = TracePoint(float(pt[0]), float(pt[1]))
    for _ in range(n):
        pt = k_map(pt)
        if pt.escaped:
            break
    return pt


def region_classify(pt) -> Region:
    """Invariant region of ``pt``; boundary points go to the lowest-numbered
    matching region."""
    p, q = pt[0], pt[1]
    if p < 0:
        return Region.NONE
    if p - 2 <= q <= 2:
        return Region.I
    if q >= 2:
        return Region.II
    return Region.III


REGION_CODES = (Region.NONE, Region.I, Region.II, Region.III)


def k_map_grid(p, q) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise ``K`` on arrays; overflow yields ``inf``."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return q * q, p * q - 2 * p + 2


def region_grid(p, q) -> np.ndarray:
    """Elementwise ``region_classify`` as indices into ``REGION_CODES``."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    out = np.where(q >= 2, 2, 3)
    out = np.where((p - 2 <= q) & (q <= 2), 1, out)
    return np.where(p < 0, 0, out).astype(np.int8)


@dataclass(frozen=True)
class PreimageSet:
    """Isolated preimage points, plus the ray ``{(p, 2): p >= 0}`` when
    ``ray`` is set."""

    points: tuple = ()
    ray: bool = False

    def __contains__(self, pt):
        if self.ray and pt[1] == 2 and pt[0] >= 0:
            return True
        return any(abs(pt[0] - x.p) < 1e-12 and abs(pt[1] - x.q) < 1e-12 for x in self.points)


def _inverse_branch(P: float, Q: float, sign: int):
    qp = sign * math.sqrt(P)
    if qp == 2:
        return None
    pp = (Q - 2) / (qp - 2)
    return TracePoint(pp, qp) if pp >= 0 else None


def k_inverse(pt) -> PreimageSet:
    """All preimages of ``pt`` under ``K`` with non-negative ``p``."""
    P, Q = float(pt[0]), float(pt[1])
    if P < 0:
        raise DomainError("preimages need p >= 0")
    pts = []
    for sign in ((1,) if P == 0 else (1, -1)):
        x = _inverse_branch(P, Q, sign)
        if x is not None:
            pts.append(x)
    return PreimageSet(tuple(pts), ray=(P == 4.0 and Q == 2.0))


# -- preimage clouds ----------------------------------------------------

def _pullback(p: np.ndarray, q: np.ndarray, sign: int):
    with np.errstate(divide="ignore", invalid="ignore"):
        qp = sign * np.sqrt(p)
        pp = (q - 2) / (qp - 2)
    bad = ~(pp >= 0) | ~np.isfinite(pp)
    pp = np.where(bad, np.nan, pp)
    return pp, np.where(bad, np.nan, qp)


def _chain(t: np.ndarray, signs) -> tuple[np.ndarray, np.ndarray]:
    p, q = np.asarray(t, float), np.full(np.shape(t), 2.0)
    for s in signs:
        p, q = _pullback(p, q, s)
    return p, q


def _sign_chains(k: int):
    for bits in range(2 ** k):
        yield tuple(1 if (bits >> i) & 1 == 0 else -1 for i in range(k))


def _densify(t, signs, p_max, q_max, eps, rounds):
    p, q = _chain(t, signs)
    for _ in range(rounds):
        inside = (p <= p_max) & (np.abs(q) <= q_max)
        gap = np.maximum(np.abs(np.diff(p)), np.abs(np.diff(q)))
        need = inside[:-1] & inside[1:] & (gap > eps)
        if not need.any():
            break
        mid = 0.5 * (t[:-1] + t[1:])[need]
        t = np.sort(np.concatenate([t, mid]))
        p, q = _chain(t, signs)
    return p, q


def preimage_layers(xi: int, p_max: float, samples_per_curve: int = 2001, eps: Optional[float] = None,
                    rounds: int = 8):
    """Yield ``(order, points)`` for orders ``1..xi``; each layer holds the
    points whose shortest route to ``(4, 2)`` uses exactly ``order`` steps
    along the sampled curves.

    Order 1 is the ray ``q = 2`` sampled on ``[0, p_max]`` together with the
    isolated point ``(0, -2)``. Higher orders pull each curve back through
    both branches of ``K^{-1}`` and refine by bisection wherever neighbouring
    samples inside the window separate by more than ``eps``.
    """
    if xi < 1:
        raise InvalidParameterError("order must be >= 1")
    if p_max <= 0 or samples_per_curve < 2:
        raise InvalidParameterError("need p_max > 0 and at least two samples")
    q_max = math.sqrt(p_max) + 2.0
    if eps is None:
        eps = 4.0 * p_max / (samples_per_curve - 1)
    t = np.linspace(0.0, p_max, samples_per_curve)
    iso = np.array([[0.0, -2.0]])
    for order in range(1, xi + 1):
        k = order - 1
        chunks = []
        for signs in _sign_chains(k):
            p, q = _densify(t, signs, p_max, q_max, eps, rounds) if k else _chain(t, signs)
            chunks.append(np.column_stack([p, q]))
        if k:
            nxt = []
            for P, Q in iso:
                nxt.extend((x.p, x.q) for x in k_inverse((P, Q)).points)
            iso = np.array(nxt).reshape(-1, 2)
        chunks.append(iso)
        pts = np.concatenate(chunks)
        ok = np.isfinite(pts).all(axis=1) & (pts[:, 0] <= p_max)
        yield order, pts[ok]


def preimage_cloud(xi: int, p_max: float, samples_per_curve: int = 2001, eps: Optional[float] = None) -> np.ndarray:
    """Sampled set of points mapped onto ``(4, 2)`` within ``xi`` steps, as an
    ``(n, 2)`` array of ``(p, q)``."""
    layers = [pts for _, pts in preimage_layers(xi, p_max, samples_per_curve, eps)]
    return np.concatenate(layers) if layers else np.empty((0, 2))


def is_preimage(pt, xi_max: int, tol: float = 1e-9) -> Optional[int]:
    """Smallest ``xi <= xi_max`` with ``|K^xi(pt) - (4, 2)|_inf < tol``."""
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    cur = TracePoint(float(pt[0]), float(pt[1]))
    for n in range(xi_max + 1):
        if max(abs(cur.p - 4.0), abs(cur.q - 2.0)) < tol:
            return n
        cur = k_map(cur)
        if cur.escaped:
            return None
    return None


def preimage_residual(pt, steps: int) -> float:
    """``|K^steps(pt) - (4, 2)|_inf``; infinite if the orbit overflows."""
    cur = k_iterate(pt, steps)
    if cur.escaped:
        return math.inf
    return max(abs(cur.p - 4.0), abs(cur.q - 2.0))


# -- escape times -------------------------------------------------------

@dataclass(frozen=True)
class EscapeResult:
    """``n_star`` is ``None`` when the orbit stays in the box for
    ``maxiter`` iterations."""

    n_star: Optional[int]
    trajectory: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def never(self) -> bool:
        return self.n_star is None


def _ed_step(e, d):
    # K in the coordinates e = q - 2, d = p - q - 2 (so p = e + 4 + d):
    # e' = p e, d' = -e d. Products keep the signs of e and d exactly, so
    # rounding cannot carry an orbit across a region boundary. p is a square
    # after one step, hence the clamp.
    p = np.maximum(e + 4.0 + d, 0.0)
    return p * e, -e * d


def escape_time(start, q_bound: float = 50.0, p_bound: float = 2500.0, maxiter: int = 64,
                record: bool = False) -> EscapeResult:
    """First ``n`` with ``|q_n| >= q_bound`` or ``|p_n| >= p_bound``.

    The orbit is iterated in region-preserving coordinates (see
    :func:`_ed_step`), so a start in Region I stays bounded for any
    ``maxiter``.
    """
    if q_bound <= 0 or p_bound <= 0:
        raise InvalidParameterError("bounds must be positive")
    p, q = float(start[0]), float(start[1])
    e, d = q - 2.0, p - q - 2.0
    traj = [(p, q)] if record else None
    for n in range(maxiter + 1):
        if not (abs(q) < q_bound and abs(p) < p_bound):
            return EscapeResult(n, np.array(traj) if record else None)
        if n == maxiter:
            break
        e, d = _ed_step(e, d)
        p, q = max(e + 4.0 + d, 0.0), e + 2.0
        if record:
            traj.append((p, q))
    return EscapeResult(None, np.array(traj) if record else None)


def escape_time_grid(p, q, q_bound: float = 50.0, p_bound: float = 2500.0, maxiter: int = 64) -> np.ndarray:
    """Vectorized :func:`escape_time`; ``-1`` marks orbits that never escape."""
    p = np.array(p, dtype=float)
    q = np.array(q, dtype=float)
    out = np.full(np.broadcast(p, q).shape, -1, dtype=np.int64)
    p, q = np.broadcast_arrays(p, q)
    e, d = q - 2.0, p - q - 2.0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(maxiter + 1):
            if n:
                p, q = np.maximum(e + 4.0 + d, 0.0), e + 2.0
            gone = (out < 0) & ~((np.abs(q) < q_bound) & (np.abs(p) < p_bound))
            out[gone] = n
            if n == maxiter:
                break
            e, d = _ed_step(e, d)
    return out


# -- bridge between drive parameters and trace points -------------------

def initial_condition_from_params(T0_over_L: float, T1_over_L: float) -> TracePoint:
    """``(p_1, q_1) = ([tr M_1]^2, tr M_2)`` for the uniform/sine-square drive
    with ``T0/L`` and ``T1/L``."""
    a = math.pi * T0_over_L
    b = math.pi * T1_over_L
    p1 = 4.0 * (math.cos(a) - b * math.sin(a)) ** 2
    q1 = 2.0 * (math.cos(2 * a) - 2 * b * math.sin(2 * a))
    return TracePoint(p1, q1)


def params_from_trace_point(pt) -> tuple[float, float]:
    """Drive parameters ``(T0/L, T1/L)`` that produce ``pt``.

    Writing ``c = cos(pi T0/L)`` and ``d = p - q - 2`` the initial condition
    inverts in closed form to ``c = (+-sqrt(p) + sqrt(d)) / 2`` and
    ``T1/L = sqrt(d) / (2 pi sin(pi T0/L))``. The root with the smallest
    ``T0/L`` in ``(0, 1)`` and ``T1/L`` in ``[0, 1)`` is returned.
    """
    p, q = float(pt[0]), float(pt[1])
    d = p - q - 2.0
    if p < 0 or d < -1e-14:
        raise NoRootError(f"point {(p, q)} is not reachable (need p >= 0 and p - q - 2 >= 0)")
    sd = math.sqrt(max(d, 0.0))
    best = None
    for sign in (1.0, -1.0):
        c = 0.5 * (sign * math.sqrt(p) + sd)
        if not -1.0 < c < 1.0:
            continue
        t0 = math.acos(c) / math.pi
        t1 = sd / (2 * math.pi * math.sin(math.pi * t0))
        if not 0.0 <= t1 < 1.0:
            continue
        back = initial_condition_from_params(t0, t1)
        if max(abs(back.p - p), abs(back.q - q)) > 1e-10 * max(1.0, abs(p), abs(q)):
            continue
        if best is None or t0 < best[0]:
            best = (t0, t1)
    if best is None:
        raise NoRootError(f"no drive parameters in range reproduce {(p, q)}")
    return best


def first_preimage_params(T0_over_L: float, K: float) -> tuple[float, float]:
    """Preimage-family parameters ``T1/L = (2 cos(pi T0/L) - K) / (2 pi sin(pi T0/L))``.

    At ``K = 0`` the initial point lies on the line ``p = 0``, which ``K``
    maps onto the ray ``q = 2``; for ``K > 0`` it is displaced by ``K^2``.
    """
    s = math.sin(math.pi * T0_over_L)
    if abs(s) < 1e-15:
        raise DomainError("sin(pi T0/L) vanishes")
    return T0_over_L, (2 * math.cos(math.pi * T0_over_L) - K) / (2 * math.pi * s)
