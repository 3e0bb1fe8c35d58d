"""2x2 unimodular matrices for single-step conformal evolution.

A step of a deformed-CFT drive acts on the complex coordinate by a Möbius
transformation ``z -> (a z + b) / (c z + d)``. This module builds the
standard step matrices, classifies them by group and composes them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidParameterError, NumericError

DET_RTOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class GroupClass(enum.Enum):
    SU11 = "SU11"
    SU2 = "SU2"
    SL2R = "SL2R"
    SL2C = "SL2C"


class Chirality(enum.Enum):
    HOLO = "holo"
    ANTIHOLO = "antiholo"


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class _Infinity:
    """Point at infinity on the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


def _det_ok(m: np.ndarray, rtol: float = DET_RTOL) -> bool:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = max(1.0, abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0]))
    return abs(det - 1.0) <= rtol * scale


class MobiusMatrix:
    """Unimodular 2x2 complex matrix ``[[a, b], [c, d]]``.

    Parameters
    ----------
    entries : array_like
        A 2x2 array.
    check : bool
        Verify finiteness and ``ad - bc = 1``. Disable only for
        inputs already known to be unimodular.
    """

    __slots__ = ("_m",)

    def __init__(self, entries, check: bool = True):
        m = np.array(entries, dtype=complex).reshape(2, 2)
        if check:
            if not np.all(np.isfinite(m)):
                raise NumericError("non-finite matrix entries")
            if not _det_ok(m):
                det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
                raise InvalidParameterError(f"matrix is not unimodular (det={det})")
        m.flags.writeable = False
        self._m = m

    @classmethod
    def identity(cls) -> "MobiusMatrix":
        return cls(np.eye(2), check=False)

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._m

    a = property(lambda self: complex(self._m[0, 0]))
    b = property(lambda self: complex(self._m[0, 1]))
    c = property(lambda self: complex(self._m[1, 0]))
    d = property(lambda self: complex(self._m[1, 1]))

    def trace(self) -> complex:
        return complex(self._m[0, 0] + self._m[1, 1])

    def det(self) -> complex:
        m = self._m
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def inv(self) -> "MobiusMatrix":
        m = self._m
        return MobiusMatrix([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], check=False)

    def conj(self) -> "MobiusMatrix":
        return MobiusMatrix(self._m.conj(), check=False)

    def __matmul__(self, other):
        if isinstance(other, MobiusMatrix):
            return MobiusMatrix(self._m @ other._m)
        return NotImplemented

    def __array__(self, dtype=None, copy=None):
        return np.array(self._m, dtype=dtype)

    def allclose(self, other, atol: float = 1e-10) -> bool:
        return bool(np.allclose(self._m, np.asarray(other), rtol=0, atol=atol))

    def __repr__(self):
        return f"MobiusMatrix({self._m.tolist()})"


MatrixLike = Union[MobiusMatrix, np.ndarray]


def as_array(m: MatrixLike) -> np.ndarray:
    return m.array if isinstance(m, MobiusMatrix) else np.asarray(m, dtype=complex)


def _check_duration(T, length):
    if not (math.isfinite(T) and math.isfinite(length)) or length <= 0:
        raise InvalidParameterError(f"need finite T and positive length, got T={T}, length={length}")


def build_u0(T: float, L: float) -> MobiusMatrix:
    """Uniform evolution ``diag(e^{i pi T/L}, e^{-i pi T/L})``."""
    _check_duration(T, L)
    ph = np.exp(1j * np.pi * T / L)
    return MobiusMatrix([[ph, 0], [0, 1 / ph]], check=False)


def build_u1(T: float, l: float) -> MobiusMatrix:
    """Parabolic (sine-square deformed) evolution."""
    _check_duration(T, l)
    x = np.pi * T / l
    return MobiusMatrix([[1 + 1j * x, -1j * x], [1j * x, 1 - 1j * x]], check=False)


def build_u2(T: float, l: float) -> MobiusMatrix:
    """Hyperbolic evolution with eigenvalues ``e^{+-pi T/l}``."""
    _check_duration(T, l)
    x = np.pi * T / l
    if x > 700:
        raise NumericError("cosh overflow in build_u2")
    ch, sh = np.cosh(x), np.sinh(x)
    return MobiusMatrix([[ch, 1j * sh], [-1j * sh, ch]], check=False)


def build_u3(T: float, l: float, Gamma: float, chirality="holo") -> MobiusMatrix:
    """SU(2) evolution of the complex deformation ``(cos G, i sin G, 0)``.

    The antiholomorphic variant flips the sign of both off-diagonal
    entries.
    """
    _check_duration(T, l)
    chirality = Chirality(chirality)
    th = np.pi * T / l
    s, c = np.sin(th), np.cos(th)
    off = s * np.sin(Gamma)
    if chirality is Chirality.ANTIHOLO:
        off = -off
    diag = 1j * np.cos(Gamma) * s
    return MobiusMatrix([[c + diag, -off], [off, c - diag]], check=False)


@dataclass(frozen=True)
class DeformationParams:
    """Envelope ``f(x) = s0 + s+ cos(2 pi r x / L) + s- sin(2 pi r x / L)``."""

    sigma0: complex = 1.0
    sigma_plus: complex = 0.0
    sigma_minus: complex = 0.0
    r: int = 1
    L: float = 1.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise InvalidParameterError(f"winding r must be a positive integer, got {self.r}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise InvalidParameterError(f"L must be positive, got {self.L}")
        for s in (self.sigma0, self.sigma_plus, self.sigma_minus):
            if not np.isfinite(complex(s)):
                raise InvalidParameterError("deformation coefficients must be finite")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def l(self) -> float:
        return self.L / self.r

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.sigma0, self.sigma_plus, self.sigma_minus], dtype=complex)

    @classmethod
    def su2(cls, Gamma: float, **kw) -> "DeformationParams":
        return cls(np.cos(Gamma), 1j * np.sin(Gamma), 0.0, **kw)


def generator(p: DeformationParams, chirality="holo") -> np.ndarray:
    """Traceless 2x2 generator per unit duration.

    The holomorphic sector uses the complex conjugate coefficients so that
    the ``(cos G, i sin G, 0)`` deformation produces ``build_u3``; for real
    coefficients both sectors coincide.
    """
    s = p.coefficients
    if Chirality(chirality) is Chirality.HOLO:
        s = s.conj()
    return (np.pi / p.l) * (s[0] * 1j * SIGMA_Z + s[1] * SIGMA_Y + s[2] * SIGMA_X)


def expm_traceless(G: np.ndarray) -> np.ndarray:
    """Exponential of a traceless 2x2 matrix via ``G^2 = -det(G) I``."""
    mu = np.sqrt(-(G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]) + 0j)
    if abs(mu.real) > 700:
        raise NumericError("generator exponentiation overflow")
    if abs(mu) < 1e-8:
        sinhc = 1 + mu * mu / 6
    else:
        sinhc = np.sinh(mu) / mu
    return np.cosh(mu) * np.eye(2) + sinhc * G


def build_from_deformation(p: DeformationParams, T: float, chirality="holo") -> MobiusMatrix:
    """Step matrix of the deformed Hamiltonian acting for duration ``T``."""
    if not math.isfinite(T):
        raise InvalidParameterError("duration must be finite")
    return MobiusMatrix(expm_traceless(T * generator(p, chirality)), check=False)


def classify_group(m: MatrixLike, tol: float = 1e-9) -> GroupClass:
    """Group pattern satisfied by ``m``; ties resolve to the first match in
    the order SU11, SU2, SL2R, SL2C."""
    a, b, c, d = as_array(m).ravel()
    if abs(d - np.conj(a)) <= tol:
        if abs(c - np.conj(b)) <= tol:
            return GroupClass.SU11
        if abs(c + np.conj(b)) <= tol:
            return GroupClass.SU2
    if max(abs(a.imag), abs(b.imag), abs(c.imag), abs(d.imag)) <= tol:
        return GroupClass.SL2R
    return GroupClass.SL2C


def mobius_apply(m: MatrixLike, z):
    """Evaluate ``(a z + b) / (c z + d)``.

    ``INFINITY`` is accepted as input and returned at a pole.
    """
    a, b, c, d = as_array(m).ravel()
    if z is INFINITY:
        return INFINITY if c == 0 else complex(a / c)
    den = c * z + d
    if den == 0:
        return INFINITY
    return complex((a * z + b) / den)
