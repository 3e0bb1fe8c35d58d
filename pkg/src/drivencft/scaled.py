"""Overflow-safe representation of long 2x2 matrix products."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .mobius import MatrixLike, MobiusMatrix, as_array

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ScaledProduct:
    """Matrix stored as ``exp(log_scale) * unit`` with ``||unit||_F = sqrt(2)``.

    Unimodular matrices have Frobenius norm at least ``sqrt(2)``, so
    ``log_scale`` is non-negative for them and equals zero for unitary
    ones.
    """

    unit: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    log_scale: float = 0.0

    def __post_init__(self):
        u = np.array(self.unit, dtype=complex).reshape(2, 2)
        u.flags.writeable = False
        object.__setattr__(self, "unit", u)
        object.__setattr__(self, "log_scale", float(self.log_scale))

    @classmethod
    def from_matrix(cls, m: MatrixLike) -> "ScaledProduct":
        return cls._renorm(as_array(m), 0.0)

    @classmethod
    def identity(cls) -> "ScaledProduct":
        return cls()

    @classmethod
    def _renorm(cls, m: np.ndarray, log_scale: float) -> "ScaledProduct":
        n = np.linalg.norm(m) / SQRT2
        if not (np.isfinite(n) and n > 0):
            raise NumericError("cannot renormalize matrix product")
        return cls(m / n, log_scale + math.log(n))

    def __matmul__(self, other: "ScaledProduct") -> "ScaledProduct":
        if not isinstance(other, ScaledProduct):
            return NotImplemented
        return ScaledProduct._renorm(self.unit @ other.unit, self.log_scale + other.log_scale)

    def matrix(self) -> np.ndarray:
        """Represented matrix; raises when it does not fit in doubles."""
        if self.log_scale > 700:
            raise NumericError(f"log scale {self.log_scale:.1f} exceeds double range")
        return self.unit * math.exp(self.log_scale)

    def mobius(self) -> MobiusMatrix:
        return MobiusMatrix(self.matrix())

    def trace(self) -> complex:
        return complex(np.trace(self.matrix()))

    def log_norm(self) -> float:
        """``log ||M||_F`` of the represented matrix."""
        return self.log_scale + math.log(np.linalg.norm(self.unit))

    def det_residual(self) -> float:
        """``|det(unit) e^{2 log_scale} - 1|``; meaningful while the scale is
        moderate, since ``det(unit)`` then loses relative precision."""
        det = complex(np.linalg.det(self.unit))
        return abs(det * math.exp(min(2 * self.log_scale, 700.0)) - 1)
