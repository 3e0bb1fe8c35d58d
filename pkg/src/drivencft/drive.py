"""Driving sequences: Thue-Morse words, recursive blocks and random
multipolar (RMD) sequences, bound to a pair of elementary steps."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .errors import CapacityError, InvalidParameterError
from .mobius import DeformationParams, MatrixLike, MobiusMatrix, as_array, build_from_deformation
from .scaled import ScaledProduct

TM_MAX_LETTERS_ORDER = 30
TM_MAX_BLOCK_ORDER = 60
_U64 = 1 << 64


def _seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise InvalidParameterError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def mix(seed: int, index: int) -> int:
    """Counter-based 64-bit stream value (splitmix64 of ``seed``, ``index``)."""
    return int(_kernels.mix64(np.uint64(_seed(seed)), np.uint64(index)))


def thue_morse_letters(n: int) -> np.ndarray:
    """First ``2**n`` letters of the Thue-Morse word as a uint8 array.

    >>> "".join(map(str, thue_morse_letters(3)))
    '01101001'
    """
    if n < 0:
        raise InvalidParameterError("order must be non-negative")
    if n > TM_MAX_LETTERS_ORDER:
        raise CapacityError(f"order {n} exceeds {TM_MAX_LETTERS_ORDER}")
    w = np.zeros(1, dtype=np.uint8)
    for _ in range(n):
        w = np.concatenate([w, 1 - w])
    return w


def rmd_sequence(eta: int, blocks: int, seed: int) -> np.ndarray:
    """Fair coin per block selecting ``M_eta`` (0) or ``N_eta`` (1).

    Bit ``i`` is the top bit of ``mix(seed, i)``, so any block can be
    regenerated independently of the others. The coins do not depend on
    ``eta``; use :func:`expand_blocks` for the elementary letters.
    """
    if eta < 0:
        raise InvalidParameterError("eta must be non-negative")
    if blocks < 1:
        raise InvalidParameterError("need at least one block")
    return _kernels.coin_bits(np.uint64(_seed(seed)), np.uint64(0), int(blocks))


def expand_blocks(bits: np.ndarray, eta: int) -> np.ndarray:
    """Replace each block bit by the ``2**eta`` elementary letters of
    ``M_eta`` (bit 0) or ``N_eta`` (bit 1)."""
    word = thue_morse_letters(eta)
    bits = np.asarray(bits, dtype=np.uint8)
    return np.where(bits[:, None] == 0, word[None, :], 1 - word[None, :]).ravel().astype(np.uint8)


@dataclass(frozen=True)
class BlockPair:
    M: ScaledProduct
    N: ScaledProduct
    order: int


def tm_blocks(m0: MatrixLike, n0: MatrixLike, n: int) -> BlockPair:
    """Order-``n`` Thue-Morse blocks by ``n`` doublings
    ``M_k = M_{k-1} N_{k-1}``, ``N_k = N_{k-1} M_{k-1}``."""
    if not 0 <= n <= TM_MAX_BLOCK_ORDER:
        raise CapacityError(f"block order must be in [0, {TM_MAX_BLOCK_ORDER}]")
    M = ScaledProduct.from_matrix(m0)
    N = ScaledProduct.from_matrix(n0)
    for _ in range(n):
        M, N = M @ N, N @ M
    return BlockPair(M, N, n)


def block_matrices(m0: MatrixLike, n0: MatrixLike, eta: int) -> tuple[np.ndarray, np.ndarray]:
    """Represented ``(M_eta, N_eta)`` as plain arrays."""
    bp = tm_blocks(m0, n0, eta)
    return bp.M.matrix(), bp.N.matrix()


# -- laws ---------------------------------------------------------------

@dataclass(frozen=True)
class ThueMorse:
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise InvalidParameterError("order must be non-negative")

    def letters(self) -> np.ndarray:
        return thue_morse_letters(self.order)


@dataclass(frozen=True)
class RMD:
    eta: int
    blocks: int
    seed: int = 0

    def __post_init__(self):
        if self.eta < 0 or self.blocks < 1:
            raise InvalidParameterError("need eta >= 0 and blocks >= 1")
        _seed(self.seed)

    def letters(self) -> np.ndarray:
        return expand_blocks(rmd_sequence(self.eta, self.blocks, self.seed), self.eta)


@dataclass(frozen=True)
class Random:
    length: int
    seed: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise InvalidParameterError("length must be positive")
        _seed(self.seed)

    def letters(self) -> np.ndarray:
        return _kernels.coin_bits(np.uint64(self.seed), np.uint64(0), int(self.length))


@dataclass(frozen=True)
class Periodic:
    """Cyclic repetition of ``word`` (default alternating ``01``)."""

    length: int
    word: str = "01"

    def __post_init__(self):
        if self.length < 1 or not self.word or set(self.word) - {"0", "1"}:
            raise InvalidParameterError("need positive length and a non-empty binary word")

    def letters(self) -> np.ndarray:
        w = np.array([int(ch) for ch in self.word], dtype=np.uint8)
        return np.resize(w, self.length)


Law = Union[ThueMorse, RMD, Random, Periodic]


def parse_law(text: str) -> Law:
    """Parse ``tm:12``, ``rmd:eta=2,blocks=1000,seed=42``,
    ``random:length=100,seed=1`` or ``periodic:length=100[,word=01]``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "tm":
        return ThueMorse(int(rest))
    kw = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, sep, v = item.partition("=")
        if not sep:
            raise InvalidParameterError(f"bad law field {item!r}")
        kw[k.strip()] = v.strip()
    try:
        if kind == "rmd":
            return RMD(int(kw["eta"]), int(kw["blocks"]), int(kw.get("seed", 0), 0))
        if kind == "random":
            return Random(int(kw["length"]), int(kw.get("seed", 0), 0))
        if kind == "periodic":
            return Periodic(int(kw["length"]), kw.get("word", "01"))
    except KeyError as exc:
        raise InvalidParameterError(f"law {kind!r} missing field {exc}") from None
    raise InvalidParameterError(f"unknown law {text!r}")


# -- steps and protocols ------------------------------------------------

class Ordering(enum.Enum):
    FORWARD = "forward"    # first step leftmost
    REVERSED = "reversed"  # first step rightmost


@dataclass(frozen=True)
class StepSpec:
    """One elementary step: holomorphic and antiholomorphic matrices plus
    its duration ``T`` (same length units as ``deformation.L``)."""

    holo: MobiusMatrix
    anti: MobiusMatrix
    duration: float = 0.0
    deformation: Optional[DeformationParams] = None

    def __post_init__(self):
        if not math.isfinite(self.duration):
            raise InvalidParameterError("duration must be finite")
        for name in ("holo", "anti"):
            m = getattr(self, name)
            if not isinstance(m, MobiusMatrix):
                object.__setattr__(self, name, MobiusMatrix(m))

    @classmethod
    def from_deformation(cls, dp: DeformationParams, T: float) -> "StepSpec":
        return cls(build_from_deformation(dp, T, "holo"), build_from_deformation(dp, T, "antiholo"), T, dp)

    @classmethod
    def from_matrices(cls, holo: MatrixLike, anti: Optional[MatrixLike] = None, duration: float = 0.0) -> "StepSpec":
        holo = MobiusMatrix(as_array(holo))
        anti = holo if anti is None else MobiusMatrix(as_array(anti))
        return cls(holo, anti, duration)

    @property
    def length(self) -> float:
        return self.deformation.L if self.deformation is not None else 1.0


@dataclass(frozen=True)
class Protocol:
    step0: StepSpec
    step1: StepSpec
    law: Law
    ordering: Ordering = Ordering.FORWARD

    def __post_init__(self):
        object.__setattr__(self, "ordering", Ordering(self.ordering))

    def letters(self) -> np.ndarray:
        return self.law.letters()

    def sector_arrays(self, sector: str = "holo") -> tuple[np.ndarray, np.ndarray]:
        """Stacked unit matrices and log scales of the two steps."""
        sp = [ScaledProduct.from_matrix(getattr(s, sector)) for s in (self.step0, self.step1)]
        return np.stack([s.unit for s in sp]), np.array([s.log_scale for s in sp])

    def step_times(self) -> np.ndarray:
        """Duration of each letter in units of the system length."""
        return np.array([self.step0.duration / self.step0.length, self.step1.duration / self.step1.length])
