"""Compiled inner loops: counter-based RNG and scaled 2x2 product chains.

All kernels release the GIL so independent realizations can run on a
thread pool.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S63 = np.uint64(63)
_SQRT2 = np.sqrt(2.0)


@njit(nogil=True)
def mix64(seed, index):
    """splitmix64 finalizer of ``seed + (index + 1) * golden``."""
    z = np.uint64(seed) + (np.uint64(index) + _ONE) * _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(nogil=True)
def coin_bits(seed, start, count):
    out = np.empty(count, dtype=np.uint8)
    for i in range(count):
        out[i] = np.uint8(mix64(seed, start + i) >> _S63)
    return out


@njit(nogil=True, inline="always")
def _step(a, b, c, d, e, f, g, h, left):
    # (a b; c d)(e f; g h), or the reversed product when ``left``
    if left:
        return (e * a + f * c, e * b + f * d, g * a + h * c, g * b + h * d)
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


@njit(nogil=True, inline="always")
def _norm(a, b, c, d):
    n2 = (a.real * a.real + a.imag * a.imag + b.real * b.real + b.imag * b.imag
          + c.real * c.real + c.imag * c.imag + d.real * d.real + d.imag * d.imag)
    return np.sqrt(0.5 * n2)


@njit(nogil=True)
def chain_product(units, scales, letters, reverse):
    """Scaled product of ``units[letters[k]]`` in sequence order."""
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    ls = 0.0
    for k in range(letters.shape[0]):
        u = units[letters[k]]
        a, b, c, d = _step(a, b, c, d, u[0, 0], u[0, 1], u[1, 0], u[1, 1], reverse)
        n = _norm(a, b, c, d)
        a, b, c, d = a / n, b / n, c / n, d / n
        ls += scales[letters[k]] + np.log(n)
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0], out[0, 1], out[1, 0], out[1, 1] = a, b, c, d
    return out, ls


@njit(nogil=True)
def chain_entropy(hu, hs, au, as_, letters, reverse):
    """Per-step log argument of the two-sector entropy factor.

    Returns the complex ``log(f f') + 2 (s + s')`` after every step, where
    ``f = a c - a d - c b + b d = (a - b)(c - d)`` is evaluated on the unit
    matrices (factored to limit cancellation).
    """
    n_steps = letters.shape[0]
    out = np.empty(n_steps, dtype=np.complex128)
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    p, q, r, t = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    ls = 0.0
    for k in range(n_steps):
        s = letters[k]
        u = hu[s]
        v = au[s]
        a, b, c, d = _step(a, b, c, d, u[0, 0], u[0, 1], u[1, 0], u[1, 1], reverse)
        p, q, r, t = _step(p, q, r, t, v[0, 0], v[0, 1], v[1, 0], v[1, 1], reverse)
        n = _norm(a, b, c, d)
        m = _norm(p, q, r, t)
        a, b, c, d = a / n, b / n, c / n, d / n
        p, q, r, t = p / m, q / m, r / m, t / m
        ls += hs[s] + as_[s] + np.log(n) + np.log(m)
        ff = (a - b) * (c - d) * (p - q) * (r - t)
        if ff == 0:
            out[k] = complex(-np.inf, 0.0)
        else:
            out[k] = np.log(ff) + 2.0 * ls
    return out


@njit(nogil=True)
def rmd_first_crossing(hu, hs, au, as_, seed, max_blocks, threshold):
    """Number of random blocks until ``Re log(f f') + 2 (s + s')`` first
    exceeds ``threshold``; -1 if ``max_blocks`` is reached first."""
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    p, q, r, t = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    ls = 0.0
    for k in range(max_blocks):
        s = np.int64(mix64(seed, k) >> _S63)
        u = hu[s]
        v = au[s]
        a, b, c, d = _step(a, b, c, d, u[0, 0], u[0, 1], u[1, 0], u[1, 1], False)
        p, q, r, t = _step(p, q, r, t, v[0, 0], v[0, 1], v[1, 0], v[1, 1], False)
        n = _norm(a, b, c, d)
        m = _norm(p, q, r, t)
        a, b, c, d = a / n, b / n, c / n, d / n
        p, q, r, t = p / m, q / m, r / m, t / m
        ls += hs[s] + as_[s] + np.log(n) + np.log(m)
        ff = abs((a - b) * (c - d) * (p - q) * (r - t))
        if ff > 0 and np.log(ff) + 2.0 * ls > threshold:
            return k + 1
    return -1


@njit(nogil=True)
def chain_traces(units, scales, letters, reverse):
    """Reinstated trace of the running product after every step; NaN once
    the magnitude leaves double range."""
    n_steps = letters.shape[0]
    out = np.empty(n_steps, dtype=np.complex128)
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    ls = 0.0
    for k in range(n_steps):
        u = units[letters[k]]
        a, b, c, d = _step(a, b, c, d, u[0, 0], u[0, 1], u[1, 0], u[1, 1], reverse)
        n = _norm(a, b, c, d)
        a, b, c, d = a / n, b / n, c / n, d / n
        ls += scales[letters[k]] + np.log(n)
        if ls > 700.0:
            out[k] = complex(np.nan, np.nan)
        else:
            out[k] = (a + d) * np.exp(ls)
    return out
