"""Counter-based random substreams and the two scalar samplers.

Every draw is a pure function of ``(master_seed, stream_index, counter)``.
The generator is Philox4x64-10 keyed with ``(master_seed, stream_index)``;
draw number ``t`` of a stream is 64-bit word ``t % 4`` of the Philox block
with counter ``(t // 4, 0, 0, 0)``. Because nothing is carried between
streams, a Monte Carlo iteration can own its own substream and the result
does not depend on how iterations are split across workers.

Each sampling call consumes exactly one word (the counter advances by 1):

* uniform: ``u = (word >> 11) * 2**-53`` in ``[0, 1)``, then affine map;
* gaussian: ``u = ((word >> 11) + 0.5) * 2**-53`` in ``(0, 1)``, then
  ``mu + sqrt(variance) * ndtri(u)`` (inverse normal CDF).

The block functions (:func:`raw_words`, :func:`gaussian_from_words`,
:func:`uniform_from_words`) are the vectorised
form used by the engines; :class:`RandomStream` and the ``sample_*``
functions are the scalar form. Both produce identical values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtri

__all__ = [
    "Gaussian",
    "Uniform",
    "Distribution",
    "RandomStream",
    "derive_substream",
    "sample_gaussian",
    "sample_uniform",
    "raw_words",
    "philox4x64",
    "gaussian_from_words",
    "uniform_from_words",
]

_MASK64 = (1 << 64) - 1
_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)

_PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
_PHILOX_M1 = np.uint64(0xCA5A826395121157)
_PHILOX_W0 = np.uint64(0x9E3779B97F4A7C15)
_PHILOX_W1 = np.uint64(0xBB67AE8584CAA73B)
_PHILOX_ROUNDS = 10

_TWO_M53 = 2.0**-53


def _mulhilo(a, b):
    """Full 64x64 -> 128 bit product, returned as (hi, lo)."""
    a_lo, a_hi = a & _M32, a >> _S32
    b_lo, b_hi = b & _M32, b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _S32) + (lh & _M32) + (hl & _M32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, a * b


def philox4x64(counter, key):
    """Philox4x64-10 block function.

    Parameters
    ----------
    counter : sequence of 4 uint64 arrays (broadcastable)
    key : sequence of 2 uint64 arrays (broadcastable)

    Returns
    -------
    tuple of 4 uint64 arrays
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in counter)
    k0, k1 = (np.asarray(k, dtype=np.uint64) for k in key)
    with np.errstate(over="ignore"):
        for r in range(_PHILOX_ROUNDS):
            if r:
                k0 = k0 + _PHILOX_W0
                k1 = k1 + _PHILOX_W1
            hi0, lo0 = _mulhilo(_PHILOX_M0, c0)
            hi1, lo1 = _mulhilo(_PHILOX_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def _u64(x) -> np.ndarray:
    if isinstance(x, (int, np.integer)):
        return np.array(int(x) & _MASK64, dtype=np.uint64)
    arr = np.asarray(x)
    if arr.dtype == np.uint64:
        return arr
    return arr.astype(np.int64).astype(np.uint64)


def raw_words(master_seed: int, stream_index, start: int, count: int) -> np.ndarray:
    """Words ``start .. start+count-1`` of each stream in ``stream_index``.

    Returns a uint64 array of shape ``(len(stream_index), count)``.
    """
    idx = np.atleast_1d(_u64(stream_index)).reshape(-1, 1)
    seed = np.uint64(int(master_seed) & _MASK64)
    if count <= 0:
        return np.empty((idx.shape[0], 0), dtype=np.uint64)
    first_block = start // 4
    last_block = (start + count - 1) // 4
    blocks = np.arange(first_block, last_block + 1, dtype=np.uint64).reshape(1, -1)
    zero = np.uint64(0)
    w = philox4x64((blocks, zero, zero, zero), (seed, idx))
    # interleave -> (streams, nblocks * 4) in draw order
    words = np.stack(np.broadcast_arrays(*w), axis=-1).reshape(idx.shape[0], -1)
    offset = start - 4 * first_block
    return words[:, offset : offset + count]


def _unit_closed_open(words: np.ndarray) -> np.ndarray:
    return (words >> _S11).astype(np.float64) * _TWO_M53


def _unit_open(words: np.ndarray) -> np.ndarray:
    return ((words >> _S11).astype(np.float64) + 0.5) * _TWO_M53


@dataclass(frozen=True)
class Gaussian:
    """Normal law parameterised by mean and variance."""

    mu: float
    variance: float

    def __post_init__(self):
        if not np.isfinite(self.mu) or not self.variance > 0:
            raise ValueError(f"Gaussian requires finite mu and variance > 0, got {self.mu!r}, {self.variance!r}")

    def from_words(self, words: np.ndarray) -> np.ndarray:
        return gaussian_from_words(words, self.mu, self.variance)

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def var(self) -> float:
        return self.variance


@dataclass(frozen=True)
class Uniform:
    """Rectangular law on ``[lower, upper)``."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)) or not self.lower < self.upper:
            raise ValueError(f"Uniform requires lower < upper, got {self.lower!r}, {self.upper!r}")

    def from_words(self, words: np.ndarray) -> np.ndarray:
        return uniform_from_words(words, self.lower, self.upper)

    @property
    def mean(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def var(self) -> float:
        return (self.upper - self.lower) ** 2 / 12.0


Distribution = Union[Gaussian, Uniform]


def gaussian_from_words(words, mu, variance):
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance!r}")
    if variance == 0:
        return np.full(np.shape(words), float(mu))
    return mu + np.sqrt(variance) * ndtri(_unit_open(words))


def uniform_from_words(words, lower, upper):
    if not lower < upper:
        raise ValueError(f"uniform requires lower < upper, got {lower!r}, {upper!r}")
    x = lower + (upper - lower) * _unit_closed_open(words)
    # rounding can land exactly on upper
    return np.minimum(x, np.nextafter(upper, lower))


@dataclass
class RandomStream:
    """Scalar view of one substream; ``counter`` is the next word to use."""

    master_seed: int
    stream_index: int
    counter: int = 0

    def next_word(self) -> np.ndarray:
        w = raw_words(self.master_seed, self.stream_index, self.counter, 1)[0]
        self.counter += 1
        return w

    def words(self, count: int) -> np.ndarray:
        w = raw_words(self.master_seed, self.stream_index, self.counter, count)[0]
        self.counter += count
        return w

    def uniforms(self, count: int) -> np.ndarray:
        """``count`` U[0, 1) draws (counter advances by ``count``)."""
        return _unit_closed_open(self.words(count))


def derive_substream(master_seed: int, stream_index: int) -> RandomStream:
    return RandomStream(int(master_seed) & _MASK64, int(stream_index) & _MASK64, 0)


def sample_gaussian(stream: RandomStream, mu: float, variance: float) -> float:
    """One draw from N(mu, variance); variance 0 returns ``mu`` exactly."""
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance!r}")
    return float(gaussian_from_words(stream.next_word(), mu, variance)[0])


def sample_uniform(stream: RandomStream, lower: float, upper: float) -> float:
    if not lower < upper:
        raise ValueError(f"uniform requires lower < upper, got {lower!r}, {upper!r}")
    return float(uniform_from_words(stream.next_word(), lower, upper)[0])
