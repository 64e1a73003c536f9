"""Seeded random streams, Fréchet/Gaussian primitives and empirical quantiles."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

__all__ = [
    "RandomStream",
    "derive_stream",
    "unit_frechet_sample",
    "gamma_arrivals",
    "normal_cdf",
    "normal_tail",
    "empirical_quantile",
]

_TWO53 = float(2**53)


class RandomStream:
    """Single-owner random stream with a draw counter.

    Streams for replication ``r`` of an experiment are obtained with
    :func:`derive_stream`; two streams built from the same ``(seed, key)``
    produce bit-identical sequences.
    """

    def __init__(self, seed: int = 0, key: tuple[int, ...] = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self.position = 0

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, key={self.key}, position={self.position})"

    def derive(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.key + (int(index),))

    def uniform(self, size=None):
        """Uniforms on the open interval (0, 1)."""
        k = self._gen.integers(0, 2**53, size=size, dtype=np.int64)
        self.position += 1 if size is None else int(np.prod(size))
        return (k + 0.5) / _TWO53

    def exponential(self, size=None):
        return -np.log(self.uniform(size))

    def standard_normal(self, size=None):
        out = self._gen.standard_normal(size)
        self.position += 1 if size is None else int(np.prod(size))
        return out

    def frechet(self, size=None):
        return -1.0 / np.log(self.uniform(size))


def derive_stream(seed: int, index: int) -> RandomStream:
    """Independent stream for replication ``index`` under master ``seed``."""
    return RandomStream(seed, (index,))


def unit_frechet_sample(stream: RandomStream, size=None):
    """Unit Fréchet draws, P(X <= x) = exp(-1/x), by inversion."""
    return stream.frechet(size)


def gamma_arrivals(stream: RandomStream, count: int) -> np.ndarray:
    """First ``count`` points of a unit-rate Poisson process on (0, inf)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return np.cumsum(stream.exponential(count))


def normal_cdf(x):
    return ndtr(x)


def normal_tail(x):
    # ndtr(-x) keeps full relative accuracy in the upper tail
    return ndtr(np.negative(x))


def empirical_quantile(values, p: float) -> float:
    """Type-1 empirical quantile: the ceil(p*N)-th order statistic."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("no data")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    pos = p * arr.size
    near = round(pos)
    # absorb representation error such as (1 - 1/20) * 400 = 380.00000000000006
    k = int(near) if abs(pos - near) <= 1e-9 * arr.size else math.ceil(pos)
    k = min(max(k, 1), arr.size)
    return float(np.partition(arr, k - 1)[k - 1])
