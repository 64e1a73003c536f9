"""Exceedance indicators, the empirical spatial extremogram and the extremal periodogram.

Frequency grids are stored in *j-order*: entry ``[j1 - 1, j2 - 1]`` belongs
to the Fourier frequency (2 pi j1 / n, 2 pi j2 / n), j in {1, ..., n}^2, so
the last row and column hold the zero frequency 2 pi = 0 (mod 2 pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stats import empirical_quantile

__all__ = [
    "ThresholdSpec",
    "IndicatorGrid",
    "ExtremogramEstimate",
    "Periodogram",
    "choose_threshold",
    "indicators",
    "empirical_extremogram",
    "extremal_periodogram",
    "fourier_frequencies",
    "periodogram_direct",
    "to_j_order",
]


@dataclass(frozen=True)
class ThresholdSpec:
    m: int
    a_m: float
    rule: str = "empirical-quantile"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if not self.a_m > 0:
            raise ValueError("threshold a_m must be positive")


@dataclass(frozen=True, eq=False)
class IndicatorGrid:
    raw: np.ndarray  # bool (n, n)
    centered: np.ndarray  # float (n, n), sums to zero
    p_hat: float

    @property
    def n(self) -> int:
        return self.raw.shape[0]


@dataclass(frozen=True, eq=False)
class ExtremogramEstimate:
    threshold: ThresholdSpec
    lags: np.ndarray  # (K, 2) int
    values: np.ndarray  # uncentered count-based estimate
    centered: np.ndarray  # product of centered indicators

    def as_dict(self, centered: bool = False) -> dict:
        vals = self.centered if centered else self.values
        return {(int(a), int(b)): float(v) for (a, b), v in zip(self.lags, vals)}

    def __getitem__(self, lag) -> float:
        hit = np.flatnonzero((self.lags[:, 0] == lag[0]) & (self.lags[:, 1] == lag[1]))
        if hit.size == 0:
            raise KeyError(lag)
        return float(self.values[hit[0]])


@dataclass(frozen=True, eq=False)
class Periodogram:
    values: np.ndarray  # (n, n) in j-order
    m: int

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _field_values(field) -> np.ndarray:
    return np.asarray(getattr(field, "values", field), dtype=float)


def choose_threshold(field, m: int) -> ThresholdSpec:
    """a_m as the empirical (1 - 1/m)-quantile of |X|."""
    if m < 2:
        raise ValueError("degenerate threshold: m must be >= 2")
    x = np.abs(_field_values(field))
    return ThresholdSpec(int(m), empirical_quantile(x, 1.0 - 1.0 / m))


def indicators(field, threshold: ThresholdSpec) -> IndicatorGrid:
    raw = np.abs(_field_values(field)) > threshold.a_m
    p_hat = float(raw.mean())
    centered = raw.astype(float) - p_hat
    return IndicatorGrid(raw, centered, p_hat)


def _lag_products(a: np.ndarray) -> np.ndarray:
    """sum_s a_s a_{s+h} for every lag h, ||h||_inf < n, by zero-padded FFT.

    Returned array is indexed by h mod (2n - 1).
    """
    n = a.shape[0]
    size = 2 * n - 1
    spec = np.fft.rfft2(a, s=(size, size))
    return np.fft.irfft2(spec * np.conj(spec), s=(size, size))


def empirical_extremogram(field, threshold: ThresholdSpec, h_max: int) -> ExtremogramEstimate:
    """(m/n^2) sum over s, s+h in the window of joint exceedance indicators.

    Lags with ||h||_inf <= h_max are returned, negative components included.
    ``values`` uses raw indicators; ``centered`` uses indicators minus p_hat.
    """
    x = _field_values(field)
    n = x.shape[0]
    if not 0 <= h_max < n:
        raise ValueError("h_max must satisfy 0 <= h_max < n")
    grid = indicators(x, threshold)
    scale = threshold.m / n**2
    counts = np.rint(_lag_products(grid.raw.astype(float)))
    cprod = _lag_products(grid.centered)
    r = np.arange(-h_max, h_max + 1)
    h1, h2 = np.meshgrid(r, r, indexing="ij")
    lags = np.c_[h1.ravel(), h2.ravel()]
    size = 2 * n - 1
    idx = (lags[:, 0] % size, lags[:, 1] % size)
    return ExtremogramEstimate(threshold, lags, scale * counts[idx], scale * cprod[idx])


def to_j_order(fft_grid: np.ndarray) -> np.ndarray:
    """Reorder an FFT-indexed (k = 0..n-1) grid into j-order (j = 1..n)."""
    return np.roll(fft_grid, -1, axis=(0, 1))


def extremal_periodogram(grid: IndicatorGrid | np.ndarray, m: int) -> Periodogram:
    """(m/n^2) |sum_t I_t exp(i lambda_j . t)|^2 at every Fourier frequency."""
    c = np.asarray(getattr(grid, "centered", grid), dtype=float)
    n = c.shape[0]
    # |sum_t c_t e^{+i lambda t}| equals the modulus of the forward FFT at index j mod n
    power = np.abs(np.fft.fft2(c)) ** 2
    return Periodogram(to_j_order(power) * (m / n**2), int(m))


def fourier_frequencies(n: int) -> np.ndarray:
    """Array (n, n, 2) with entry [j1-1, j2-1] = (2 pi j1/n, 2 pi j2/n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = 2.0 * np.pi * np.arange(1, n + 1) / n
    l1, l2 = np.meshgrid(lam, lam, indexing="ij")
    return np.stack([l1, l2], axis=-1)


def periodogram_direct(grid: IndicatorGrid | np.ndarray, m: int, omega) -> float:
    """Literal double sum over sites; slow reference for the FFT path."""
    c = np.asarray(getattr(grid, "centered", grid), dtype=float)
    n = c.shape[0]
    total = 0j
    for t1 in range(1, n + 1):
        for t2 in range(1, n + 1):
            total += c[t1 - 1, t2 - 1] * np.exp(1j * (omega[0] * t1 + omega[1] * t2))
    return m / n**2 * abs(total) ** 2
