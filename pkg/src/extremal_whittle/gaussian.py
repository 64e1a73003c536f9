"""Gaussian fields with stationary increments on lattice sites.

These drive the Brown-Resnick constructions.  Two covariance modes exist:

* ``"isotropic-fbm"``: cov(W_s, W_t) = (c/2)(|s|^2H + |t|^2H - |s-t|^2H),
  Euclidean norm, so that var(W_s) = c |s|^2H.
* ``"brownian-sheet"``: cov(W_s, W_t) = min(s1,t1) min(s2,t2) on the
  positive quadrant, var(W_s) = |s1 s2|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stats import RandomStream

__all__ = ["VariogramSpec", "GaussianSampler", "delta", "covariance", "build_sampler", "sample"]

MODES = ("isotropic-fbm", "brownian-sheet")


@dataclass(frozen=True)
class VariogramSpec:
    H: float = 0.5
    c: float = 2.0
    mode: str = "isotropic-fbm"

    def __post_init__(self):
        if not 0.0 < self.H <= 1.0:
            raise ValueError(f"Hurst exponent must lie in (0, 1], got {self.H}")
        if not self.c > 0.0:
            raise ValueError(f"scale c must be positive, got {self.c}")
        if self.mode not in MODES:
            raise ValueError(f"unknown variogram mode {self.mode!r}; expected one of {MODES}")


def delta(s, spec: VariogramSpec):
    """Half the variance of W at lag/site ``s`` (array of shape (..., 2))."""
    s = np.asarray(s, dtype=float)
    if spec.mode == "brownian-sheet":
        return 0.5 * np.abs(s[..., 0] * s[..., 1])
    r2 = s[..., 0] ** 2 + s[..., 1] ** 2
    return 0.5 * spec.c * r2**spec.H


def covariance(sites, spec: VariogramSpec) -> np.ndarray:
    s = np.asarray(sites, dtype=float)
    if spec.mode == "brownian-sheet":
        if np.any(s < 0):
            raise ValueError("brownian-sheet mode needs sites in the nonnegative quadrant")
        return np.minimum.outer(s[:, 0], s[:, 0]) * np.minimum.outer(s[:, 1], s[:, 1])
    d0 = delta(s, spec)
    diff = s[:, None, :] - s[None, :, :]
    return d0[:, None] + d0[None, :] - delta(diff, spec)


@dataclass(frozen=True, eq=False)
class GaussianSampler:
    """Cholesky sampler; sites where W is pinned to zero carry a zero row."""

    sites: np.ndarray
    spec: VariogramSpec
    factor: np.ndarray
    cov: np.ndarray
    free: np.ndarray
    jitter: float

    @property
    def size(self) -> int:
        return len(self.sites)

    def draw(self, stream: RandomStream, count: int | None = None) -> np.ndarray:
        """Draw one field (shape (size,)) or ``count`` fields (shape (size, count))."""
        k = 1 if count is None else int(count)
        out = np.zeros((self.size, k))
        nfree = self.factor.shape[0]
        if nfree:
            z = stream.standard_normal((nfree, k))
            out[self.free] = self.factor @ z
        return out[:, 0] if count is None else out

    def increment_variance(self, i: int) -> np.ndarray:
        """var(W_x - W_{x_i}) for every site x."""
        d = np.diag(self.cov)
        return d + d[i] - 2.0 * self.cov[:, i]


def build_sampler(sites, spec: VariogramSpec, jitter: float | None = None,
                  max_jitter: float = 1e-6) -> GaussianSampler:
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    if len({tuple(p) for p in sites}) != len(sites):
        raise ValueError("sites must be distinct")
    full = covariance(sites, spec)
    free = np.flatnonzero(np.diag(full) > 0.0)
    cov = full[np.ix_(free, free)]
    if cov.size == 0:
        return GaussianSampler(sites, spec, np.zeros((0, 0)), full, free, 0.0)
    scale = float(np.max(np.diag(cov)))
    eps = 1e-12 * scale if jitter is None else float(jitter)
    eye = np.eye(len(free))
    while True:
        try:
            factor = np.linalg.cholesky(cov + eps * eye)
            break
        except np.linalg.LinAlgError:
            if eps >= max_jitter * scale:
                raise np.linalg.LinAlgError("covariance not PSD") from None
            eps = max(2.0 * eps, 1e-12 * scale)
    return GaussianSampler(sites, spec, factor, full, free, eps)


def sample(sampler: GaussianSampler, stream: RandomStream) -> dict:
    """One draw as a mapping from site tuple to value."""
    w = sampler.draw(stream)
    return {tuple(int(v) if float(v).is_integer() else float(v) for v in s): float(x)
            for s, x in zip(sampler.sites, w)}
