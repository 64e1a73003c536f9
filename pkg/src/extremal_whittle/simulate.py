"""Lattice samples of max-moving averages and Brown-Resnick fields.

All simulators return a :class:`LatticeField` whose ``values[i-1, j-1]`` is
the field at site ``(i, j)`` of the observation window {1, ..., n}^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gaussian import GaussianSampler, VariogramSpec, build_sampler
from .stats import RandomStream

__all__ = [
    "LatticeField",
    "WeightKernel",
    "BrSimConfig",
    "SimulationBudgetExceeded",
    "grid_sites",
    "mma_weight_diamond",
    "simulate_mma",
    "simulate_br_truncated",
    "simulate_br_exact",
    "simulate",
]

# Gaussian fields are drawn in blocks of this many; term j of a truncated
# series therefore depends on the stream independently of the truncation J.
_BLOCK = 64


class SimulationBudgetExceeded(RuntimeError):
    pass


@dataclass
class LatticeField:
    values: np.ndarray
    model: str = "unknown"
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"field values must be a square n x n array, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("field values must be strictly positive and finite")
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class WeightKernel:
    offsets: np.ndarray  # (K, 2) integer lattice points
    weights: np.ndarray  # (K,) nonnegative

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=np.int64).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(off) != len(w):
            raise ValueError("offsets and weights differ in length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be nonnegative and finite")
        if not w.sum() > 0:
            raise ValueError("kernel total weight must be positive")
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "weights", w)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def radius(self) -> int:
        return int(np.abs(self.offsets).max(initial=0))

    def as_dict(self) -> dict:
        return {(int(a), int(b)): float(w) for (a, b), w in zip(self.offsets, self.weights)}


def mma_weight_diamond(phi: float, k0: int = 5) -> WeightKernel:
    """Weights phi^(|s1|+|s2|) on the diamond |s1| + |s2| <= k0."""
    if not phi > 0:
        raise ValueError("phi must be positive")
    if k0 < 0:
        raise ValueError("k0 must be nonnegative")
    r = np.arange(-k0, k0 + 1)
    s1, s2 = np.meshgrid(r, r, indexing="ij")
    l1 = np.abs(s1) + np.abs(s2)
    keep = l1 <= k0
    offsets = np.c_[s1[keep], s2[keep]]
    return WeightKernel(offsets, float(phi) ** l1[keep].astype(float))


def simulate_mma(n: int, kernel: WeightKernel, stream: RandomStream) -> LatticeField:
    """Max-moving average X_t = max_s w(s) Z_{t-s} with iid unit Fréchet noise.

    Noise lives on the window dilated by the kernel support, so boundary
    sites see genuine (not wrapped) noise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = kernel.radius
    z = stream.frechet((n + 2 * p, n + 2 * p))
    x = np.zeros((n, n))
    for (s1, s2), w in zip(kernel.offsets, kernel.weights):
        if w == 0:
            continue
        np.maximum(x, w * z[p - s1:p - s1 + n, p - s2:p - s2 + n], out=x)
    return LatticeField(x, "mma", {"kernel_total": kernel.total}, stream.seed)


@dataclass(frozen=True)
class BrSimConfig:
    spec: VariogramSpec = VariogramSpec()
    mode: str = "truncated"
    truncation_terms: int = 1000
    anchor: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.mode not in ("truncated", "exact"):
            raise ValueError(f"unknown Brown-Resnick simulation mode {self.mode!r}")
        if self.mode == "truncated" and self.truncation_terms < 1:
            raise ValueError("truncation_terms must be >= 1")

    def params(self) -> dict:
        out = {"H": self.spec.H, "c": self.spec.c, "variogram": self.spec.mode}
        if self.mode == "truncated":
            out["J"] = self.truncation_terms
        if tuple(self.anchor) != (0, 0):
            out["anchor"] = f"{self.anchor[0]}:{self.anchor[1]}"
        return out


def grid_sites(n: int, anchor=(0, 0)) -> np.ndarray:
    """Sites (i, j), 1 <= i, j <= n, in row-major order, relative to ``anchor``."""
    i, j = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    return np.c_[i.ravel() - anchor[0], j.ravel() - anchor[1]]


@lru_cache(maxsize=8)
def _sampler(n: int, spec: VariogramSpec, anchor: tuple[int, int]) -> GaussianSampler:
    return build_sampler(grid_sites(n, anchor), spec)


def simulate_br_truncated(n: int, config: BrSimConfig, stream: RandomStream,
                          sampler: GaussianSampler | None = None) -> LatticeField:
    """X_s = max_{j<=J} exp(W_s^(j) - var(W_s)/2) / Gamma_j."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sampler is None:
        sampler = _sampler(n, config.spec, tuple(config.anchor))
    half_var = 0.5 * np.diag(sampler.cov)
    log_x = np.full(sampler.size, -np.inf)
    arrival = 0.0
    remaining = config.truncation_terms
    while remaining > 0:
        e = stream.exponential(_BLOCK)
        w = sampler.draw(stream, _BLOCK)
        use = min(remaining, _BLOCK)
        gam = arrival + np.cumsum(e)
        terms = w[:, :use] - half_var[:, None] - np.log(gam[:use])[None, :]
        np.maximum(log_x, terms.max(axis=1), out=log_x)
        arrival = gam[-1]
        remaining -= use
    return LatticeField(np.exp(log_x).reshape(n, n), "br-truncated", config.params(), stream.seed)


def simulate_br_exact(n: int, config: BrSimConfig, stream: RandomStream,
                      sampler: GaussianSampler | None = None,
                      max_draws: int = 10**6) -> LatticeField:
    """Exact Brown-Resnick sample via sequential extremal functions.

    Sites are visited in row-major order.  At site x_i, Poisson arrivals
    zeta = 1/Gamma are scanned while zeta exceeds the running maximum at
    x_i; each spectral function Y(x) = exp(W_x - W_{x_i} - var(W_x - W_{x_i})/2)
    is accepted only if it stays below the running maximum at all
    previously visited sites.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if sampler is None:
        sampler = _sampler(n, config.spec, tuple(config.anchor))
    size = sampler.size
    z = np.zeros(size)
    pool = np.empty((size, 0))
    used = 0
    draws = 0
    for i in range(size):
        arrival = float(stream.exponential())
        zeta = 1.0 / arrival
        inc_var = None
        while zeta > z[i]:
            if draws >= max_draws:
                raise SimulationBudgetExceeded("exact simulation budget exceeded")
            if used == pool.shape[1]:
                pool = sampler.draw(stream, _BLOCK)
                used = 0
            w = pool[:, used]
            used += 1
            draws += 1
            if inc_var is None:
                inc_var = sampler.increment_variance(i)
            cand = zeta * np.exp(w - w[i] - 0.5 * inc_var)
            if i == 0 or np.all(cand[:i] < z[:i]):
                np.maximum(z, cand, out=z)
            arrival += float(stream.exponential())
            zeta = 1.0 / arrival
    params = config.params()
    params["draws"] = draws
    return LatticeField(z.reshape(n, n), "br-exact", params, stream.seed)


def simulate(model: str, n: int, stream: RandomStream, *, phi: float = 0.5, k0: int = 5,
             H: float = 0.5, c: float = 2.0, variogram: str = "isotropic-fbm",
             J: int = 1000) -> LatticeField:
    """Dispatch on a model id: ``mma``, ``br-truncated`` or ``br-exact``."""
    if model == "mma":
        fld = simulate_mma(n, mma_weight_diamond(phi, k0), stream)
        fld.params = {"phi": phi, "k0": k0}
        fld.seed = stream.seed
        return fld
    spec = VariogramSpec(H=H, c=c, mode=variogram)
    if model == "br-truncated":
        return simulate_br_truncated(n, BrSimConfig(spec, "truncated", J), stream)
    if model == "br-exact":
        return simulate_br_exact(n, BrSimConfig(spec, "exact"), stream)
    raise ValueError(f"unknown model {model!r}; expected mma, br-truncated or br-exact")
