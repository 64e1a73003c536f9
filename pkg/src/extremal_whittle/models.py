"""Parametric extremograms and extremal spectral densities.

A model's spectral density is the lattice Fourier series
``f(omega) = sum_h gamma(h) cos(omega . h)`` on [0, 2 pi]^2, truncated to
lags ``||h||_inf <= R``.  ``R`` defaults to the smallest radius whose
certified tail bound ``sum_{||h||_inf > R} gamma(h)`` is below ``tail_tol``.

Brown-Resnick extremograms with small H decay so slowly that no practical
radius certifies the tail.  Above ``max_radius`` the model switches to a
smoothly windowed sum: gamma is multiplied by a C-infinity step falling from
1 at ``max_radius/32`` to 0 at ``max_radius``, and the mass removed by the
window is restored at the zero frequency from its radial integral.  Away
from zero frequency the smooth remainder only contributes its continuous
Fourier transform, which is small once the ramp is long compared with the
grid spacing 2 pi / n.  The lowest frequencies of large grids at H < 0.1
are the least accurate; ``windowed`` reports when this approximation is in
use.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .extremal import to_j_order
from .simulate import WeightKernel, mma_weight_diamond
from .stats import normal_tail

__all__ = [
    "SpectralModel",
    "BrownResnickModel",
    "MMADiamondModel",
    "BrownResnickFamily",
    "MMADiamondFamily",
    "BrownResnickJointFamily",
    "TruncationError",
    "br_extremogram",
    "mma_extremogram",
    "spectral_density",
    "spectral_density_grid",
    "positivity_check",
    "get_family",
    "model_from_record",
]

DEFAULT_TAIL_TOL = 1e-10
DEFAULT_MAX_RADIUS = 1024
# the window ramp starts at this fraction of the radius; a long ramp keeps its
# Fourier leakage small at low frequencies
WINDOW_INNER = 1.0 / 32


class TruncationError(ValueError):
    pass


def br_extremogram(h, H: float, c: float = 2.0):
    """2 * Phi_bar(sqrt(delta(h))) with delta(h) = (c/2) ||h||_2^(2H)."""
    h = np.asarray(h, dtype=float)
    r2 = h[..., 0] ** 2 + h[..., 1] ** 2
    return 2.0 * normal_tail(np.sqrt(0.5 * c * r2**H))


def _br_radial(r, H: float, c: float):
    return 2.0 * normal_tail(np.sqrt(0.5 * c) * np.asarray(r, dtype=float) ** H)


def mma_extremogram(h, kernel: WeightKernel) -> float:
    """sum_s min(w(s), w(s+h)) / sum_s w(s) by enumeration over the support."""
    w = kernel.as_dict()
    h1, h2 = int(h[0]), int(h[1])
    num = sum(min(v, w.get((s1 + h1, s2 + h2), 0.0)) for (s1, s2), v in w.items())
    return num / kernel.total


def _smooth_step(t):
    """C-infinity function equal to 1 for t <= 0 and 0 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return b / (a + b)


@dataclass(frozen=True)
class SpectralModel:
    truncation_radius: int | None = field(default=None, kw_only=True)
    tail_tol: float = field(default=DEFAULT_TAIL_TOL, kw_only=True)
    max_radius: int = field(default=DEFAULT_MAX_RADIUS, kw_only=True)

    family = "abstract"

    def extremogram(self, lags) -> np.ndarray:
        raise NotImplementedError

    def tail_bound(self, radius: int) -> float:
        """Upper bound for sum of gamma over ||h||_inf > radius."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def __post_init__(self):
        if self.truncation_radius is not None:
            if self.truncation_radius < 0:
                raise TruncationError("truncation radius must be nonnegative")
            if self.tail_bound(self.truncation_radius) > self.tail_tol:
                raise TruncationError(
                    f"truncation radius too small: tail bound "
                    f"{self.tail_bound(self.truncation_radius):.3g} exceeds tail_tol {self.tail_tol:.3g}")

    # -- truncation -------------------------------------------------------
    @property
    def radius(self) -> int:
        return _resolved_radius(self)[0]

    @property
    def windowed(self) -> bool:
        return _resolved_radius(self)[1]

    def lag_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(gamma on the box [-R, R]^2 with any window applied, far mass at DC)."""
        return _lag_table(self)

    # -- spectral density -------------------------------------------------
    def spectral_density(self, omega) -> float:
        return spectral_density(self, omega)

    def density_grid(self, n: int, method: str = "fft") -> np.ndarray:
        return spectral_density_grid(self, n, method)

    def to_record(self) -> dict:
        rec = {"family": self.family}
        rec.update(self.params())
        rec.update({"R": self.radius, "tail_tol": self.tail_tol, "windowed": self.windowed})
        return rec


@dataclass(frozen=True)
class BrownResnickModel(SpectralModel):
    H: float = 0.5
    c: float = 2.0

    family = "brown-resnick"

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ValueError(f"H must lie in (0, 1), got {self.H}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        super().__post_init__()

    def params(self) -> dict:
        return {"H": self.H, "c": self.c}

    def extremogram(self, lags) -> np.ndarray:
        return br_extremogram(lags, self.H, self.c)

    def _log_radial(self, t):
        """log g(e^t) for the radial profile g(r) = 2 Phi_bar(sqrt(c/2) r^H)."""
        z = math.sqrt(0.5 * self.c) * np.exp(self.H * np.asarray(t, dtype=float))
        return math.log(2.0) + special.log_ndtr(-z)

    def _log_span(self, radius: float) -> tuple[float, float]:
        # beyond z = 40 the profile is below exp(-800): negligible against any power of r
        t_end = (math.log(40.0) - 0.5 * math.log(0.5 * self.c)) / self.H
        return math.log(max(radius, 1e-12)), t_end

    def tail_bound(self, radius: int) -> float:
        # shell ||h||_inf = k holds 8k points, each with ||h||_2 >= k, and the
        # radial profile g decreases, so sum_{k>R} 8k g(k) <= int_R^inf 8(x+1) g(x) dx
        t0, t1 = self._log_span(float(radius))
        if t0 >= t1:
            return 0.0
        val, err = _log_quad(lambda t: math.log(8.0) + np.logaddexp(t, 0.0) + t + self._log_radial(t), t0, t1)
        return val + err

    def far_mass(self, inner: float, outer: float) -> float:
        """Integral of gamma * (1 - window) over the plane, by radial quadrature."""
        t0, t1 = self._log_span(inner)

        def weight(t):
            return 1.0 - _smooth_step((np.exp(t) - inner) / (outer - inner))

        val, _ = _log_quad(lambda t: math.log(2 * math.pi) + 2.0 * t + self._log_radial(t), t0, t1, weight)
        return val


def _log_quad(log_f, t0: float, t1: float, weight=None) -> tuple[float, float]:
    """Integral of weight(t) exp(log_f(t)) over [t0, t1], rescaled by the peak of log_f.

    Returns (value, error estimate); inf when the integral exceeds float range.
    """
    ts = np.linspace(t0, t1, 4001)
    peak = float(np.max(log_f(ts)))

    def scaled(t):
        v = math.exp(float(log_f(t)) - peak)
        return v * float(weight(t)) if weight is not None else v

    breaks = list(np.linspace(t0, t1, 41)[1:-1])
    with warnings.catch_warnings():
        # roundoff warnings appear only once the relative error is already ~1e-9
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(scaled, t0, t1, points=breaks, limit=400, epsrel=1e-10, epsabs=0.0)
    if peak > 700:
        return math.inf, math.inf
    scale = math.exp(peak)
    return float(val * scale), float(abs(err) * scale)


@dataclass(frozen=True)
class MMADiamondModel(SpectralModel):
    phi: float = 0.5
    k0: int = 5

    family = "mma-diamond"

    def __post_init__(self):
        if not self.phi > 0:
            raise ValueError(f"phi must be positive, got {self.phi}")
        if self.k0 < 0:
            raise ValueError("k0 must be nonnegative")
        super().__post_init__()

    @property
    def kernel(self) -> WeightKernel:
        return mma_weight_diamond(self.phi, self.k0)

    def params(self) -> dict:
        return {"phi": self.phi, "k0": self.k0}

    def extremogram(self, lags) -> np.ndarray:
        lags = np.asarray(lags, dtype=np.int64)
        table = _mma_table(self.phi, self.k0)
        span = 2 * self.k0
        out = np.zeros(lags.shape[:-1])
        inside = np.all(np.abs(lags) <= span, axis=-1)
        out[inside] = table[lags[inside][:, 0] + span, lags[inside][:, 1] + span]
        return out

    def tail_bound(self, radius: int) -> float:
        if radius >= 2 * self.k0:
            return 0.0
        r = np.arange(-2 * self.k0, 2 * self.k0 + 1)
        h1, h2 = np.meshgrid(r, r, indexing="ij")
        outside = np.maximum(np.abs(h1), np.abs(h2)) > radius
        return float(self.extremogram(np.stack([h1, h2], -1))[outside].sum())


@lru_cache(maxsize=64)
def _mma_table(phi: float, k0: int) -> np.ndarray:
    """gamma(h) for ||h||_inf <= 2 k0, indexed [h1 + 2k0, h2 + 2k0]."""
    w = mma_weight_diamond(phi, k0)
    size = 2 * k0 + 1
    grid = np.zeros((size, size))
    grid[w.offsets[:, 0] + k0, w.offsets[:, 1] + k0] = w.weights
    span = 2 * k0
    pad = np.zeros((size + 2 * span, size + 2 * span))
    pad[span:span + size, span:span + size] = grid
    # windows[i, j] is the kernel shifted by h = (i - span, j - span)
    windows = np.lib.stride_tricks.sliding_window_view(pad, (size, size))
    out = np.minimum(windows, grid).sum(axis=(2, 3))
    # the centre entry is the total weight summed in the same order, so gamma(0) == 1 exactly
    return out / out[span, span]


@lru_cache(maxsize=256)
def _resolved_radius(model: SpectralModel) -> tuple[int, bool]:
    if model.truncation_radius is not None:
        return int(model.truncation_radius), False
    if model.tail_bound(model.max_radius) > model.tail_tol:
        return int(model.max_radius), True
    lo, hi = 0, model.max_radius
    while lo < hi:
        mid = (lo + hi) // 2
        if model.tail_bound(mid) <= model.tail_tol:
            hi = mid
        else:
            lo = mid + 1
    return lo, False


@lru_cache(maxsize=64)
def _lag_table(model: SpectralModel) -> tuple[np.ndarray, float]:
    radius, windowed = _resolved_radius(model)
    # both families are even in each coordinate separately: fill one quadrant and mirror
    q = np.arange(radius + 1)
    h1, h2 = np.meshgrid(q, q, indexing="ij")
    quad = model.extremogram(np.stack([h1, h2], axis=-1))
    far = 0.0
    if windowed:
        quad = quad * _window(radius)
        far = model.far_mass(radius * WINDOW_INNER, float(radius))
    fold = np.abs(np.arange(-radius, radius + 1))
    gam = quad[np.ix_(fold, fold)]
    gam.setflags(write=False)
    return gam, far


@lru_cache(maxsize=4)
def _window(radius: int) -> np.ndarray:
    q = np.arange(radius + 1)
    inner = radius * WINDOW_INNER
    return _smooth_step((np.hypot(q[:, None], q[None, :]) - inner) / (radius - inner))


def _is_zero_frequency(omega) -> bool:
    w = np.mod(np.asarray(omega, dtype=float), 2 * np.pi)
    return bool(np.all(np.isclose(w, 0.0, atol=1e-12) | np.isclose(w, 2 * np.pi, atol=1e-12)))


def spectral_density(model: SpectralModel, omega) -> float:
    """sum_{||h||_inf <= R} gamma(h) cos(omega . h) at a single frequency pair."""
    gam, far = model.lag_table()
    radius = (gam.shape[0] - 1) // 2
    r = np.arange(-radius, radius + 1)
    c1 = np.cos(omega[0] * r)
    s1 = np.sin(omega[0] * r)
    c2 = np.cos(omega[1] * r)
    s2 = np.sin(omega[1] * r)
    # cos(a + b) = cos a cos b - sin a sin b keeps this O(R^2)
    val = c1 @ gam @ c2 - s1 @ gam @ s2
    if far and _is_zero_frequency(omega):
        val += far
    return float(val)


def _periodize(gam: np.ndarray, n: int) -> np.ndarray:
    """Sum the centred box gam[-R..R, -R..R] into residues h mod n."""
    radius = (gam.shape[0] - 1) // 2
    side = gam.shape[0]
    blocks = -(-side // n)
    pad = np.zeros((blocks * n, blocks * n))
    pad[:side, :side] = gam
    folded = pad.reshape(blocks, n, blocks, n).sum(axis=(0, 2))
    return np.roll(folded, -radius, axis=(0, 1))


def spectral_density_grid(model: SpectralModel, n: int, method: str = "fft") -> np.ndarray:
    """f at every Fourier frequency of an n x n window, in j-order.

    ``fft`` folds the lag table modulo n (exact for any radius) and applies one
    2-D FFT; ``direct`` evaluates the cosine sum frequency by frequency.
    """
    if method == "fft":
        return _grid_fft(model, int(n))
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    lam = 2 * np.pi * np.arange(1, n + 1) / n
    return np.array([[spectral_density(model, (a, b)) for b in lam] for a in lam])


@lru_cache(maxsize=512)
def _grid_fft(model: SpectralModel, n: int) -> np.ndarray:
    gam, far = model.lag_table()
    folded = _periodize(gam, n)
    out = to_j_order(np.fft.fft2(folded).real)
    out[-1, -1] += far
    out.setflags(write=False)
    return out


def positivity_check(model: SpectralModel, resolution: int = 128) -> tuple[float, tuple[float, float]]:
    """Minimum of f over the uniform (2 pi / resolution) grid on [0, 2 pi]^2, and its argmin."""
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    grid = spectral_density_grid(model, resolution)
    idx = np.unravel_index(int(np.argmin(grid)), grid.shape)
    step = 2 * np.pi / resolution
    return float(grid[idx]), (float((idx[0] + 1) * step), float((idx[1] + 1) * step))


# -- parametric families used for fitting ------------------------------------

@dataclass(frozen=True)
class BrownResnickFamily:
    """Brown-Resnick extremograms indexed by H with the scale c held fixed."""

    c: float = 2.0
    tail_tol: float = DEFAULT_TAIL_TOL
    max_radius: int = DEFAULT_MAX_RADIUS

    name = "br"
    param = "H"
    n_params = 1
    default_bounds = (0.01, 0.99)

    def model(self, theta: float) -> BrownResnickModel:
        return BrownResnickModel(H=float(theta), c=self.c, tail_tol=self.tail_tol,
                                 max_radius=self.max_radius)


@dataclass(frozen=True)
class MMADiamondFamily:
    """Diamond max-moving averages indexed by phi with the radius k0 fixed."""

    k0: int = 5

    name = "mma"
    param = "phi"
    n_params = 1
    default_bounds = (0.05, 0.95)

    def model(self, theta: float) -> MMADiamondModel:
        return MMADiamondModel(phi=float(theta), k0=self.k0)


@dataclass(frozen=True)
class BrownResnickJointFamily:
    """Brown-Resnick extremograms indexed by (H, c)."""

    tail_tol: float = DEFAULT_TAIL_TOL
    max_radius: int = DEFAULT_MAX_RADIUS

    name = "br-joint"
    param = ("H", "c")
    n_params = 2
    default_bounds = ((0.01, 0.99), (0.1, 10.0))

    def model(self, theta) -> BrownResnickModel:
        H, c = theta
        return BrownResnickModel(H=float(H), c=float(c), tail_tol=self.tail_tol,
                                 max_radius=self.max_radius)


def get_family(name: str, **fixed):
    if name in ("br", "brown-resnick"):
        return BrownResnickFamily(**fixed)
    if name in ("mma", "mma-diamond"):
        return MMADiamondFamily(**fixed)
    if name == "br-joint":
        return BrownResnickJointFamily(**fixed)
    raise ValueError(f"unknown family {name!r}; expected 'br', 'br-joint' or 'mma'")


def model_from_record(rec: dict) -> SpectralModel:
    """Inverse of ``SpectralModel.to_record``."""
    family = rec["family"]
    common = {"tail_tol": float(rec.get("tail_tol", DEFAULT_TAIL_TOL))}
    if family == "brown-resnick":
        return BrownResnickModel(H=float(rec["H"]), c=float(rec["c"]), **common)
    if family == "mma-diamond":
        return MMADiamondModel(phi=float(rec["phi"]), k0=int(rec["k0"]), **common)
    raise ValueError(f"unknown family {family!r}")
