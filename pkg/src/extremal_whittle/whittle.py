"""Discrete Whittle estimation and the pairwise composite likelihood baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .extremal import Periodogram, choose_threshold, extremal_periodogram, indicators
from .models import BrownResnickFamily, positivity_check
from .stats import normal_cdf

__all__ = [
    "WhittleFit",
    "PairwiseFit",
    "NonFiniteObjective",
    "whittle_objective",
    "kolmogorov_residual",
    "minimize_bounded",
    "coordinate_descent",
    "check_family_positivity",
    "whittle_estimate",
    "hr_bivariate_cdf",
    "hr_bivariate_density",
    "hr_log_density",
    "pairwise_lags",
    "pairwise_loglik",
    "pairwise_estimate",
]

BOUNDARY = "boundary solution"


class NonFiniteObjective(ArithmeticError):
    def __init__(self, theta, value):
        super().__init__(f"objective not finite at theta={theta!r}: {value!r}")
        self.theta = theta
        self.value = value


@dataclass(frozen=True)
class WhittleFit:
    theta_hat: float | tuple
    objective: float
    evaluations: int
    converged: bool
    bounds: tuple
    flag: str = ""
    m: int | None = None
    a_m: float | None = None


@dataclass(frozen=True)
class PairwiseFit:
    theta_hat: float
    loglik: float
    d_max: float
    evaluations: int
    converged: bool = True
    bounds: tuple = ()
    flag: str = ""
    pairs: int = 0


# -- Whittle score -----------------------------------------------------------

def _values(periodogram) -> np.ndarray:
    return np.asarray(getattr(periodogram, "values", periodogram), dtype=float)


def _density(family, theta, n: int) -> np.ndarray:
    f = family.model(theta).density_grid(n)
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise ValueError(f"spectral density not positive at theta={theta!r}")
    return f


def whittle_objective(periodogram: Periodogram | np.ndarray, family, theta) -> float:
    """sigma^2(theta) = GM(f_theta) * mean_j(I(lambda_j) / f_theta(lambda_j)).

    GM is the geometric mean of f_theta over the Fourier frequencies, which
    makes the score invariant to rescaling f_theta.
    """
    i_vals = _values(periodogram)
    f = _density(family, theta, i_vals.shape[0])
    log_gm = float(np.mean(np.log(f)))
    return math.exp(log_gm) * float(np.mean(i_vals / f))


def kolmogorov_residual(family, theta, n: int) -> float:
    """n^-2 sum_j log(f_theta(lambda_j) / GM(f_theta)); zero up to rounding."""
    f = _density(family, theta, n)
    gm = np.exp(np.mean(np.log(f)))
    return float(np.mean(np.log(f / gm)))


# -- optimisation ------------------------------------------------------------

def minimize_bounded(objective, lo: float, hi: float, tol: float = 1e-4):
    """Brent minimisation on [lo, hi] (golden section with parabolic steps).

    Returns ``(argmin, value, evaluations)``.  A non-finite objective value
    aborts with :class:`NonFiniteObjective` naming the offending theta.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    count = 0

    def wrapped(x):
        nonlocal count
        count += 1
        v = float(objective(x))
        if not math.isfinite(v):
            raise NonFiniteObjective(float(x), v)
        return v

    res = optimize.minimize_scalar(wrapped, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol, "maxiter": 500})
    return float(res.x), float(res.fun), count


def coordinate_descent(objective, bounds, x0, tol: float = 1e-4, max_sweeps: int = 50):
    """Cyclic one-dimensional minimisation for multi-parameter families."""
    x = [float(v) for v in x0]
    total = 0
    value = float(objective(tuple(x)))
    for _ in range(max_sweeps):
        before = list(x)
        for k, (lo, hi) in enumerate(bounds):
            def slice_k(t, k=k):
                y = list(x)
                y[k] = t
                return objective(tuple(y))

            x[k], value, used = minimize_bounded(slice_k, lo, hi, tol)
            total += used
        if max(abs(a - b) for a, b in zip(x, before)) <= tol:
            return tuple(x), value, total, True
    return tuple(x), value, total, False


@lru_cache(maxsize=64)
def check_family_positivity(family, bounds: tuple, points: int = 5, resolution: int = 128,
                            floor: float = 1e-6) -> float:
    """Numeric positivity of f_theta over a theta-grid spanning ``bounds``.

    Every model has gamma(0) = 1, so f averages about one and ``floor`` is an
    absolute level: a grid minimum at or below it (a near-zero of f) makes the
    score ill-posed and raises.  Returns the smallest minimum seen.
    """
    worst = math.inf
    for theta in _theta_grid(bounds, points):
        low, arg = positivity_check(family.model(theta), resolution)
        if not low > floor:
            raise ValueError(f"spectral density not positive: min {low:.3g} at omega={arg} "
                             f"for theta={theta!r}")
        worst = min(worst, low)
    return worst


def _theta_grid(bounds, points):
    if np.ndim(bounds[0]) == 0:
        return [float(t) for t in np.linspace(bounds[0], bounds[1], points)]
    axes = [np.linspace(lo, hi, points) for lo, hi in bounds]
    return [tuple(float(v) for v in p) for p in zip(*(a.ravel() for a in np.meshgrid(*axes)))]


def _field_values(fld) -> np.ndarray:
    return np.asarray(getattr(fld, "values", fld), dtype=float)


def whittle_estimate(fld, m: int, family, bounds=None, tol: float = 1e-4,
                     check_positivity: bool = True) -> WhittleFit:
    """Threshold at the (1 - 1/m) quantile, form the periodogram, minimise the score."""
    x = _field_values(fld)
    bounds = tuple(family.default_bounds if bounds is None else bounds)
    if check_positivity:
        check_family_positivity(family, bounds)
    thr = choose_threshold(x, m)
    grid = indicators(x, thr)
    if not grid.raw.any():
        raise ValueError(f"no exceedances above the threshold for m={m}")
    pgram = extremal_periodogram(grid, m)

    def score(theta):
        return whittle_objective(pgram, family, theta)

    if getattr(family, "n_params", 1) > 1:
        x0 = tuple(0.5 * (lo + hi) for lo, hi in bounds)
        theta, value, evals, ok = coordinate_descent(score, bounds, x0, tol)
        at_edge = any(min(t - lo, hi - t) <= tol for t, (lo, hi) in zip(theta, bounds))
        flag = BOUNDARY if at_edge else ("" if ok else "not converged")
        return WhittleFit(theta, value, evals, ok and not at_edge, bounds, flag, thr.m, thr.a_m)

    lo, hi = bounds
    theta, value, evals = minimize_bounded(score, lo, hi, tol)
    # the bounded search never evaluates the endpoints; compare them explicitly
    for edge in (lo, hi):
        v = score(edge)
        evals += 1
        if v < value:
            theta, value = edge, v
    at_edge = min(theta - lo, hi - theta) <= tol
    return WhittleFit(theta, value, evals, not at_edge, bounds, BOUNDARY if at_edge else "",
                      thr.m, thr.a_m)


# -- Husler-Reiss pair law and composite likelihood ---------------------------

def _hr_terms(x, y, a):
    w = 0.5 * a + np.log(y / x) / a
    v = a - w
    return w, v


def hr_bivariate_cdf(x, y, delta_h):
    """P(X_0 <= x, X_h <= y) for unit Frechet margins with a = 2 sqrt(delta_h).

    exp{-Phi(w)/x - Phi(a - w)/y}, w = a/2 + log(y/x)/a; the limits a -> 0 and
    a -> inf give exp(-1/min(x, y)) and exp(-1/x - 1/y).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.asarray(delta_h, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("x and y must be positive")
    if np.any(d < 0):
        raise ValueError("delta_h must be nonnegative")
    a = 2.0 * np.sqrt(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        w, v = _hr_terms(x, y, a)
        mid = np.exp(-normal_cdf(w) / x - normal_cdf(v) / y)
    out = np.where(a == 0, np.exp(-1.0 / np.minimum(x, y)), mid)
    out = np.where(np.isinf(a), np.exp(-1.0 / x - 1.0 / y), out)
    return out[()] if out.ndim == 0 else out


def hr_log_density(x, y, delta_h):
    """log of d^2/dx dy of :func:`hr_bivariate_cdf`, for delta_h > 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = 2.0 * np.sqrt(np.asarray(delta_h, dtype=float))
    w, v = _hr_terms(x, y, a)
    cw, cv = normal_cdf(w), normal_cdf(v)
    pw = np.exp(-0.5 * w * w) / math.sqrt(2 * math.pi)
    pv = np.exp(-0.5 * v * v) / math.sqrt(2 * math.pi)
    big_v = cw / x + cv / y
    vx = -cw / x**2 - pw / (a * x**2) + pv / (a * x * y)
    vy = -cv / y**2 - pv / (a * y**2) + pw / (a * x * y)
    vxy = -v * pw / (a**2 * x**2 * y) - w * pv / (a**2 * x * y**2)
    return -big_v + np.log(vx * vy - vxy)


def hr_bivariate_density(x, y, delta_h):
    return np.exp(hr_log_density(x, y, delta_h))


def pairwise_lags(d_max: float) -> list[tuple[int, int]]:
    """One representative per +-h pair with 0 < ||h||_2 <= d_max."""
    k = int(math.floor(d_max))
    out = []
    for h1 in range(0, k + 1):
        for h2 in range(-k, k + 1):
            upper = h1 > 0 or h2 > 0
            if upper and h1 * h1 + h2 * h2 <= d_max * d_max + 1e-12:
                out.append((h1, h2))
    return out


def _pairs(x: np.ndarray, h) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[0]
    h1, h2 = h
    a = x[max(0, -h1):n - max(0, h1), max(0, -h2):n - max(0, h2)]
    b = x[max(0, h1):n - max(0, -h1), max(0, h2):n - max(0, -h2)]
    return a.ravel(), b.ravel()


def pairwise_loglik(fld, family: BrownResnickFamily, theta: float, d_max: float = 2.0) -> float:
    """Sum of Husler-Reiss log densities over site pairs at distance <= d_max."""
    x = _field_values(fld)
    model = family.model(theta)
    total = 0.0
    for h in pairwise_lags(d_max):
        a, b = _pairs(x, h)
        if a.size == 0:
            continue
        d = 0.5 * model.c * float(h[0] ** 2 + h[1] ** 2) ** model.H
        total += float(np.sum(hr_log_density(a, b, d)))
    return total


def pairwise_estimate(fld, family=None, bounds=None, d_max: float = 2.0,
                      tol: float = 1e-4) -> PairwiseFit:
    """Maximise the pairwise composite likelihood over H (Brown-Resnick family)."""
    family = BrownResnickFamily() if family is None else family
    if not isinstance(family, BrownResnickFamily):
        raise ValueError("pairwise likelihood is available for the Brown-Resnick family only")
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    x = _field_values(fld)
    bounds = tuple(family.default_bounds if bounds is None else bounds)
    lo, hi = bounds
    theta, value, evals = minimize_bounded(lambda t: -pairwise_loglik(x, family, t, d_max), lo, hi, tol)
    for edge in (lo, hi):
        v = -pairwise_loglik(x, family, edge, d_max)
        evals += 1
        if v < value:
            theta, value = edge, v
    at_edge = min(theta - lo, hi - theta) <= tol
    npairs = sum(_pairs(x, h)[0].size for h in pairwise_lags(d_max))
    return PairwiseFit(theta, -value, float(d_max), evals, not at_edge, bounds,
                       BOUNDARY if at_edge else "", npairs)
