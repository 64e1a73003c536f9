"""scikit-learn style wrappers around the periodogram and the two estimators.

A *sample* here is one lattice field, passed as an ``(n, n)`` array or a
:class:`~extremal_whittle.simulate.LatticeField`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .extremal import choose_threshold, extremal_periodogram, indicators
from .models import get_family
from .validation import check_bounds, check_field, check_m
from .whittle import pairwise_estimate, whittle_estimate, whittle_objective

__all__ = ["ExtremalPeriodogram", "WhittleEstimator", "PairwiseLikelihoodEstimator"]


class ExtremalPeriodogram(TransformerMixin, BaseEstimator):
    """Map a field to its extremal periodogram at the Fourier frequencies (j-order).

    Parameters
    ----------
    m : int
        Threshold index; exceedances of the (1 - 1/m) sample quantile of |X|.
    """

    def __init__(self, m: int = 10):
        self.m = m

    def fit(self, X, y=None):
        x = check_field(X)
        self.m_ = check_m(self.m, x.shape[0])
        self.n_ = x.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "m_")
        x = check_field(X)
        thr = choose_threshold(x, self.m_)
        return extremal_periodogram(indicators(x, thr), self.m_).values


class _FamilyMixin:
    def _family(self):
        if self.family in ("br", "brown-resnick"):
            return get_family("br", c=self.c)
        if self.family in ("mma", "mma-diamond"):
            return get_family("mma", k0=self.k0)
        raise ValueError(f"unknown family {self.family!r}; expected 'br' or 'mma'")

    def predict(self, lags):
        """Fitted extremogram gamma(h) at integer lags of shape (k, 2)."""
        check_is_fitted(self, "theta_")
        lags = np.atleast_2d(np.asarray(lags))
        if lags.shape[-1] != 2:
            raise ValueError("lags must have shape (k, 2)")
        return self.model_.extremogram(lags)


class WhittleEstimator(_FamilyMixin, BaseEstimator):
    """Discrete Whittle estimator for one-parameter extremogram families.

    Parameters
    ----------
    family : {"br", "mma"}
        Brown-Resnick (parameter H, scale ``c`` fixed) or diamond max-moving
        average (parameter phi, radius ``k0`` fixed).
    m : int
        Threshold index.
    bounds : (float, float), optional
        Search interval; defaults to the family's.
    tol : float
        Absolute tolerance of the bounded minimiser.

    Attributes
    ----------
    theta_ : float
    fit_ : WhittleFit
    model_ : SpectralModel at ``theta_``
    """

    def __init__(self, family: str = "br", m: int = 10, bounds=None, c: float = 2.0,
                 k0: int = 5, tol: float = 1e-4):
        self.family = family
        self.m = m
        self.bounds = bounds
        self.c = c
        self.k0 = k0
        self.tol = tol

    def fit(self, X, y=None):
        x = check_field(X)
        fam = self._family()
        m = check_m(self.m, x.shape[0])
        bounds = check_bounds(self.bounds, fam.default_bounds)
        self.fit_ = whittle_estimate(x, m, fam, bounds, self.tol)
        self.theta_ = self.fit_.theta_hat
        self.objective_ = self.fit_.objective
        self.converged_ = self.fit_.converged
        self.model_ = fam.model(self.theta_)
        return self

    def score(self, X, y=None):
        """Negated Whittle score of ``X`` at the fitted parameter (higher is better)."""
        check_is_fitted(self, "theta_")
        x = check_field(X)
        m = check_m(self.m, x.shape[0])
        pgram = extremal_periodogram(indicators(x, choose_threshold(x, m)), m)
        return -whittle_objective(pgram, self._family(), self.theta_)


class PairwiseLikelihoodEstimator(_FamilyMixin, BaseEstimator):
    """Pairwise composite likelihood estimator of H for Brown-Resnick fields.

    Pairs of sites at Euclidean distance at most ``d_max`` contribute the log
    of the bivariate Husler-Reiss density.  Field values are taken to have
    unit Frechet margins.
    """

    def __init__(self, c: float = 2.0, bounds=None, d_max: float = 2.0, tol: float = 1e-4):
        self.c = c
        self.bounds = bounds
        self.d_max = d_max
        self.tol = tol

    family = "br"
    k0 = 5

    def fit(self, X, y=None):
        x = check_field(X)
        fam = self._family()
        bounds = check_bounds(self.bounds, fam.default_bounds)
        self.fit_ = pairwise_estimate(x, fam, bounds, self.d_max, self.tol)
        self.theta_ = self.fit_.theta_hat
        self.loglik_ = self.fit_.loglik
        self.converged_ = self.fit_.converged
        self.model_ = fam.model(self.theta_)
        return self
