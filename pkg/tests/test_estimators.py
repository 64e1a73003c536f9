import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from extremal_whittle.estimators import ExtremalPeriodogram, PairwiseLikelihoodEstimator, WhittleEstimator
from extremal_whittle.simulate import simulate
from extremal_whittle.stats import RandomStream
from extremal_whittle.validation import check_bounds, check_field, check_m


@pytest.fixture(scope="module")
def mma_field():
    return simulate("mma", 30, RandomStream(4), phi=0.5)


def test_get_params_and_clone():
    est = WhittleEstimator(family="mma", m=12, bounds=(0.1, 0.9))
    assert est.get_params() == {"family": "mma", "m": 12, "bounds": (0.1, 0.9), "c": 2.0, "k0": 5, "tol": 1e-4}
    twin = clone(est).set_params(m=7)
    assert twin.m == 7 and est.m == 12
    assert PairwiseLikelihoodEstimator().get_params()["d_max"] == 2.0


def test_periodogram_transformer(mma_field):
    pg = ExtremalPeriodogram(m=10)
    out = pg.fit_transform(mma_field)
    assert out.shape == (30, 30)
    assert out[-1, -1] == pytest.approx(0.0, abs=1e-18)
    assert np.array_equal(out, pg.transform(mma_field.values))
    with pytest.raises(NotFittedError):
        ExtremalPeriodogram().transform(mma_field)


def test_whittle_estimator_fit_predict_score(mma_field):
    est = WhittleEstimator(family="mma", m=10).fit(mma_field)
    assert 0.05 <= est.theta_ <= 0.95
    assert est.fit_.theta_hat == est.theta_
    g = est.predict([[0, 0], [1, 0], [11, 0]])
    assert g[0] == 1.0 and 0 < g[1] < 1 and g[2] == 0.0
    assert est.score(mma_field) == pytest.approx(-est.objective_)
    with pytest.raises(NotFittedError):
        WhittleEstimator().predict([[0, 0]])
    with pytest.raises(ValueError):
        est.predict([[0, 0, 0]])


def test_whittle_estimator_validation(mma_field):
    with pytest.raises(ValueError, match="unknown family"):
        WhittleEstimator(family="gauss").fit(mma_field)
    with pytest.raises(ValueError, match="degenerate"):
        WhittleEstimator(family="mma", m=1).fit(mma_field)
    with pytest.raises(ValueError):
        WhittleEstimator(family="mma", bounds=(0.9, 0.1)).fit(mma_field)


def test_pairwise_estimator():
    fld = simulate("br-exact", 8, RandomStream(2))
    est = PairwiseLikelihoodEstimator(c=1.0, d_max=1.0).fit(fld)
    assert 0.01 <= est.theta_ <= 0.99
    assert np.isfinite(est.loglik_)
    assert est.predict([[0, 0]])[0] == 1.0


def test_check_field():
    assert check_field([[1.0, 2.0], [3.0, 4.0]]).dtype == np.float64
    with pytest.raises(ValueError, match="square"):
        check_field(np.ones((2, 3)))
    with pytest.raises(ValueError):
        check_field([[1.0, np.nan], [1.0, 1.0]])
    with pytest.raises(ValueError, match="positive"):
        check_field([[1.0, -2.0], [1.0, 1.0]])
    assert check_field([[0.0, -1.0], [1.0, 2.0]], positive=False).shape == (2, 2)


def test_check_m_and_bounds():
    assert check_m(5) == 5 and check_m(4.0) == 4
    with pytest.raises(TypeError):
        check_m(2.5)
    with pytest.raises(TypeError):
        check_m(True)
    with pytest.raises(ValueError):
        check_m(26, n=5)
    assert check_bounds(None, (0.1, 0.2)) == (0.1, 0.2)
    with pytest.raises(ValueError):
        check_bounds((1.0, np.inf), (0, 1))
