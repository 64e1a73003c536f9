"""Acceptance checks, one printed PASS/FAIL line per criterion.

Run under pytest (``pytest tests/test_acceptance.py -v``) or directly with
``python3 tests/test_acceptance.py``.  Every random quantity is drawn from
streams derived from the fixed ``SEED`` below.
"""

from __future__ import annotations

import math
import sys
from functools import lru_cache

import numpy as np
import pytest
from scipy import stats as sps

from extremal_whittle.experiment import ExperimentConfig, run_experiment
from extremal_whittle.extremal import (
    choose_threshold,
    empirical_extremogram,
    extremal_periodogram,
    fourier_frequencies,
    indicators,
    periodogram_direct,
)
from extremal_whittle.models import BrownResnickFamily, BrownResnickModel, MMADiamondFamily, MMADiamondModel
from extremal_whittle.models import positivity_check
from extremal_whittle.simulate import simulate
from extremal_whittle.stats import derive_stream, normal_cdf
from extremal_whittle.whittle import hr_bivariate_cdf, hr_bivariate_density, kolmogorov_residual

SEED = 2024


def _line(ok: bool, label: str, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} [{label}] {detail}"


@pytest.fixture
def report(capsys):
    def emit(ok, label, detail):
        with capsys.disabled():
            print("\n" + _line(ok, label, detail))
        assert ok, detail
    return emit


# -- shared studies -------------------------------------------------------------

@lru_cache(maxsize=None)
def truncated_br_study():
    cfg = ExperimentConfig(model="br-truncated", n=20, replications=50, m_values=(3, 5), H=0.5, c=2.0,
                           variogram="isotropic-fbm", J=1000, family="br", seed=SEED)
    return run_experiment(cfg)


@lru_cache(maxsize=None)
def exact_br_study():
    cfg = ExperimentConfig(model="br-exact", n=50, replications=30, m_values=(10,), H=0.5, c=2.0,
                           estimators=("whittle", "pairwise"), family="br", seed=SEED + 1)
    return run_experiment(cfg)


@lru_cache(maxsize=None)
def mma_study(phi0: float, n: int, m: int):
    bounds = (0.05, 0.95) if phi0 < 1 else (1.05, 3.0)
    cfg = ExperimentConfig(model="mma", phi=phi0, k0=5, n=n, replications=50, m_values=(m,),
                           family="mma", bounds=bounds, seed=SEED + 2)
    return run_experiment(cfg).estimates("whittle", m)


# -- criteria -------------------------------------------------------------------

def criterion_1():
    s = truncated_br_study()
    a, b = s.lookup("whittle", 3), s.lookup("whittle", 5)
    ok = 0.40 <= a["mean"] <= 0.54 and a["std"] <= 0.10 and 0.39 <= b["mean"] <= 0.53 and a["failures"] == 0
    return ok, (f"truncated BR n=20 J=1000 (isotropic-fbm), 50 reps: m=3 mean={a['mean']:.4f} "
                f"median={a['median']:.4f} std={a['std']:.4f} (mean in [0.40,0.54], std<=0.10); "
                f"m=5 mean={b['mean']:.4f} (in [0.39,0.53])")


def criterion_2():
    w = exact_br_study().lookup("whittle", 10)
    ok = 0.42 <= w["mean"] <= 0.68 and abs(w["median"] - 0.5) <= 0.15 and w["count"] >= 30
    return ok, (f"exact BR n=50 m=10, {w['count']} reps: mean={w['mean']:.4f} (in [0.42,0.68]) "
                f"median={w['median']:.4f} (within 0.15 of 0.5) std={w['std']:.4f}")


def criterion_3():
    s = exact_br_study()
    w, p = s.lookup("whittle", 10), s.lookup("pairwise", 0)
    ok = p["std"] < w["std"] and abs(p["mean"] - 0.5) > abs(w["median"] - 0.5)
    return ok, (f"pairwise mean={p['mean']:.4f} std={p['std']:.4f} boundary={p['boundary']}/{p['count']} vs "
                f"Whittle median={w['median']:.4f} std={w['std']:.4f} "
                f"(need pairwise std smaller and mean farther from 0.5)")


def criterion_4():
    parts, ok = [], True
    for phi0 in (0.5, 1.5):
        e50, e100 = mma_study(phi0, 50, 20), mma_study(phi0, 100, 40)
        med = float(np.median(e50))
        err50, err100 = float(np.median(np.abs(e50 - phi0))), float(np.median(np.abs(e100 - phi0)))
        this = abs(med - phi0) <= 0.2 and err100 < err50
        ok &= this
        parts.append(f"phi0={phi0}: median={med:.4f} |median-phi0|={abs(med - phi0):.4f}<=0.2, "
                     f"median abs error n=50 {err50:.4f} -> n=100 {err100:.4f} ({'ok' if this else 'miss'})")
    return ok, "MMA k0=5, 50 reps, m=20 at n=50 and m=40 at n=100; " + "; ".join(parts)


def criterion_5():
    rng = np.random.default_rng(SEED + 5)
    lam = fourier_frequencies(8)
    worst = 0.0
    for _ in range(100):
        raw = rng.random((8, 8)) < rng.uniform(0.05, 0.6)
        c = raw - raw.mean()
        fft = extremal_periodogram(c, 4).values
        direct = np.array([[periodogram_direct(c, 4, lam[i, j]) for j in range(8)] for i in range(8)])
        worst = max(worst, float(np.max(np.abs(fft - direct))))
    return worst <= 1e-10, f"FFT vs direct double sum, 100 random 8x8 grids: max abs diff={worst:.3e} (<=1e-10)"


def criterion_6():
    n, m = 16, 8
    fld = simulate("mma", n, derive_stream(SEED + 6, 0), phi=0.5, k0=2)
    thr = choose_threshold(fld, m)
    pg = extremal_periodogram(indicators(fld, thr), m).values
    est = empirical_extremogram(fld, thr, n - 1)
    lam = fourier_frequencies(n).reshape(-1, 2)
    series = np.cos(lam @ est.lags.T.astype(float)) @ est.centered
    worst = float(np.max(np.abs(series.reshape(n, n) - pg)))
    return worst <= 1e-8, f"periodogram vs cosine series of centered extremogram, 16x16: max abs diff={worst:.3e} (<=1e-8)"


def criterion_7():
    rng = np.random.default_rng(SEED + 7)
    worst = {}
    for name, fam, draw in [("br", BrownResnickFamily(), lambda: rng.uniform(0.01, 0.99)),
                            ("mma", MMADiamondFamily(),
                             lambda: rng.uniform(0.05, 0.95) if rng.random() < 0.5 else rng.uniform(1.05, 3.0))]:
        worst[name] = max(abs(kolmogorov_residual(fam, draw(), 20)) for _ in range(20))
    ok = max(worst.values()) <= 1e-12
    return ok, (f"mean log(f/geometric mean) over 20 random theta, n=20: br max={worst['br']:.2e} "
                f"mma max={worst['mma']:.2e} (<=1e-12)")


def criterion_8():
    n = 200
    m = math.ceil(n ** 0.7)
    model = MMADiamondModel(phi=0.5, k0=5)
    oracle = float(model.extremogram(np.array([[1, 0]]))[0])
    errors = []
    for r in range(20):
        fld = simulate("mma", n, derive_stream(SEED + 8, r), phi=0.5, k0=5)
        est = empirical_extremogram(fld, choose_threshold(fld, m), 3)
        errors.append(np.abs(est.values - model.extremogram(est.lags)))
    mean_err = float(np.mean(errors))
    ok = mean_err < 0.05 and abs(oracle - 0.638461538461538) < 1e-12
    return ok, (f"MMA phi=0.5 n=200 m={m}, 20 reps: mean |gamma_hat - gamma| over ||h||_inf<=3 = "
                f"{mean_err:.4f} (<0.05); gamma(1,0)={oracle:.12f}")


def criterion_9():
    mins = {H: positivity_check(BrownResnickModel(H=H, c=2.0), 128)[0] for H in np.round(np.arange(0.1, 1.0, 0.1), 1)}
    ok = all(v > 0 for v in mins.values())
    return ok, "BR c=2 min over 128x128 grid: " + " ".join(f"H={h}:{v:.4f}" for h, v in mins.items())


@lru_cache(maxsize=None)
def exact_small_fields():
    return np.array([simulate("br-exact", 10, derive_stream(SEED + 10, r)).values for r in range(200)])


def criterion_10():
    x = exact_small_fields()
    ks = sps.kstest((1.0 / x).ravel(), "expon")
    u, delta = 5.0, 1.0  # delta(h) = (c/2) ||h||^(2H) = 1 at h = (1, 0), c = 2, H = 1/2
    both = (x[:, :-1, :] > u) & (x[:, 1:, :] > u)
    per_field = both.reshape(len(x), -1).mean(axis=1)
    est = float(per_field.mean())
    se = float(per_field.std(ddof=1) / math.sqrt(len(x)))
    target = 1 - 2 * math.exp(-1 / u) + math.exp(-(2 / u) * float(normal_cdf(math.sqrt(delta))))
    hr = 1 - 2 * math.exp(-1 / u) + float(hr_bivariate_cdf(u, u, delta / 2))
    z = (est - target) / se
    ok = ks.pvalue > 0.01 and abs(z) <= 3
    return ok, (f"exact BR, 200 fields 10x10: pooled KS p={ks.pvalue:.4g} (>0.01); P(both>5, h=(1,0)) "
                f"MC={est:.4f} se={se:.4f} target={target:.4f} z={z:.2f} (|z|<=3); "
                f"Husler-Reiss value for this simulator={hr:.4f}")


def criterion_11():
    pairs = [(50, 20), (100, 40)]
    scaled = [float(np.std(mma_study(0.5, n, m), ddof=1)) * n / math.sqrt(m) for n, m in pairs]
    ratio = max(scaled) / min(scaled)
    return ratio <= 2, (f"MMA phi0=0.5 std*n/sqrt(m): (50,20)={scaled[0]:.4f} (100,40)={scaled[1]:.4f} "
                        f"ratio={ratio:.3f} (<=2)")


def criterion_12():
    grid = [0.5, 0.8, 1.3, 2.0, 3.5]
    worst = 0.0
    for delta in (0.25, 1.0, 4.0):
        for x in grid:
            for y in grid:
                e = 1e-4 * min(x, y)
                fd = (hr_bivariate_cdf(x + e, y + e, delta) - hr_bivariate_cdf(x + e, y - e, delta)
                      - hr_bivariate_cdf(x - e, y + e, delta) + hr_bivariate_cdf(x - e, y - e, delta)) / (4 * e * e)
                worst = max(worst, abs(fd / hr_bivariate_density(x, y, delta) - 1))
    return worst < 1e-4, f"closed-form pair density vs mixed central difference, 5x5 grid, 3 deltas: max rel err={worst:.2e} (<1e-4)"


CRITERIA = {
    "C1 truncated BR Whittle bands": criterion_1,
    "C2 exact BR Whittle bands": criterion_2,
    "C3 pairwise vs Whittle direction": criterion_3,
    "C4 MMA recovery": criterion_4,
    "C5 periodogram FFT oracle": criterion_5,
    "C6 periodogram/extremogram identity": criterion_6,
    "C7 geometric-mean normalisation": criterion_7,
    "C8 extremogram consistency": criterion_8,
    "C9 BR spectral positivity": criterion_9,
    "C10 exact simulator distribution": criterion_10,
    "C11 MMA dispersion rate": criterion_11,
    "C12 pair density oracle": criterion_12,
}


# -- pytest entry points ----------------------------------------------------------

def _run(report, label):
    ok, detail = CRITERIA[label]()
    report(ok, label, detail)


@pytest.mark.slow
def test_c01_truncated_br_whittle_bands(report):
    _run(report, "C1 truncated BR Whittle bands")


@pytest.mark.slow
def test_c02_exact_br_whittle_bands(report):
    _run(report, "C2 exact BR Whittle bands")


@pytest.mark.slow
def test_c03_pairwise_versus_whittle(report):
    _run(report, "C3 pairwise vs Whittle direction")


@pytest.mark.slow
def test_c04_mma_recovery(report):
    _run(report, "C4 MMA recovery")


def test_c05_periodogram_fft_oracle(report):
    _run(report, "C5 periodogram FFT oracle")


def test_c06_periodogram_extremogram_identity(report):
    _run(report, "C6 periodogram/extremogram identity")


def test_c07_geometric_mean_normalisation(report):
    _run(report, "C7 geometric-mean normalisation")


@pytest.mark.slow
def test_c08_extremogram_consistency(report):
    _run(report, "C8 extremogram consistency")


def test_c09_br_spectral_positivity(report):
    _run(report, "C9 BR spectral positivity")


@pytest.mark.slow
def test_c10_exact_simulator_distribution(report):
    _run(report, "C10 exact simulator distribution")


@pytest.mark.slow
def test_c11_mma_dispersion_rate(report):
    _run(report, "C11 MMA dispersion rate")


def test_c12_pair_density_oracle(report):
    _run(report, "C12 pair density oracle")


if __name__ == "__main__":
    failed = 0
    for label, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(_line(ok, label, detail), flush=True)
    sys.exit(1 if failed else 0)
