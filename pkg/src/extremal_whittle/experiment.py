"""Replication driver: simulate, threshold, estimate and summarise.

Replication ``r`` draws all randomness from ``derive_stream(seed, r)``, so
raw estimates do not depend on the number of workers or on scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .io import format_float, write_fit_rows
from .models import get_family
from .simulate import simulate
from .stats import derive_stream
from .whittle import check_family_positivity, pairwise_estimate, whittle_estimate

__all__ = [
    "ExperimentConfig",
    "Summary",
    "ReplicationSummary",
    "summarize",
    "boxplot_stats",
    "run_replication",
    "run_experiment",
    "write_outputs",
]

MODELS = ("mma", "br-truncated", "br-exact")
ESTIMATORS = ("whittle", "pairwise")
FAMILIES = ("br", "brown-resnick", "mma", "mma-diamond")  # one fitted coordinate per row


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description; every key maps to a JSON scalar or list.

    ``bounds`` may be omitted to use the family default.  Model keys that do
    not apply to the chosen simulator are ignored.
    """

    model: str = "br-truncated"
    n: int = 20
    replications: int = 50
    m_values: tuple = (3, 5)
    estimators: tuple = ("whittle",)
    family: str = "br"
    bounds: tuple | None = None
    seed: int = 0
    # simulator parameters
    phi: float = 0.5
    k0: int = 5
    H: float = 0.5
    c: float = 2.0
    variogram: str = "isotropic-fbm"
    J: int = 1000
    # fitting parameters
    fit_c: float = 2.0
    fit_k0: int | None = None
    d_max: float = 2.0
    tol: float = 1e-4
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.bounds is not None:
            object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.n < 4:
            raise ValueError("n must be >= 4")
        if not self.m_values or any(m < 2 for m in self.m_values):
            raise ValueError("every m must be >= 2")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad or not self.estimators:
            raise ValueError(f"estimators must be a nonempty subset of {ESTIMATORS}")
        if self.bounds is not None and not (len(self.bounds) == 2 and self.bounds[0] < self.bounds[1]):
            raise ValueError("bounds must be [lo, hi] with lo < hi")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("m_values", "estimators", "bounds"):
            if out[k] is not None:
                out[k] = list(out[k])
        return out

    def fit_family(self):
        if self.family in ("mma", "mma-diamond"):
            return get_family("mma", k0=self.k0 if self.fit_k0 is None else self.fit_k0)
        return get_family(self.family, c=self.fit_c)

    def fit_bounds(self) -> tuple:
        return self.bounds if self.bounds is not None else tuple(self.fit_family().default_bounds)


@dataclass(frozen=True)
class Summary:
    mean: float
    median: float
    std: float
    count: int
    std_defined: bool = True


def summarize(values) -> Summary:
    """Mean, lower median and sample (n - 1) standard deviation.

    A single value has no sample deviation: ``std`` is reported as 0 with
    ``std_defined`` False.
    """
    v = np.sort(np.asarray(list(values), dtype=float))
    if v.size == 0:
        raise ValueError("cannot summarise an empty set of estimates")
    median = float(v[(v.size - 1) // 2])
    if v.size == 1:
        return Summary(float(v[0]), median, 0.0, 1, False)
    return Summary(float(np.mean(v)), median, float(np.std(v, ddof=1)), int(v.size))


def boxplot_stats(values) -> dict:
    """Quartiles (linear interpolation), Tukey 1.5 IQR whiskers and outliers."""
    v = np.sort(np.asarray(list(values), dtype=float))
    if v.size == 0:
        raise ValueError("cannot summarise an empty set of estimates")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    return {
        "min": float(v[0]), "q1": float(q1), "median": float(med), "q3": float(q3), "max": float(v[-1]),
        "whisker_low": float(inside[0]), "whisker_high": float(inside[-1]),
        "outliers": [float(x) for x in v[(v < lo_fence) | (v > hi_fence)]],
    }


def _fail_row(r, est, m, err) -> dict:
    return {"replication": r, "estimator": est, "m": m, "theta_hat": math.nan, "objective": math.nan,
            "converged": False, "seconds": math.nan, "flag": "", "failed": True,
            "error": f"{type(err).__name__}: {err}"}


def run_replication(config: ExperimentConfig, r: int) -> list[dict]:
    """All fit rows for replication ``r``; errors become rows with ``failed`` set."""
    stream = derive_stream(config.seed, r)
    plan = [("whittle", m) for m in config.m_values if "whittle" in config.estimators]
    if "pairwise" in config.estimators:
        plan.append(("pairwise", 0))  # m = 0: the pairwise likelihood uses no threshold
    try:
        fld = simulate(config.model, config.n, stream, phi=config.phi, k0=config.k0, H=config.H,
                       c=config.c, variogram=config.variogram, J=config.J)
    except Exception as err:
        return [_fail_row(r, est, m, err) for est, m in plan]
    family = config.fit_family()
    bounds = config.fit_bounds()
    rows = []
    for est, m in plan:
        t0 = time.perf_counter()
        try:
            if est == "whittle":
                fit = whittle_estimate(fld, m, family, bounds, config.tol, check_positivity=False)
                objective = fit.objective
            else:
                fit = pairwise_estimate(fld, family, bounds, config.d_max, config.tol)
                objective = -fit.loglik
        except Exception as err:
            rows.append(_fail_row(r, est, m, err))
            continue
        rows.append({"replication": r, "estimator": est, "m": m, "theta_hat": float(fit.theta_hat),
                     "objective": float(objective), "converged": bool(fit.converged),
                     "seconds": time.perf_counter() - t0, "flag": fit.flag, "failed": False, "error": ""})
    return rows


@dataclass
class ReplicationSummary:
    config: ExperimentConfig
    rows: list = field(default_factory=list)

    def groups(self) -> list[tuple[str, int]]:
        seen = []
        for row in self.rows:
            key = (row["estimator"], row["m"])
            if key not in seen:
                seen.append(key)
        return seen

    def estimates(self, estimator: str, m: int) -> np.ndarray:
        return np.array([r["theta_hat"] for r in self.rows
                         if r["estimator"] == estimator and r["m"] == m and not r["failed"]])

    def table(self) -> list[dict]:
        out = []
        for est, m in self.groups():
            sel = [r for r in self.rows if r["estimator"] == est and r["m"] == m]
            ok = [r for r in sel if not r["failed"]]
            rec = {"estimator": est, "m": m, "count": len(ok), "failures": len(sel) - len(ok),
                   "boundary": sum(r["flag"] == "boundary solution" for r in ok)}
            if ok:
                s = summarize(r["theta_hat"] for r in ok)
                rec.update(mean=s.mean, median=s.median, std=s.std, std_defined=s.std_defined,
                           mean_seconds=float(np.mean([r["seconds"] for r in ok])))
            else:
                rec.update(mean=math.nan, median=math.nan, std=math.nan, std_defined=False,
                           mean_seconds=math.nan)
            out.append(rec)
        return out

    def lookup(self, estimator: str, m: int) -> dict:
        for rec in self.table():
            if rec["estimator"] == estimator and rec["m"] == m:
                return rec
        raise KeyError((estimator, m))


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ReplicationSummary:
    """Run every replication (in parallel when ``workers > 1``) and collect the rows."""
    check_family_positivity(config.fit_family(), config.fit_bounds())
    workers = config.workers if workers is None else int(workers)
    reps = range(config.replications)
    if workers == 1:
        chunks = [run_replication(config, r) for r in reps]
    else:
        chunks = Parallel(n_jobs=workers)(delayed(run_replication)(config, r) for r in reps)
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda row: (row["replication"], row["estimator"] != "whittle", row["m"]))
    return ReplicationSummary(config, rows)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return v


def write_outputs(summary: ReplicationSummary, out_dir) -> Path:
    """raw.csv, summary.csv, boxplot.csv and metadata.json under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_fit_rows(summary.rows, out / "raw.csv", extra_columns=("flag", "failed", "error"))
    table = summary.table()
    cols = ["estimator", "m", "count", "failures", "boundary", "mean", "median", "std",
            "std_defined", "mean_seconds"]
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for rec in table:
            w.writerow([_fmt(rec[c]) for c in cols])
    with open(out / "boxplot.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["estimator", "m", "min", "q1", "median", "q3", "max",
                    "whisker_low", "whisker_high", "outliers"])
        for est, m in summary.groups():
            vals = summary.estimates(est, m)
            if vals.size == 0:
                continue
            b = boxplot_stats(vals)
            w.writerow([est, m] + [_fmt(b[k]) for k in ("min", "q1", "median", "q3", "max",
                                                        "whisker_low", "whisker_high")]
                       + [";".join(format_float(x) for x in b["outliers"])])
    cfg = summary.config
    meta = {
        "config": cfg.to_dict(),
        "variogram_mode": cfg.variogram if cfg.model.startswith("br") else None,
        "replications": cfg.replications,
        "failures": sum(r["failed"] for r in summary.rows),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    with open(out / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return out
