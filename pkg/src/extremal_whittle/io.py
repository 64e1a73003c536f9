"""Readers and writers for fields, periodograms, extremograms and fit rows.

Field CSV layout::

    n,model,params,seed
    20,br-truncated,H=0.5;c=2.0;J=1000,7
    <n rows of n values>

Binary field layout (little endian): the 8-byte magic ``XFIELD01``, the side
``n`` as uint64, ``n*n`` float64 values in row-major order, then a uint64
length and that many bytes of UTF-8 JSON metadata.

Floats are written with 17 significant digits so that a round trip is exact.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .simulate import LatticeField

__all__ = [
    "FIT_COLUMNS",
    "format_float",
    "encode_params",
    "decode_params",
    "write_field",
    "read_field",
    "write_periodogram",
    "read_periodogram",
    "write_extremogram",
    "read_extremogram",
    "write_fit_rows",
    "read_fit_rows",
]

MAGIC = b"XFIELD01"
FIT_COLUMNS = ("replication", "estimator", "m", "theta_hat", "objective", "converged", "seconds")


def format_float(x) -> str:
    return format(float(x), ".17g")


def _scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def encode_params(params: dict) -> str:
    parts = []
    for k, v in params.items():
        if isinstance(v, float):
            v = repr(v)
        parts.append(f"{k}={v}")
    return ";".join(parts)


def decode_params(text: str) -> dict:
    out = {}
    for item in filter(None, text.split(";")):
        key, _, val = item.partition("=")
        out[key] = _scalar(val)
    return out


def write_field(fld: LatticeField, path, fmt: str | None = None) -> None:
    """Write ``fld`` as CSV, or binary when ``fmt == "binary"`` or the suffix is ``.bin``."""
    path = Path(path)
    fmt = fmt or ("binary" if path.suffix == ".bin" else "csv")
    if fmt == "binary":
        meta = json.dumps({"model": fld.model, "params": fld.params, "seed": fld.seed}).encode()
        with open(path, "wb") as fh:
            fh.write(MAGIC + struct.pack("<Q", fld.n))
            fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())
            fh.write(struct.pack("<Q", len(meta)) + meta)
        return
    if fmt != "csv":
        raise ValueError(f"unknown field format {fmt!r}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "model", "params", "seed"])
        w.writerow([fld.n, fld.model, encode_params(fld.params), "" if fld.seed is None else fld.seed])
        for row in fld.values:
            w.writerow([format_float(v) for v in row])


def read_field(path) -> LatticeField:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return _read_field_binary(path)
    return _read_field_csv(path)


def _read_field_binary(path: Path) -> LatticeField:
    data = path.read_bytes()
    (n,) = struct.unpack_from("<Q", data, 8)
    start = 16
    end = start + 8 * n * n
    if len(data) < end:
        raise ValueError(f"{path}: truncated binary field (expected {n}x{n} values)")
    values = np.frombuffer(data, dtype="<f8", count=n * n, offset=start).reshape(n, n).copy()
    meta = {}
    if len(data) >= end + 8:
        (size,) = struct.unpack_from("<Q", data, end)
        meta = json.loads(data[end + 8:end + 8 + size].decode())
    return LatticeField(values, meta.get("model", "unknown"), meta.get("params", {}), meta.get("seed"))


def _read_field_csv(path: Path) -> LatticeField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0][:4] != ["n", "model", "params", "seed"]:
        raise ValueError(f"{path}: missing field header 'n,model,params,seed'")
    n_text, model, params, seed = (rows[1] + [""] * 4)[:4]
    n = int(n_text)
    body = [r for r in rows[2:] if r]
    if len(body) != n or any(len(r) != n for r in body):
        raise ValueError(f"{path}: expected {n} rows of {n} values")
    values = np.array([[float(v) for v in r] for r in body])
    return LatticeField(values, model, decode_params(params), int(seed) if seed else None)


def write_periodogram(values: np.ndarray, path) -> None:
    """Rows ``j1,j2,lambda1,lambda2,value`` for j in {1..n}^2 (values in j-order)."""
    values = np.asarray(getattr(values, "values", values))
    n = values.shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j1", "j2", "lambda1", "lambda2", "value"])
        for j1 in range(1, n + 1):
            for j2 in range(1, n + 1):
                w.writerow([j1, j2, format_float(2 * np.pi * j1 / n), format_float(2 * np.pi * j2 / n),
                            format_float(values[j1 - 1, j2 - 1])])


def read_periodogram(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = max(int(r["j1"]) for r in rows)
    out = np.full((n, n), np.nan)
    for r in rows:
        out[int(r["j1"]) - 1, int(r["j2"]) - 1] = float(r["value"])
    return out


def write_extremogram(estimate, path) -> None:
    """Rows ``h1,h2,gamma_hat`` with the uncentered estimate."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h1", "h2", "gamma_hat"])
        for (h1, h2), v in zip(estimate.lags, estimate.values):
            w.writerow([int(h1), int(h2), format_float(v)])


def read_extremogram(path) -> dict:
    with open(path, newline="") as fh:
        return {(int(r["h1"]), int(r["h2"])): float(r["gamma_hat"]) for r in csv.DictReader(fh)}


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return v


def write_fit_rows(rows, path, extra_columns=()) -> None:
    cols = list(FIT_COLUMNS) + [c for c in extra_columns if c not in FIT_COLUMNS]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k, "")) for k in cols})


def read_fit_rows(path) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            row = dict(r)
            row["replication"] = int(row["replication"])
            row["m"] = int(row["m"])
            for k in ("theta_hat", "objective", "seconds"):
                row[k] = float(row[k]) if row[k] not in ("", None) else float("nan")
            row["converged"] = row["converged"] == "true"
            out.append(row)
    return out
