"""CSV, manifest and figure writers.

Floats are written with ``repr`` so a rerun with the same seed reproduces
files byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import re
from importlib import metadata
from pathlib import Path

import numpy as np

from . import plots
from .sim import BER_COLUMNS, RATE_COLUMNS

__all__ = ["slug", "write_csv", "read_csv", "versions", "write_manifest", "emit_outputs"]

GAIN_COLUMNS = ["curve", "reference", "target_ber", "snr_reference", "snr_curve", "gain_db"]
QUANT_COLUMNS = ["B", "mean_dc2", "max_dc2", "fitted_bound"]
MC_COLUMNS = ["snr_db", "quadrature", "monte_carlo", "stderr", "z"]


def slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_").lower() or "curve"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else repr(float(value))
    return str(value)


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("hbfsm", "artifact", "numpy", "scipy", "matplotlib"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            pass
    return out


def write_manifest(path, payload: dict) -> Path:
    path = Path(path)
    body = dict(payload)
    body["versions"] = versions()
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit_outputs(kind: str, result, out_dir, study=None, plot: bool = True) -> list[Path]:
    """Write everything a finished run produces into ``out_dir``.

    ``result`` depends on ``kind``: a list of curves (``ber``), a dict with
    ``curves`` and ``comparisons`` (``compare``), a rate result, a
    quantization report, or a ``{label: beta}`` dict.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    manifest = {"kind": kind, "study": study.as_dict() if study is not None else None}

    if kind in ("ber", "compare"):
        curves = result if kind == "ber" else result["curves"]
        for c in curves:
            files.append(write_csv(out / f"{slug(c.label)}.csv", BER_COLUMNS, c.rows()))
        manifest["curves"] = [c.metadata() for c in curves]
        target = None
        if kind == "compare":
            rows = [cmp_.row() for cmp_ in result["comparisons"]]
            files.append(write_csv(out / "gains.csv", GAIN_COLUMNS, rows))
            manifest["gains"] = rows
            target = result["comparisons"][0].target_ber if rows else None
        if plot:
            plots.plot_ber(curves, out / "ber.svg", target)
            files.append(out / "ber.svg")
    elif kind == "rate":
        files.append(write_csv(out / "rate.csv", RATE_COLUMNS, result.rows()))
        files.append(write_csv(out / "rate_mc_check.csv", MC_COLUMNS, result.mc_check))
        manifest["seed"] = result.config.seed
        manifest["config"] = result.config.as_dict()
        manifest["mc_check"] = result.mc_check
        if plot:
            plots.plot_rate(result, out / "rate.svg")
            files.append(out / "rate.svg")
    elif kind == "quantization":
        files.append(write_csv(out / "quantization.csv", QUANT_COLUMNS, result.rows()))
        manifest["seed"] = study.seed if study is not None else None
        manifest["fitted_slope"] = result.fitted_slope
        manifest["reference_slope"] = -1.0 / (result.n_t - 1)
        manifest["bound_constant"] = result.bound_constant
        if plot:
            plots.plot_quantization(result, out / "quantization.svg")
            files.append(out / "quantization.svg")
    elif kind == "beta":
        rows = [{"curve": k, "beta": v} for k, v in result.items()]
        files.append(write_csv(out / "beta.csv", ["curve", "beta"], rows))
        manifest["beta"] = dict(result)
    else:
        raise ValueError(f"unknown output kind {kind!r}")

    files.append(write_manifest(out / "manifest.json", manifest))
    return files
