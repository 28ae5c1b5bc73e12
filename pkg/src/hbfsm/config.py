"""Experiment descriptions and their TOML config files.

A config file holds one study: shared ``[link]`` dimensions, a ``[sweep]``
describing the SNR grid and Monte Carlo budget, and one ``[[curves]]`` table
per curve, each overriding link fields. The schema (every accepted key and
its default) is :data:`SCHEMA`; anything else is rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .baseline import BaselineConfig
from .txrx import LinkParams

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "Study",
    "SCHEMA",
    "PRESETS",
    "load_study",
    "parse_study",
    "preset_path",
]

KINDS = ("ber", "compare", "rate", "quantization", "beta")
PRESETS = ("fig2", "fig3", "fig4", "quantization")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    """One BER (or rate) curve."""

    label: str = "curve"
    scheme: str = "hbf_sm"
    k: int = 2
    n_a: int = 4
    n_t: int = 8
    n_r: int = 1
    n_paths: int = 1
    order: int = 4
    n_rf: int | None = None
    codebook: str = "array_response"
    bits: int | None = None
    convention: str = "sin"
    baseline_channel: str = "rayleigh"
    snr_db: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0)
    trials: int = 200_000
    trials_high_snr: int | None = None
    frame_length: int = 100
    block_frames: int = 25
    seed: int = 1
    beta_realizations: int = 10_000
    noise_var: float = 1.0
    early_stop: bool = True
    min_errors: int = 500
    min_trials: int = 10_000

    def __post_init__(self):
        validate(self)

    @property
    def link(self) -> LinkParams:
        return LinkParams(self.k, self.n_a, self.n_t, self.n_r, self.n_paths,
                          self.codebook, self.bits, self.convention)

    @property
    def baseline(self) -> BaselineConfig:
        return BaselineConfig(self.k, self.n_t, self.n_r, self.order,
                              self.baseline_channel, self.n_paths)

    @property
    def bits_per_use(self) -> int:
        ports = self.n_t if self.scheme == "classical_sm" else self.n_a
        return int(math.log2(ports)) + int(math.log2(self.order))

    def trials_at(self, index: int) -> int:
        """Channel-use budget of the ``index``-th SNR point."""
        if self.trials_high_snr is not None and index >= len(self.snr_db) - 2:
            return self.trials_high_snr
        return self.trials

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snr_db"] = list(self.snr_db)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _power_of_two(n: int) -> bool:
    return n >= 1 and not n & (n - 1)


def validate(cfg: ExperimentConfig) -> None:
    for name in ("k", "n_a", "n_t", "n_r", "n_paths", "trials", "frame_length",
                 "block_frames", "beta_realizations", "min_errors", "min_trials"):
        if getattr(cfg, name) < 1:
            raise ConfigError(name, "must be >= 1")
    if cfg.scheme not in ("hbf_sm", "classical_sm"):
        raise ConfigError("scheme", f"unknown scheme {cfg.scheme!r}")
    if not _power_of_two(cfg.n_a):
        raise ConfigError("n_a", f"must be a power of two (log2 n_a spatial bits), got {cfg.n_a}")
    if cfg.scheme == "classical_sm" and not _power_of_two(cfg.n_t):
        raise ConfigError("n_t", "classical SM selects an antenna, so n_t must be a power of two")
    if cfg.order not in (2, 4, 16, 64):
        raise ConfigError("order", "must be one of 2, 4, 16, 64")
    if cfg.codebook not in ("array_response", "beamsteering"):
        raise ConfigError("codebook", f"unknown codebook {cfg.codebook!r}")
    if cfg.codebook == "beamsteering" and cfg.scheme == "hbf_sm":
        if cfg.bits is None or not 1 <= cfg.bits <= 20:
            raise ConfigError("bits", "beamsteering codebook needs 1 <= bits <= 20")
    if cfg.convention not in ("sin", "raw"):
        raise ConfigError("convention", "must be 'sin' or 'raw'")
    if cfg.baseline_channel not in ("rayleigh", "geometric"):
        raise ConfigError("baseline_channel", "must be 'rayleigh' or 'geometric'")
    if cfg.n_rf is not None and cfg.n_rf < cfg.k:
        raise ConfigError("n_rf", "needs at least one RF chain per user (n_rf >= k)")
    if len(cfg.snr_db) == 0:
        raise ConfigError("snr_db", "empty SNR grid")
    if any(b <= a for a, b in zip(cfg.snr_db, cfg.snr_db[1:])):
        raise ConfigError("snr_db", "SNR grid must be strictly increasing")
    if cfg.trials_high_snr is not None and cfg.trials_high_snr < 1:
        raise ConfigError("trials_high_snr", "must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    if not cfg.noise_var > 0:
        raise ConfigError("noise_var", "must be positive")


# -- study files -------------------------------------------------------------------

_LINK_KEYS = {"scheme", "k", "n_a", "n_t", "n_r", "n_paths", "order", "n_rf", "codebook",
              "bits", "convention", "baseline_channel"}
_SWEEP_KEYS = {"snr_db", "trials", "trials_high_snr", "frame_length", "block_frames",
               "beta_realizations", "noise_var", "early_stop", "min_errors", "min_trials"}

SCHEMA = {
    "kind": "one of " + ", ".join(KINDS),
    "seed": "master seed (64-bit unsigned)",
    "link": {k: "link/dimension default for every curve" for k in sorted(_LINK_KEYS)},
    "sweep": {k: "Monte Carlo sweep setting" for k in sorted(_SWEEP_KEYS)},
    "curves": {"label": "curve name", **{k: "per-curve override" for k in sorted(_LINK_KEYS)}},
    "compare": {"reference": "label of the reference curve", "target_ber": "BER for the gain readout"},
    "rate": {"realizations": "channel draws averaged per SNR point", "user": "zero-based user",
             "grid": "quadrature grid per side (>= 256)", "mc_samples": "Monte Carlo check samples (>= 1e5)"},
    "quantization": {"n_t": "transmit antennas", "n_paths": "channel paths", "bits": "list of B values",
                     "trials": "channels per B", "convention": "'sin' or 'raw'"},
}

_INT_KEYS = {"k", "n_a", "n_t", "n_r", "n_paths", "order", "n_rf", "bits", "trials",
             "trials_high_snr", "frame_length", "block_frames", "beta_realizations",
             "min_errors", "min_trials", "seed", "realizations", "user", "grid", "mc_samples"}


@dataclass
class Study:
    """A parsed config file: what to run and the resolved curves."""

    kind: str
    seed: int
    curves: list[ExperimentConfig]
    compare: dict = field(default_factory=dict)
    rate: dict = field(default_factory=dict)
    quantization: dict = field(default_factory=dict)

    def curve(self, label: str) -> ExperimentConfig:
        for c in self.curves:
            if c.label == label:
                return c
        raise ConfigError("compare.reference", f"no curve labelled {label!r}")

    def as_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed,
                "curves": [c.as_dict() for c in self.curves],
                "compare": self.compare, "rate": self.rate, "quantization": self.quantization}


def _check_keys(table, allowed, path: str) -> None:
    if not isinstance(table, dict):
        raise ConfigError(path, "expected a table")
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")


def _typed(path: str, key: str, value):
    if key in _INT_KEYS and value is not None:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
    if key == "snr_db":
        if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(path, "expected a list of numbers")
        return tuple(float(v) for v in value)
    if key in ("noise_var", "target_ber"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if key == "early_stop" and not isinstance(value, bool):
        raise ConfigError(path, "expected true or false")
    return value


def parse_study(text: str, overrides: dict | None = None) -> Study:
    """Parse and validate a study file.

    ``overrides`` may carry ``seed``, ``snr_db``, ``trials`` (and any other
    sweep key); they replace file values for every curve.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML ({exc})") from None
    _check_keys(doc, {"kind", "seed", "link", "sweep", "curves", "compare", "rate",
                      "quantization"}, "")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
    seed = _typed("seed", "seed", doc.get("seed", 1))

    link = doc.get("link", {})
    _check_keys(link, _LINK_KEYS, "link")
    sweep = doc.get("sweep", {})
    _check_keys(sweep, _SWEEP_KEYS, "sweep")
    base = {k: _typed(f"link.{k}", k, v) for k, v in link.items()}
    base.update({k: _typed(f"sweep.{k}", k, v) for k, v in sweep.items()})
    overrides = dict(overrides or {})
    if "seed" in overrides:
        seed = overrides.pop("seed")
    for k, v in overrides.items():
        if k not in _SWEEP_KEYS:
            raise ConfigError(k, "cannot be overridden from the command line")
        base[k] = tuple(float(x) for x in v) if k == "snr_db" else v

    raw_curves = doc.get("curves", [{}])
    if not isinstance(raw_curves, list) or not raw_curves:
        raise ConfigError("curves", "expected a non-empty array of tables")
    curves, labels = [], set()
    for n, entry in enumerate(raw_curves):
        path = f"curves[{n}]"
        _check_keys(entry, _LINK_KEYS | {"label"}, path)
        values = dict(base)
        values.update({k: _typed(f"{path}.{k}", k, v) for k, v in entry.items()})
        values.setdefault("label", f"curve{n}")
        if values["label"] in labels:
            raise ConfigError(f"{path}.label", f"duplicate label {values['label']!r}")
        labels.add(values["label"])
        try:
            curves.append(ExperimentConfig(seed=seed, **values))
        except ConfigError as exc:
            prefix = "link" if exc.key in link and exc.key not in entry else path
            if exc.key in _SWEEP_KEYS or exc.key == "seed":
                prefix = "sweep" if exc.key != "seed" else ""
            key = f"{prefix}.{exc.key}" if prefix else exc.key
            raise ConfigError(key, str(exc).split(": ", 1)[1]) from None

    study = Study(kind, seed, curves)
    if kind == "compare":
        cmp_ = doc.get("compare", {})
        _check_keys(cmp_, {"reference", "target_ber"}, "compare")
        study.compare = {"reference": cmp_.get("reference", curves[0].label),
                         "target_ber": _typed("compare.target_ber", "target_ber",
                                              cmp_.get("target_ber", 1e-3))}
        ref = study.curve(study.compare["reference"])
        if not 0 < study.compare["target_ber"] < 0.5:
            raise ConfigError("compare.target_ber", "must lie in (0, 0.5)")
        for c in curves:
            if c.bits_per_use != ref.bits_per_use:
                raise ConfigError(f"curves.{c.label}",
                                  f"{c.bits_per_use} bits/use differs from reference ({ref.bits_per_use})")
    if kind == "rate":
        rate = doc.get("rate", {})
        _check_keys(rate, {"realizations", "user", "grid", "mc_samples"}, "rate")
        study.rate = {"realizations": 100, "user": 0, "grid": 256, "mc_samples": 100_000}
        study.rate.update({k: _typed(f"rate.{k}", k, v) for k, v in rate.items()})
        if study.rate["realizations"] < 1:
            raise ConfigError("rate.realizations", "must be >= 1")
        if not 0 <= study.rate["user"] < curves[0].k:
            raise ConfigError("rate.user", "outside 0..k-1")
        if study.rate["grid"] < 256:
            raise ConfigError("rate.grid", "must be >= 256")
        if study.rate["mc_samples"] < 100_000:
            raise ConfigError("rate.mc_samples", "must be >= 100000")
    if kind == "quantization":
        q = doc.get("quantization", {})
        _check_keys(q, {"n_t", "n_paths", "bits", "trials", "convention"}, "quantization")
        study.quantization = {"n_t": curves[0].n_t, "n_paths": curves[0].n_paths,
                              "bits": [4, 6, 8, 10, 12], "trials": 1000, "convention": "sin"}
        study.quantization.update(q)
        for key in ("n_t", "n_paths", "trials"):
            v = _typed(f"quantization.{key}", key, study.quantization[key])
            if v < 1:
                raise ConfigError(f"quantization.{key}", "must be >= 1")
        bits = study.quantization["bits"]
        if not isinstance(bits, list) or not bits or not all(
                isinstance(b, int) and 1 <= b <= 20 for b in bits):
            raise ConfigError("quantization.bits", "expected a list of integers in 1..20")
        if study.quantization["convention"] not in ("sin", "raw"):
            raise ConfigError("quantization.convention", "must be 'sin' or 'raw'")
    return study


def preset_path(name: str) -> Path:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return Path(str(resources.files("hbfsm") / "presets" / f"{name}.toml"))


def load_study(path, overrides: dict | None = None) -> Study:
    """Read a config file (``OSError`` propagates) and parse it."""
    return parse_study(Path(path).read_text(), overrides)
