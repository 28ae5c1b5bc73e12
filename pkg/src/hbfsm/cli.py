"""Command line entry point.

Exit codes: 0 success, 1 I/O failure (unreadable config, unwritable output),
2 invalid configuration or usage.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import PRESETS, ConfigError, Study, load_study, preset_path
from .report import emit_outputs
from .sim import Comparison, curve_beta, run_ber_experiment, run_quantization, run_rate_experiment

EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2

# subcommand -> config kinds it accepts
ACCEPTS = {
    "ber": ("ber",),
    "compare": ("compare",),
    "rate": ("rate",),
    "quantization": ("quantization",),
    "beta": ("ber", "compare", "rate", "beta"),
}


def _snr_list(text: str) -> list[float]:
    """``"0,5,10"`` or an inclusive range ``"0:50:5"``."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(round((stop - start) / step))
            return [start + i * step for i in range(n + 1)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR grid {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbfsm", description="Hybrid-beamforming spatial modulation link simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ACCEPTS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("config", nargs="?", type=Path, help="TOML study file")
        src.add_argument("--preset", choices=PRESETS, help="shipped study")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--snr", type=_snr_list, help="SNR grid in dB: '0,5,10' or '0:50:5'")
        p.add_argument("--trials", type=int, help="channel uses per SNR point")
        p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--no-plot", action="store_true", help="skip the SVG figure")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def parse_and_validate(argv) -> tuple[argparse.Namespace, Study]:
    """Parse arguments and the referenced study (``ConfigError``/``OSError`` propagate)."""
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.snr is not None:
        overrides["snr_db"] = args.snr
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        overrides["trials"] = args.trials
        overrides["trials_high_snr"] = None
    if args.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    path = preset_path(args.preset) if args.preset else args.config
    study = load_study(path, overrides)
    if study.kind not in ACCEPTS[args.command]:
        raise ConfigError("kind", f"'{study.kind}' study cannot run under '{args.command}'")
    return args, study


def run(args: argparse.Namespace, study: Study):
    cmd = args.command
    if cmd == "ber":
        return [run_ber_experiment(c, args.workers) for c in study.curves]
    if cmd == "compare":
        curves = [run_ber_experiment(c, args.workers) for c in study.curves]
        by_label = {c.label: c for c in curves}
        ref = by_label[study.compare["reference"]]
        comps = [Comparison(ref, c, study.compare["target_ber"]) for c in curves if c is not ref]
        return {"curves": curves, "comparisons": comps}
    if cmd == "rate":
        opts = study.rate
        return run_rate_experiment(study.curves[0], opts["realizations"], opts["user"],
                                   opts["grid"], opts["mc_samples"])
    if cmd == "quantization":
        return run_quantization(study)
    return {c.label: curve_beta(c) for c in study.curves}


def _summary(cmd: str, result) -> str:
    if cmd == "compare":
        lines = []
        for c in result["comparisons"]:
            gain = "unreachable" if c.gain_db is None else f"{c.gain_db:.2f} dB"
            lines.append(f"{c.other.label} vs {c.reference.label} @ BER {c.target_ber:g}: {gain}")
        return "\n".join(lines)
    if cmd == "beta":
        return "\n".join(f"{k}: beta = {v:.6g}" for k, v in result.items())
    if cmd == "quantization":
        return f"fitted slope {result.fitted_slope:.4f} (reference {-1 / (result.n_t - 1):.4f})"
    return ""


def main(argv=None) -> int:
    try:
        args, study = parse_and_validate(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    except ConfigError as exc:
        print(f"hbfsm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"hbfsm: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    result = run(args, study)
    try:
        files = emit_outputs(args.command, result, args.out, study, plot=not args.no_plot)
    except OSError as exc:
        print(f"hbfsm: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    text = _summary(args.command, result)
    if text:
        print(text)
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
