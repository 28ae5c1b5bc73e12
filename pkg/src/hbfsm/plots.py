"""File-only figures for finished experiments (no display needed)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_ber", "plot_rate", "plot_quantization"]

# svg output stays byte-stable across runs: no date stamp, fixed id salt
_SAVE = {"metadata": {"Date": None}}
_STYLE = {"svg.hashsalt": "hbfsm", "svg.fonttype": "path"}


def _finish(fig, ax, path, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    with plt.rc_context(_STYLE):
        fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_ber(curves, path, target_ber: float | None = None) -> None:
    """Log-BER against SNR, one line per :class:`~hbfsm.sim.CurveResult`."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    markers = "osd^v<>ph*"
    for n, c in enumerate(curves):
        ber = np.where(c.ber > 0, c.ber, np.nan)
        ax.semilogy(c.snr_db, ber, marker=markers[n % len(markers)], ms=4, label=c.label)
    if target_ber is not None:
        ax.axhline(target_ber, color="k", ls=":", lw=0.8)
    _finish(fig, ax, path, "SNR [dB]", "BER")


def plot_rate(result, path) -> None:
    snr = [p.snr_db for p in result.points]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(snr, [p.exact for p in result.points], "k-", label="exact")
    ax.plot(snr, [p.lower for p in result.points], "b--", label="lower bound")
    ax.plot(snr, [p.upper for p in result.points], "r-.", label="upper bound")
    _finish(fig, ax, path, "SNR [dB]", "rate [bits/channel use]")


def plot_quantization(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.semilogy(report.bits, report.mean_dc2, "o-", label="mean $d_c^2$")
    ax.semilogy(report.bits, report.max_dc2, "s-", label="max $d_c^2$")
    ax.semilogy(report.bits, report.bound(report.bits), "k--",
                label=r"fitted $C\,2^{-B/(N_T-1)}$")
    _finish(fig, ax, path, "codebook resolution B [bits]", "squared chordal distance")
