"""Classical multi-user spatial modulation with dedicated antenna sub-groups.

User ``k`` owns antennas ``k*n_t .. (k+1)*n_t - 1`` of the base station; its
spatial bits pick one of them. Each antenna plays the role of a one-element
"array", so the link reuses :class:`~hbfsm.txrx.LinkDesign`: combiners come
from the user's own sub-group gains, the effective channel is rebuilt from
the active antennas every channel use, and the same ML detector applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import channel_matrix, draw_paths
from .numerics import RandomStream, as_generator
from .txrx import LinkDesign, _pinv_power, build_constellation, indices_to_bits, ml_detect, transmit

__all__ = ["BaselineConfig", "draw_baseline_cross", "draw_baseline_designs", "estimate_baseline_beta",
           "baseline_ber_trial"]


@dataclass(frozen=True)
class BaselineConfig:
    k: int
    n_t: int
    n_r: int
    order: int
    channel: str = "rayleigh"  # or "geometric"
    n_paths: int = 1

    def __post_init__(self):
        if self.n_t < 1 or self.n_t & (self.n_t - 1):
            raise ValueError("baseline n_t must be a power of two")
        if self.channel not in ("rayleigh", "geometric"):
            raise ValueError(f"unknown baseline channel {self.channel!r}")

    @property
    def bits_per_use(self) -> int:
        return int(np.log2(self.n_t)) + int(np.log2(self.order))


def draw_baseline_cross(cfg: BaselineConfig, rng: np.random.Generator, n_frames: int) -> np.ndarray:
    """``cross[f, a, j, i]`` is the channel from antenna ``a`` of group ``j`` to user ``i``."""
    shape = (n_frames, cfg.n_t, cfg.k, cfg.k)
    if cfg.channel == "rayleigh":
        z = rng.standard_normal(shape + (cfg.n_r, 2))
        cross = (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)
    else:
        # one n_t-antenna ULA per group; column a of each group channel
        paths = draw_paths(rng, (n_frames, cfg.k, cfg.k), cfg.n_paths)
        H = channel_matrix(paths, cfg.n_t, cfg.n_r)  # (F, j, i, n_r, n_t)
        cross = np.transpose(H, (0, 4, 1, 2, 3))
    return cross


def draw_baseline_designs(cfg: BaselineConfig, rng: np.random.Generator, n_frames: int,
                          beta: float = 1.0) -> LinkDesign:
    return LinkDesign.from_cross(draw_baseline_cross(cfg, rng, n_frames), beta)


def estimate_baseline_beta(cfg: BaselineConfig, n_realizations: int, stream,
                           chunk: int = 4096) -> float:
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    rng = as_generator(stream)
    total, done = 0.0, 0
    while done < n_realizations:
        n = min(chunk, n_realizations - done)
        design = draw_baseline_designs(cfg, rng, n)
        sel = rng.integers(0, cfg.n_t, (n, 1, cfg.k))
        total += float(np.sum(np.sqrt(cfg.k / _pinv_power(design.effective_channel(sel)))))
        done += n
    return total / n_realizations


def baseline_ber_trial(cfg: BaselineConfig, rho: float, noise_var: float,
                       stream: RandomStream | np.random.Generator, beta: float,
                       uses: int = 1) -> dict:
    """One channel realization held for ``uses`` channel uses.

    Returns integer error counts (``spatial``, ``symbol``), the number of
    bits sent and the number of degenerate precoder computations.
    """
    rng = as_generator(stream)
    design = draw_baseline_designs(cfg, rng, 1, beta)
    const = build_constellation(cfg.order)
    sel = rng.integers(0, cfg.n_t, (1, uses, cfg.k))
    lab = rng.integers(0, cfg.order, (1, uses, cfg.k))
    r, degenerate = transmit(design, sel, const.points[lab], rho, noise_var, rng)
    a_hat, m_hat = ml_detect(r, design.W[:, None], beta, const, rho / cfg.k)
    na_bits = int(np.log2(cfg.n_t))
    spatial = int(np.sum(indices_to_bits(a_hat, na_bits) != indices_to_bits(sel, na_bits)))
    symbol = int(np.sum(indices_to_bits(m_hat, const.bits_per_symbol)
                        != indices_to_bits(lab, const.bits_per_symbol)))
    return {"spatial": spatial, "symbol": symbol, "errors": spatial + symbol,
            "bits": uses * cfg.k * cfg.bits_per_use, "degenerate": int(degenerate.sum())}
