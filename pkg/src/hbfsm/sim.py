"""Monte Carlo engine for BER sweeps, scheme comparisons, rate curves and
quantization studies.

Random streams are keyed ``(seed, purpose, snr_index, frame)``; a frame is one
channel realization held for ``frame_length`` channel uses. Frames are
processed in fixed blocks, and block results are reduced in block order with
integer arithmetic, so the outcome does not depend on how many worker
processes computed the blocks.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .baseline import draw_baseline_cross, estimate_baseline_beta
from .channel import channel_matrix, draw_paths
from .codebook import build_array_response_codebook, build_beamsteering_codebook, quantization_error_study
from .config import ExperimentConfig, Study
from .numerics import RandomStream
from .rate import RatePoint, gm_entropy, mixture_from_link, noise_entropy, rate_point
from .txrx import LinkDesign, build_constellation, design_links, estimate_beta, indices_to_bits, ml_detect, transmit

__all__ = [
    "PointResult",
    "CurveResult",
    "Comparison",
    "RateResult",
    "BER_COLUMNS",
    "RATE_COLUMNS",
    "curve_beta",
    "simulate_block",
    "run_ber_experiment",
    "snr_at_ber",
    "run_comparison",
    "run_rate_experiment",
    "run_quantization",
]

log = logging.getLogger(__name__)

BETA_STREAM, TRIAL_STREAM, RATE_STREAM, QUANT_STREAM = 0, 1, 2, 3

BER_COLUMNS = ["snr_db", "ber", "ber_spatial", "ber_symbol", "bits", "errors", "stderr", "degenerate"]
RATE_COLUMNS = ["snr_db", "exact", "lower", "upper"]


@dataclass
class PointResult:
    snr_db: float
    frames: int = 0
    uses: int = 0
    bits_spatial: int = 0
    bits_symbol: int = 0
    errors_spatial: int = 0
    errors_symbol: int = 0
    degenerate: int = 0
    # sum of squared per-frame error counts, for the batch-means standard error
    sq_errors: int = 0

    @property
    def bits(self) -> int:
        return self.bits_spatial + self.bits_symbol

    @property
    def errors(self) -> int:
        return self.errors_spatial + self.errors_symbol

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")

    @property
    def ber_spatial(self) -> float:
        return self.errors_spatial / self.bits_spatial if self.bits_spatial else float("nan")

    @property
    def ber_symbol(self) -> float:
        return self.errors_symbol / self.bits_symbol if self.bits_symbol else float("nan")

    @property
    def stderr(self) -> float:
        """Standard error of the BER from frame-level batch means."""
        n = self.frames
        if n < 2:
            return float("nan")
        per_frame_bits = self.bits / n
        mean = self.errors / n
        var = max(self.sq_errors / n - mean * mean, 0.0) * n / (n - 1)
        return math.sqrt(var / n) / per_frame_bits

    def add(self, counts: dict) -> None:
        for key, value in counts.items():
            setattr(self, key, getattr(self, key) + value)

    def row(self) -> dict:
        return {"snr_db": self.snr_db, "ber": self.ber, "ber_spatial": self.ber_spatial,
                "ber_symbol": self.ber_symbol, "bits": self.bits, "errors": self.errors,
                "stderr": self.stderr, "degenerate": self.degenerate}


@dataclass
class CurveResult:
    config: ExperimentConfig
    beta: float
    points: list[PointResult] = field(default_factory=list)

    @property
    def label(self) -> str:
        return self.config.label

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    def rows(self) -> list[dict]:
        return [p.row() for p in self.points]

    def metadata(self) -> dict:
        return {"label": self.label, "config_hash": self.config.digest(), "seed": self.config.seed,
                "beta": self.beta, "config": self.config.as_dict(),
                "degenerate_total": sum(p.degenerate for p in self.points)}


@lru_cache(maxsize=16)
def _steering(bits: int, n_t: int, convention: str):
    return build_beamsteering_codebook(bits, n_t, convention)


def curve_beta(cfg: ExperimentConfig) -> float:
    """Power normalization for the curve, estimated once from its own stream."""
    stream = RandomStream(cfg.seed, (BETA_STREAM,))
    if cfg.scheme == "classical_sm":
        return estimate_baseline_beta(cfg.baseline, cfg.beta_realizations, stream)
    return estimate_beta(cfg.link, cfg.beta_realizations, stream)


def _block_design(cfg: ExperimentConfig, rngs) -> LinkDesign:
    if cfg.scheme == "classical_sm":
        cross = np.stack([draw_baseline_cross(cfg.baseline, rng, 1)[0] for rng in rngs])
        return LinkDesign.from_cross(cross)
    sets = [draw_paths(rng, (cfg.n_a, cfg.k), cfg.n_paths) for rng in rngs]
    paths = type(sets[0])(*(np.stack([getattr(p, f) for p in sets]) for f in ("gains", "aod", "aoa")))
    H = channel_matrix(paths, cfg.n_t, cfg.n_r)
    if cfg.codebook == "array_response":
        cb = build_array_response_codebook(paths, cfg.n_t)
    else:
        cb = _steering(cfg.bits, cfg.n_t, cfg.convention)
    return design_links(H, cb)


def simulate_block(cfg: ExperimentConfig, beta: float, snr_index: int, frame_start: int,
                   frame_stop: int, zero_noise: bool = False) -> dict:
    """Run frames ``[frame_start, frame_stop)`` of one SNR point; integer counts only."""
    ports = cfg.n_t if cfg.scheme == "classical_sm" else cfg.n_a
    uses, k = cfg.frame_length, cfg.k
    const = build_constellation(cfg.order)
    rngs = [RandomStream(cfg.seed, (TRIAL_STREAM, snr_index, f)).generator()
            for f in range(frame_start, frame_stop)]
    design = _block_design(cfg, rngs).with_beta(beta)
    sel = np.stack([rng.integers(0, ports, (uses, k)) for rng in rngs])
    lab = np.stack([rng.integers(0, cfg.order, (uses, k)) for rng in rngs])
    noise = np.stack([rng.standard_normal((uses, k, cfg.n_r, 2)) for rng in rngs])
    noise = (noise[..., 0] + 1j * noise[..., 1]) * np.sqrt(0.5)

    noise_var = 0.0 if zero_noise else cfg.noise_var
    rho = 10 ** (cfg.snr_db[snr_index] / 10) * cfg.noise_var
    r, degenerate = transmit(design, sel, const.points[lab], rho, noise_var, noise=noise)
    a_hat, m_hat = ml_detect(r, design.W[:, None], beta, const, rho / k)

    sp_bits, sym_bits = int(math.log2(ports)), const.bits_per_symbol
    sp_err = np.sum(indices_to_bits(a_hat, sp_bits) != indices_to_bits(sel, sp_bits), axis=(1, 2, 3))
    sym_err = np.sum(indices_to_bits(m_hat, sym_bits) != indices_to_bits(lab, sym_bits), axis=(1, 2, 3))
    per_frame = (sp_err + sym_err).astype(np.int64)
    n = frame_stop - frame_start
    return {"frames": n, "uses": n * uses,
            "bits_spatial": n * uses * k * sp_bits, "bits_symbol": n * uses * k * sym_bits,
            "errors_spatial": int(sp_err.sum()), "errors_symbol": int(sym_err.sum()),
            "degenerate": int(degenerate.sum()), "sq_errors": int(np.sum(per_frame**2))}


def _blocks(cfg: ExperimentConfig, index: int) -> list[tuple[int, int]]:
    n_frames = -(-cfg.trials_at(index) // cfg.frame_length)
    step = cfg.block_frames
    return [(s, min(s + step, n_frames)) for s in range(0, n_frames, step)]


def _done(cfg: ExperimentConfig, point: PointResult) -> bool:
    return cfg.early_stop and point.errors >= cfg.min_errors and point.uses >= cfg.min_trials


def run_ber_experiment(cfg: ExperimentConfig, workers: int = 1, beta: float | None = None,
                       zero_noise: bool = False, executor: Executor | None = None) -> CurveResult:
    """BER versus SNR for one curve.

    Blocks are dispatched in waves of ``workers`` and folded in order; with
    early stopping, the first block boundary meeting the error/trial targets
    ends the point, whatever else the wave computed.
    """
    if beta is None:
        beta = curve_beta(cfg)
    result = CurveResult(cfg, float(beta))
    own = None
    if executor is None and workers > 1:
        executor = own = ProcessPoolExecutor(workers)
    try:
        for i, snr in enumerate(cfg.snr_db):
            point = PointResult(snr)
            blocks = _blocks(cfg, i)
            wave = max(1, workers)
            for w in range(0, len(blocks), wave):
                batch = blocks[w:w + wave]
                if executor is None:
                    outs = (simulate_block(cfg, beta, i, a, b, zero_noise) for a, b in batch)
                else:
                    outs = [executor.submit(simulate_block, cfg, beta, i, a, b, zero_noise)
                            for a, b in batch]
                    outs = (f.result() for f in outs)
                stop = False
                for counts in outs:
                    if stop:
                        continue
                    point.add(counts)
                    stop = _done(cfg, point)
                if stop:
                    break
            log.info("%s: %.1f dB  BER %.3e  (%d uses)", cfg.label, snr, point.ber, point.uses)
            result.points.append(point)
    finally:
        if own is not None:
            own.shutdown()
    return result


# -- comparison --------------------------------------------------------------------

def snr_at_ber(snr_db, ber, target: float) -> float | None:
    """SNR where the curve first falls to ``target`` (log-BER linear in dB).

    ``None`` when the curve never reaches the target, or starts below it.
    """
    snr_db = np.asarray(snr_db, float)
    ber = np.asarray(ber, float)
    for j in range(1, len(ber)):
        if ber[j - 1] > target >= ber[j]:
            lo = np.log10(ber[j - 1])
            hi = np.log10(max(ber[j], 1e-300))
            t = (lo - np.log10(target)) / (lo - hi)
            return float(snr_db[j - 1] + t * (snr_db[j] - snr_db[j - 1]))
    return None


@dataclass
class Comparison:
    reference: CurveResult
    other: CurveResult
    target_ber: float

    @property
    def snr_reference(self) -> float | None:
        return snr_at_ber(self.reference.snr_db, self.reference.ber, self.target_ber)

    @property
    def snr_other(self) -> float | None:
        return snr_at_ber(self.other.snr_db, self.other.ber, self.target_ber)

    @property
    def gain_db(self) -> float | None:
        """Horizontal gap; positive when ``other`` needs less SNR. ``None`` if unreachable."""
        a, b = self.snr_reference, self.snr_other
        return None if a is None or b is None else a - b

    def row(self) -> dict:
        return {"curve": self.other.label, "reference": self.reference.label,
                "target_ber": self.target_ber, "snr_reference": self.snr_reference,
                "snr_curve": self.snr_other, "gain_db": self.gain_db}


def run_comparison(cfg_other: ExperimentConfig, cfg_reference: ExperimentConfig,
                   target_ber: float = 1e-3, workers: int = 1) -> Comparison:
    if cfg_other.bits_per_use != cfg_reference.bits_per_use:
        raise ValueError("compared schemes must carry the same bits per channel use")
    ref = run_ber_experiment(cfg_reference, workers)
    other = ref if cfg_other == cfg_reference else run_ber_experiment(cfg_other, workers)
    return Comparison(ref, other, target_ber)


# -- rate ------------------------------------------------------------------------------

@dataclass
class RateResult:
    config: ExperimentConfig
    points: list[RatePoint]
    per_realization: np.ndarray  # (realizations, snr, 3): exact, lower, upper
    mc_check: list[dict]

    def rows(self) -> list[dict]:
        return [{"snr_db": p.snr_db, "exact": p.exact, "lower": p.lower, "upper": p.upper}
                for p in self.points]


def link_gains(cfg: ExperimentConfig, realizations: int, user: int = 0) -> np.ndarray:
    """``w_{j,u}^H H_{j,u} f_{j,u}`` for every array ``j``, one row per channel draw."""
    rngs = [RandomStream(cfg.seed, (RATE_STREAM, r)).generator() for r in range(realizations)]
    design = _block_design(cfg, rngs)
    own = design.cross[:, :, user, user, :]  # (R, n_a, n_r)
    return np.einsum("fra,far->fa", np.conj(design.W[:, user]), own)


def run_rate_experiment(cfg: ExperimentConfig, realizations: int = 100, user: int = 0,
                        grid: int = 256, mc_samples: int = 100_000) -> RateResult:
    """Exact rate and bounds per SNR, averaged over channel draws.

    The same draws serve every SNR point. The Monte Carlo cross-check runs on
    the first draw at every SNR point.
    """
    const = build_constellation(cfg.order)
    gains = link_gains(cfg, realizations, user)
    values = np.zeros((realizations, len(cfg.snr_db), 3))
    checks = []
    for s, snr in enumerate(cfg.snr_db):
        rho_user = 10 ** (snr / 10) * cfg.noise_var / cfg.k
        for r in range(realizations):
            gm = mixture_from_link(gains[r], const.points, rho_user, cfg.noise_var)
            p = rate_point(gm, snr, budget=grid)
            values[r, s] = (p.exact, p.lower, p.upper)
        gm = mixture_from_link(gains[0], const.points, rho_user, cfg.noise_var)
        hz = noise_entropy(cfg.noise_var)
        h_q = gm_entropy(gm, "quadrature", grid)
        h_mc, se = gm_entropy(gm, "monte_carlo", mc_samples,
                              RandomStream(cfg.seed, (RATE_STREAM, 10**6, s)), return_stderr=True)
        checks.append({"snr_db": snr, "quadrature": h_q - hz, "monte_carlo": h_mc - hz,
                       "stderr": se, "z": abs(h_q - h_mc) / se if se > 0 else 0.0})
    mean = values.mean(axis=0)
    points = [RatePoint(snr, *mean[s]) for s, snr in enumerate(cfg.snr_db)]
    return RateResult(cfg, points, values, checks)


def run_quantization(study: Study):
    q = study.quantization
    return quantization_error_study(q["n_t"], q["n_paths"], q["bits"], q["trials"],
                                    RandomStream(study.seed, (QUANT_STREAM,)),
                                    n_r=study.curves[0].n_r, convention=q["convention"])
