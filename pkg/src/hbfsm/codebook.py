"""Analog beamformer codebooks, codeword search, and quantization error."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import PathSet, channel_matrix, draw_paths, steering_vector
from .numerics import RandomStream

__all__ = [
    "Codebook",
    "QuantizationReport",
    "MAX_CODEBOOK_BITS",
    "build_array_response_codebook",
    "build_beamsteering_codebook",
    "select_beamformer",
    "chordal_distance_sq",
    "quantization_error_study",
]

MAX_CODEBOOK_BITS = 20


@dataclass
class Codebook:
    """Ordered set of unit-norm beamformers.

    ``vectors`` has shape ``(..., N, n_t)``. Array-response codebooks are
    built per channel, so they may carry leading batch axes; beamsteering
    codebooks are a single ``(2**B, n_t)`` table.
    """

    kind: str
    vectors: np.ndarray
    angles: np.ndarray
    bits: int | None = None
    convention: str = "sin"

    @property
    def size(self) -> int:
        return self.vectors.shape[-2]

    @property
    def n_t(self) -> int:
        return self.vectors.shape[-1]


def build_array_response_codebook(paths: PathSet, n_t: int) -> Codebook:
    """One codeword per path: the transmit response at that path's AoD."""
    if paths.n_paths < 1:
        raise ValueError("need at least one path")
    return Codebook("array_response", steering_vector(paths.aod, n_t), np.asarray(paths.aod))


def build_beamsteering_codebook(bits: int, n_t: int, convention: str = "sin") -> Codebook:
    """``2**bits`` codewords on the quantized angle grid ``2*pi*n/N``.

    ``convention="sin"`` gives codewords with the same functional form as the
    channel steering vectors (phase step ``pi*sin(angle)``); ``"raw"`` uses
    the grid angle itself as the phase step (``pi*angle``).
    """
    if bits < 1:
        raise ValueError("codebook resolution must be >= 1 bit")
    if bits > MAX_CODEBOOK_BITS:
        raise MemoryError(f"{bits}-bit codebook exceeds the {MAX_CODEBOOK_BITS}-bit search limit")
    n = 2**bits
    angles = 2 * np.pi * np.arange(n) / n
    if convention == "sin":
        vectors = steering_vector(angles, n_t)
    elif convention == "raw":
        vectors = np.exp(1j * np.pi * np.outer(angles, np.arange(n_t))) / np.sqrt(n_t)
    else:
        raise ValueError(f"unknown phase convention {convention!r}")
    return Codebook("beamsteering", vectors, angles, bits=bits, convention=convention)


def select_beamformer(H, cb: Codebook):
    """Exhaustive ``argmax_n ||H f_n||^2``; ties go to the lowest index.

    ``H`` is ``(..., n_r, n_t)``; the codebook broadcasts against its leading
    axes. Returns ``(index, f, gain)``.
    """
    H = np.asarray(H)
    if H.shape[-1] != cb.n_t:
        raise ValueError(f"channel has {H.shape[-1]} transmit antennas, codebook {cb.n_t}")
    if cb.size == 0:
        raise ValueError("empty codebook")
    if cb.vectors.ndim == 2 and H.ndim > 2:
        # shared table: bound the (batch, N, n_r) intermediate
        lead = H.shape[:-2]
        flat = H.reshape((-1,) + H.shape[-2:])
        step = max(1, _SEARCH_CHUNK // (cb.size * H.shape[-2]))
        parts = [_search(flat[s:s + step], cb.vectors) for s in range(0, len(flat), step)]
        index, gain = (np.concatenate(x).reshape(lead) for x in zip(*parts))
        return index, cb.vectors[index], gain
    index, gain = _search(H, cb.vectors)
    vectors = np.broadcast_to(cb.vectors, index.shape + cb.vectors.shape[-2:])
    f = np.take_along_axis(vectors, index[..., None, None], axis=-2)[..., 0, :]
    return index, f, gain


_SEARCH_CHUNK = 1 << 22


def _search(H, vectors):
    # (..., N, n_r): every codeword pushed through the channel
    y = np.einsum("...rt,...nt->...nr", H, vectors)
    gains = np.sum(y.real**2 + y.imag**2, axis=-1)
    index = np.argmax(gains, axis=-1)
    return index, np.take_along_axis(gains, index[..., None], axis=-1)[..., 0]


def chordal_distance_sq(f, g, atol: float = 1e-6):
    """Squared chordal distance ``1 - |f^H g|^2`` between unit-norm vectors."""
    f = np.asarray(f)
    g = np.asarray(g)
    for v in (f, g):
        if np.any(np.abs(np.linalg.norm(v, axis=-1) - 1.0) > atol):
            raise ValueError("chordal distance needs unit-norm vectors")
    ip = np.sum(np.conj(f) * g, axis=-1)
    return np.clip(1.0 - np.abs(ip) ** 2, 0.0, 1.0)


@dataclass
class QuantizationReport:
    n_t: int
    n_paths: int
    bits: list[int]
    dc2: dict[int, np.ndarray] = field(repr=False)
    mean_dc2: list[float]
    max_dc2: list[float]
    bound_constant: float
    fitted_slope: float

    def bound(self, bits) -> np.ndarray:
        """Fitted envelope ``C * 2**(-B/(n_t-1))``."""
        return self.bound_constant * 2.0 ** (-np.asarray(bits, float) / (self.n_t - 1))

    def rows(self) -> list[dict]:
        bound = self.bound(self.bits)
        return [{"B": b, "mean_dc2": m, "max_dc2": x, "fitted_bound": float(c)}
                for b, m, x, c in zip(self.bits, self.mean_dc2, self.max_dc2, bound)]


def quantization_error_study(n_t: int, n_paths: int, bits_list, trials: int,
                             stream: RandomStream, n_r: int = 1,
                             convention: str = "sin") -> QuantizationReport:
    """Chordal distance between the array-response and beamsteering picks.

    The same ``trials`` channels are reused for every resolution so the
    curves are directly comparable. ``fitted_slope`` is the least-squares
    slope of ``log2(mean d_c^2)`` against ``B``; ``bound_constant`` is the
    smallest ``C`` for which ``C * 2**(-B/(n_t-1))`` covers every per-B max.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    bits_list = [int(b) for b in bits_list]
    paths = draw_paths(stream.generator(), (trials,), n_paths)
    H = channel_matrix(paths, n_t, n_r)
    _, f_a, _ = select_beamformer(H, build_array_response_codebook(paths, n_t))
    dc2, means, maxes = {}, [], []
    for b in bits_list:
        _, f_b, _ = select_beamformer(H, build_beamsteering_codebook(b, n_t, convention))
        d = chordal_distance_sq(f_a, f_b)
        dc2[b] = d
        means.append(float(d.mean()))
        maxes.append(float(d.max()))
    b_arr = np.asarray(bits_list, float)
    with np.errstate(divide="ignore"):
        log_mean = np.log2(np.maximum(means, np.finfo(float).tiny))
    slope = float(np.polyfit(b_arr, log_mean, 1)[0]) if len(bits_list) > 1 else float("nan")
    constant = float(np.max(np.asarray(maxes) * 2.0 ** (b_arr / (n_t - 1))))
    return QuantizationReport(n_t, n_paths, bits_list, dc2, means, maxes, constant, slope)
