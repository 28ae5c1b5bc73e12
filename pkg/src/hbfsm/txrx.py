"""Link construction, spatial-modulation mapping, transmission and ML detection.

Indexing conventions used throughout the batched arrays:

* ``cross[..., a, j, i, :]`` is ``H_{a,i} f_{a,j}``: the ``n_r`` response at
  user ``i`` when array ``a`` points the beam it uses for user ``j``.
* ``W[..., i, :, a]`` is the combiner ``w_{a,i}``, so ``W[..., i]`` is
  ``W_i = (H_i^+)^H``.
* ``sel[..., k]`` is the (zero-based) array chosen by user ``k``'s spatial bits.

All array/AA indices are zero-based internally; :func:`sm_map` and
:func:`sm_unmap` speak one-based array indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ScenarioChannels, channel_matrix, draw_paths
from .codebook import (
    Codebook,
    build_array_response_codebook,
    build_beamsteering_codebook,
    select_beamformer,
)
from .numerics import RandomStream, as_generator, pseudo_inverse

__all__ = [
    "DEGENERATE_CONDITION",
    "Constellation",
    "SMSymbol",
    "LinkParams",
    "LinkDesign",
    "build_constellation",
    "sm_map",
    "sm_unmap",
    "bits_to_indices",
    "indices_to_bits",
    "design_link",
    "design_links",
    "draw_designs",
    "zf_precoder",
    "beta_from_effective_channels",
    "estimate_beta",
    "transmit",
    "ml_detect",
]

DEGENERATE_CONDITION = 1e12


# -- constellation -----------------------------------------------------------

def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


@dataclass(frozen=True)
class Constellation:
    """``points[m]`` is the symbol carrying label ``m`` (MSB-first bits of ``m``)."""

    points: np.ndarray

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    def labels(self) -> np.ndarray:
        """Bit table, shape ``(M, log2 M)``."""
        return indices_to_bits(np.arange(self.order), self.bits_per_symbol)


def build_constellation(order: int) -> Constellation:
    """BPSK for ``order=2``, otherwise Gray-coded square QAM with unit average energy."""
    if order == 2:
        return Constellation(np.array([1.0 + 0j, -1.0 + 0j]))
    if order not in (4, 16, 64):
        raise ValueError(f"unsupported constellation size {order}; use 2, 4, 16 or 64")
    q = int(np.log2(order)) // 2
    side = 2**q
    labels = np.arange(order)
    hi, lo = labels >> q, labels & (side - 1)
    # inverse Gray: position of each label along the PAM axis
    pos = np.empty(side, int)
    pos[_gray(np.arange(side))] = np.arange(side)
    level = 2 * pos - (side - 1)
    pts = level[hi] + 1j * level[lo]
    return Constellation(pts / np.sqrt(2 * (order - 1) / 3))


# -- spatial modulation mapping -----------------------------------------------

def indices_to_bits(values, width: int) -> np.ndarray:
    """MSB-first bit expansion; appends an axis of length ``width``."""
    values = np.asarray(values)
    shifts = np.arange(width - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.int8)


def bits_to_indices(bits, n_a: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Split ``(..., log2 n_a + log2 M)`` bit rows into zero-based array and label indices."""
    bits = np.asarray(bits)
    na_bits, m_bits = _log2_exact(n_a, "n_a"), _log2_exact(order, "M")
    if bits.shape[-1] != na_bits + m_bits:
        raise ValueError(f"expected {na_bits + m_bits} bits, got {bits.shape[-1]}")
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    word = np.sum(bits.astype(np.int64) * weights, axis=-1)
    return word >> m_bits, word & (order - 1)


def _log2_exact(n: int, name: str) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"{name} must be a power of two, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class SMSymbol:
    array: int  # one-based
    label: int
    symbol: complex


def sm_map(bits, n_a: int, constellation: Constellation) -> SMSymbol:
    """First ``log2 n_a`` bits pick the array, the rest pick the symbol."""
    a, m = bits_to_indices(np.asarray(bits).reshape(-1), n_a, constellation.order)
    return SMSymbol(int(a) + 1, int(m), complex(constellation.points[m]))


def sm_unmap(array: int, label: int, n_a: int, constellation: Constellation) -> np.ndarray:
    if not 1 <= array <= n_a:
        raise ValueError(f"array index {array} outside 1..{n_a}")
    if not 0 <= label < constellation.order:
        raise ValueError(f"label {label} outside constellation")
    return np.concatenate([indices_to_bits(array - 1, _log2_exact(n_a, "n_a")),
                           indices_to_bits(label, constellation.bits_per_symbol)])


# -- link design ----------------------------------------------------------------

@dataclass(frozen=True)
class LinkParams:
    """Dimensions and codebook choice for one HBF-SM link."""

    k: int
    n_a: int
    n_t: int
    n_r: int
    n_paths: int
    codebook: str = "array_response"  # or "beamsteering"
    bits: int | None = None
    convention: str = "sin"

    def beamsteering(self) -> Codebook | None:
        if self.codebook == "array_response":
            return None
        if self.codebook != "beamsteering" or self.bits is None:
            raise ValueError("beamsteering codebook needs a bit resolution")
        return build_beamsteering_codebook(self.bits, self.n_t, self.convention)


@dataclass
class LinkDesign:
    """Beamformers, combiners and cross gains for a batch of scenarios.

    Arrays carry one leading frame axis ``F``.
    """

    cross: np.ndarray
    W: np.ndarray
    beta: float = 1.0
    beamformers: np.ndarray | None = None

    @classmethod
    def from_cross(cls, cross, beta: float = 1.0, beamformers=None) -> "LinkDesign":
        """Build the combiners ``W_i = (H_i^+)^H`` from the per-user own gains."""
        cross = np.asarray(cross)
        k = cross.shape[-2]
        users = np.arange(k)
        # H_i[:, a] = H_{a,i} f_{a,i}  ->  (F, K, n_r, n_a)
        own = cross[:, :, users, users, :]
        H_i = np.moveaxis(own, 1, -1)
        W = np.conj(np.swapaxes(pseudo_inverse(H_i), -1, -2))
        return cls(cross, W, beta, beamformers)

    @property
    def n_frames(self) -> int:
        return self.cross.shape[0]

    @property
    def n_a(self) -> int:
        return self.cross.shape[1]

    @property
    def k(self) -> int:
        return self.cross.shape[2]

    @property
    def n_r(self) -> int:
        return self.cross.shape[-1]

    def with_beta(self, beta: float) -> "LinkDesign":
        return LinkDesign(self.cross, self.W, float(beta), self.beamformers)

    def _frames(self, sel: np.ndarray) -> tuple[np.ndarray, bool]:
        sel = np.asarray(sel)
        single = sel.ndim == 1
        if single:
            if self.n_frames != 1:
                raise ValueError("a single selection tuple needs a single-frame design")
            sel = sel[None, None, :]
        if sel.shape[-1] != self.k or sel.shape[0] != self.n_frames:
            raise ValueError("selection must have shape (frames, uses, K)")
        if np.any((sel < 0) | (sel >= self.n_a)):
            raise ValueError("array index out of range")
        return sel, single

    def _gather(self, sel: np.ndarray) -> np.ndarray:
        """``c[f, u, i, j, :] = H_{a_j, i} f_{a_j, j}`` for the selected tuple."""
        f = np.arange(self.n_frames)[:, None, None, None]
        users = np.arange(self.k)
        return self.cross[f, sel[:, :, None, :], users[None, None, None, :],
                          users[None, None, :, None]]

    def combiners(self, sel: np.ndarray) -> np.ndarray:
        """``w_{a_k, k}`` for every user, shape ``(F, U, K, n_r)``."""
        f = np.arange(self.n_frames)[:, None, None]
        users = np.arange(self.k)[None, None, :]
        return self.W[f, users, :, sel]

    def effective_channel(self, sel) -> np.ndarray:
        """``H_eff[k, j] = w_{a_k,k}^H H_{a_j,k} f_{a_j,j}``."""
        sel, single = self._frames(sel)
        h = np.einsum("fukr,fukjr->fukj", np.conj(self.combiners(sel)), self._gather(sel))
        return h[0, 0] if single else h

    def precoder(self, sel):
        """ZF precoder and degenerate flag for each selection."""
        return zf_precoder(self.effective_channel(sel), self.beta)


def design_links(H, cb: Codebook) -> LinkDesign:
    """Batched design. ``H`` is ``(F, n_a, K, n_r, n_t)``.

    ``cb.vectors`` may be a shared ``(N, n_t)`` table or per-channel
    ``(F, n_a, K, N, n_t)`` codebooks.
    """
    H = np.asarray(H)
    if H.ndim != 5:
        raise ValueError("expected channels shaped (frames, n_a, K, n_r, n_t)")
    _, f, _ = select_beamformer(H, cb)
    # cross[f, a, j, i, r] = H_{a,i} f_{a,j}
    cross = np.einsum("faiRt,fajt->fajiR", H, f)
    return LinkDesign.from_cross(cross, beamformers=f)


def design_link(scenario: ScenarioChannels, cb: Codebook | None = None) -> LinkDesign:
    """Design for one scenario; ``cb=None`` uses each channel's array-response codebook."""
    if cb is None:
        cb = build_array_response_codebook(scenario.paths, scenario.n_t)
    if cb.vectors.ndim > 2:
        cb = Codebook(cb.kind, cb.vectors[None], cb.angles[None], cb.bits, cb.convention)
    elif cb.n_t != scenario.n_t:
        raise ValueError("codebook and scenario disagree on n_t")
    return design_links(scenario.H[None], cb)


def draw_designs(params: LinkParams, rng: np.random.Generator, n_frames: int,
                 steering: Codebook | None = None) -> LinkDesign:
    """Fresh scenarios from one generator, designed in one batch."""
    paths = draw_paths(rng, (n_frames, params.n_a, params.k), params.n_paths)
    H = channel_matrix(paths, params.n_t, params.n_r)
    if params.codebook == "array_response":
        cb = build_array_response_codebook(paths, params.n_t)
    else:
        cb = steering if steering is not None else params.beamsteering()
    return design_links(H, cb)


# -- precoding and power normalization ------------------------------------------

def zf_precoder(H_eff, beta: float):
    """``P = beta * pinv(H_eff)`` plus a flag for condition number above 1e12."""
    H_eff = np.asarray(H_eff)
    if not np.all(np.isfinite(H_eff)):
        raise ValueError("effective channel has non-finite entries")
    s = np.linalg.svd(H_eff, compute_uv=False)
    degenerate = s[..., -1] <= s[..., 0] / DEGENERATE_CONDITION
    return beta * pseudo_inverse(H_eff), degenerate


def _pinv_power(H_eff) -> np.ndarray:
    """``tr(H_eff^+ (H_eff^+)^H)``, i.e. the squared Frobenius norm of the pseudo-inverse."""
    Pi = pseudo_inverse(H_eff)
    return np.sum(Pi.real**2 + Pi.imag**2, axis=(-2, -1))


def beta_from_effective_channels(H_eff) -> float:
    """Sample mean of ``sqrt(K / tr(H_eff^+ (H_eff^+)^H))`` over a stack of ``K x K`` matrices."""
    H_eff = np.asarray(H_eff)
    k = H_eff.shape[-1]
    return float(np.mean(np.sqrt(k / _pinv_power(H_eff))))


def estimate_beta(params: LinkParams, n_realizations: int, stream: RandomStream,
                  chunk: int = 2048) -> float:
    """Average-power normalization over fresh scenarios and random array choices."""
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    steering = params.beamsteering()
    rng = as_generator(stream)
    total, done = 0.0, 0
    while done < n_realizations:
        n = min(chunk, n_realizations - done)
        design = draw_designs(params, rng, n, steering)
        sel = rng.integers(0, params.n_a, (n, 1, params.k))
        total += float(np.sum(np.sqrt(params.k / _pinv_power(design.effective_channel(sel)))))
        done += n
    return total / n_realizations


# -- transmission and detection --------------------------------------------------

def transmit(design: LinkDesign, sel, symbols, rho: float, noise_var: float,
             rng=None, noise=None):
    """Received vectors ``r_i`` for every user.

    ``r_i = sqrt(rho/K) sum_j H_{a_j,i} f_{a_j,j} (P s)_j + n_i`` with
    ``n_i ~ CN(0, noise_var I)``. Each user gets ``rho/K`` of the total power.
    ``sel`` and ``symbols`` are ``(F, U, K)`` (or ``(K,)`` for a
    single-frame design). Pre-drawn unit-variance ``noise`` (same shape as
    the output) takes precedence over ``rng``. Returns ``(r, degenerate)``.
    """
    sel, single = design._frames(sel)
    s = np.asarray(symbols).reshape(sel.shape)
    P, degenerate = design.precoder(sel)
    x = np.einsum("fuij,fuj->fui", P, s)
    r = np.sqrt(rho / design.k) * np.einsum("fuijr,fuj->fuir", design._gather(sel), x)
    if noise is not None:
        r = r + np.sqrt(noise_var) * np.asarray(noise).reshape(r.shape)
    elif noise_var > 0:
        if rng is None:
            raise ValueError("noise needs a random stream")
        z = as_generator(rng).standard_normal(r.shape + (2,))
        r = r + np.sqrt(noise_var / 2) * (z[..., 0] + 1j * z[..., 1])
    if single:
        return r[0, 0], degenerate[0, 0]
    return r, degenerate


def ml_detect(r, W_user, beta: float, constellation: Constellation, rho_user: float = 1.0):
    """Joint array/symbol ML detection.

    Minimizes ``|w_{a}^H r / (beta sqrt(rho_user)) - s_m|^2`` over all
    ``(a, m)``; ties resolve to the lexicographically smallest pair.
    ``r`` is ``(..., n_r)`` and ``W_user`` is ``(..., n_r, n_a)`` (broadcast).
    Returns zero-based ``(array, label)``.
    """
    r = np.asarray(r)
    z = np.einsum("...ra,...r->...a", np.conj(W_user), r) / (beta * np.sqrt(rho_user))
    d = np.abs(z[..., :, None] - constellation.points) ** 2
    flat = np.argmin(d.reshape(d.shape[:-2] + (-1,)), axis=-1)
    return flat // constellation.order, flat % constellation.order
