"""Complex linear algebra kernel and deterministic random streams.

Every stochastic draw in the package goes through :class:`RandomStream`, a
``(master_seed, stream_id)`` pair that is turned into an independent
generator with :class:`numpy.random.SeedSequence`. Two streams with the same
key always replay the same numbers, no matter in which order (or in which
process) they are consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RandomStream",
    "as_generator",
    "pseudo_inverse",
    "condition_number",
    "standard_complex_gaussian",
]


@dataclass(frozen=True)
class RandomStream:
    """Addressable random stream.

    Parameters
    ----------
    master_seed : int
        64-bit experiment seed.
    stream_id : tuple of int
        Path identifying the draw site, e.g. ``(experiment, snr_index, trial)``.
    """

    master_seed: int
    stream_id: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "stream_id", tuple(int(i) for i in self.stream_id))
        if any(i < 0 for i in self.stream_id):
            raise ValueError("stream_id entries must be non-negative")

    def child(self, *ids: int) -> "RandomStream":
        """Sub-stream extending the id path."""
        return RandomStream(self.master_seed, self.stream_id + tuple(ids))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(seq))


def as_generator(stream: RandomStream | np.random.Generator) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return stream.generator()


def standard_complex_gaussian(stream, n) -> np.ndarray:
    """Draw i.i.d. CN(0, 1) samples.

    ``n`` may be an int or a shape tuple. Real and imaginary parts each have
    variance 1/2. Passing a :class:`RandomStream` restarts the stream, passing
    a :class:`numpy.random.Generator` continues it.
    """
    shape = (n,) if np.isscalar(n) else tuple(n)
    if any(int(s) < 1 for s in shape):
        raise ValueError("sample count must be >= 1")
    rng = as_generator(stream)
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def _check_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim < 2:
        raise ValueError("expected a matrix (or a stack of matrices)")
    if A.shape[-1] == 0 or A.shape[-2] == 0:
        raise ValueError("matrix has a zero dimension")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def pseudo_inverse(A, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse through the SVD.

    Works on a single ``(m, n)`` matrix or on a stack ``(..., m, n)``.
    Singular values below ``rank_tol * sigma_max`` are treated as zero; the
    default cutoff is ``max(m, n) * eps``.
    """
    A = _check_matrix(A)
    m, n = A.shape[-2:]
    dtype = np.result_type(A.dtype, np.float64)
    if rank_tol is None:
        rank_tol = max(m, n) * np.finfo(dtype).eps
    u, s, vh = np.linalg.svd(A.astype(dtype, copy=False), full_matrices=False)
    cutoff = rank_tol * s[..., :1]
    keep = s > cutoff
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    # A+ = V diag(1/s) U^H
    return np.matmul(np.conj(np.swapaxes(vh, -1, -2)) * s_inv[..., None, :],
                     np.conj(np.swapaxes(u, -1, -2)))


def condition_number(A) -> np.ndarray:
    """2-norm condition number; ``inf`` for rank-deficient input."""
    s = np.linalg.svd(_check_matrix(A), compute_uv=False)
    with np.errstate(divide="ignore"):
        return np.where(s[..., -1] > 0, s[..., 0] / np.where(s[..., -1] > 0, s[..., -1], 1.0), np.inf)
