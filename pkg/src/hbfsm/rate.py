"""Achievable rate of one user through the Gaussian-mixture receive density.

After interference cancellation the combined scalar is

    y = sqrt(rho_i) * w_j^H H_j f_j * s_m + z,   z ~ CN(0, sigma^2)

with (array j, symbol m) uniform, so ``y`` is an equal-weight mixture of
``n_a * M`` circular complex Gaussians. Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .numerics import RandomStream, as_generator

__all__ = [
    "GaussianMixture",
    "RatePoint",
    "MIN_GRID",
    "MIN_SAMPLES",
    "mixture_from_link",
    "gm_density",
    "gm_entropy",
    "noise_entropy",
    "mutual_information",
    "rate_bounds",
    "rate_point",
]

MIN_GRID = 256
MIN_SAMPLES = 100_000
LOG2E = np.log2(np.e)


@dataclass(frozen=True)
class GaussianMixture:
    """Equal-weight mixture of ``CN(mean, variance)`` components."""

    means: np.ndarray
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "means", np.atleast_1d(np.asarray(self.means, complex)).ravel())
        if not self.variance > 0:
            raise ValueError("component variance must be positive")
        if self.means.size == 0:
            raise ValueError("mixture needs at least one component")

    @property
    def size(self) -> int:
        return self.means.size

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)


@dataclass(frozen=True)
class RatePoint:
    snr_db: float
    exact: float
    lower: float
    upper: float


def mixture_from_link(own_gains, constellation_points, rho_user: float,
                      noise_var: float = 1.0) -> GaussianMixture:
    """Means ``sqrt(rho_user) * c_j * s_m`` for per-array gains ``c_j = w_j^H H_j f_j``."""
    c = np.asarray(own_gains).ravel()
    s = np.asarray(constellation_points).ravel()
    return GaussianMixture(np.sqrt(rho_user) * np.outer(c, s).ravel(), noise_var)


def _log_density(y: np.ndarray, gm: GaussianMixture) -> np.ndarray:
    d = np.abs(y[..., None] - gm.means) ** 2
    return logsumexp(-d / gm.variance, axis=-1) - np.log(np.pi * gm.variance * gm.size)


def gm_density(y, gm: GaussianMixture):
    """Mixture pdf on the complex plane (w.r.t. ``d Re(y) d Im(y)``)."""
    return np.exp(_log_density(np.asarray(y, complex), gm))


def noise_entropy(variance: float) -> float:
    """``log2(pi e sigma^2)``: entropy of ``CN(0, sigma^2)``."""
    return float(np.log2(np.pi * np.e * variance))


def _entropy_quadrature(gm: GaussianMixture, n: int) -> float:
    # h = sum_c w_c E_{y ~ c}[-log f(y)]; each expectation on an n x n
    # midpoint grid over mean +- 8 sigma, where the component is supported
    sd = np.sqrt(gm.variance / 2)
    u = (np.arange(n) + 0.5) / n * 16.0 - 8.0
    ur, ui = np.meshgrid(u, u, indexing="ij")
    offsets = sd * (ur + 1j * ui)
    local = np.exp(-(ur**2 + ui**2) / 2)
    local /= local.sum()
    total = 0.0
    for mu in gm.means:
        total -= np.sum(local * _log_density(mu + offsets, gm))
    return total / gm.size * LOG2E


def _entropy_monte_carlo(gm: GaussianMixture, n: int, rng) -> tuple[float, float]:
    rng = as_generator(rng)
    comp = rng.integers(0, gm.size, n)
    z = rng.standard_normal((n, 2)) * np.sqrt(gm.variance / 2)
    y = gm.means[comp] + z[:, 0] + 1j * z[:, 1]
    v = -_log_density(y, gm) * LOG2E
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(n))


def gm_entropy(gm: GaussianMixture, method: str = "quadrature", budget: int | None = None,
               stream: RandomStream | np.random.Generator | None = None,
               return_stderr: bool = False):
    """Differential entropy in bits.

    ``quadrature`` integrates each component's neighbourhood on a
    ``budget x budget`` grid (default 256); ``monte_carlo`` averages
    ``-log2 f`` over ``budget`` mixture samples (default 10**5). With
    ``return_stderr`` the result is ``(h, stderr)``; quadrature reports 0.
    """
    if method == "quadrature":
        n = MIN_GRID if budget is None else int(budget)
        if n < MIN_GRID:
            raise ValueError(f"quadrature grid must be at least {MIN_GRID} per side")
        h, se = _entropy_quadrature(gm, n), 0.0
    elif method == "monte_carlo":
        n = MIN_SAMPLES if budget is None else int(budget)
        if n < MIN_SAMPLES:
            raise ValueError(f"Monte Carlo entropy needs at least {MIN_SAMPLES} samples")
        if stream is None:
            raise ValueError("Monte Carlo entropy needs a random stream")
        h, se = _entropy_monte_carlo(gm, n, stream)
    else:
        raise ValueError(f"unknown entropy method {method!r}")
    return (h, se) if return_stderr else h


def mutual_information(gm: GaussianMixture, **kwargs) -> float:
    """``h(y) - h(z)`` clamped to ``[0, log2(size)]``."""
    h = gm_entropy(gm, **kwargs)
    return float(np.clip(h - noise_entropy(gm.variance), 0.0, np.log2(gm.size)))


def _pairwise_lower(gm: GaussianMixture, scale: float) -> float:
    # h >= h(z) - sum_i w_i ln sum_j w_j exp(-|mu_i - mu_j|^2 / (scale sigma^2))
    # scale=4: Bhattacharyya pairwise bound; scale=2: expected-likelihood bound
    # (which carries its own -1 bit offset, handled by the caller)
    d = np.abs(gm.means[:, None] - gm.means[None, :]) ** 2
    inner = logsumexp(-d / (scale * gm.variance), axis=1) - np.log(gm.size)
    return -float(np.mean(inner)) * LOG2E


def _gaussian_upper(gm: GaussianMixture) -> float:
    # max-entropy bound with the mixture's 2x2 real covariance
    pts = np.stack([gm.means.real, gm.means.imag])
    cov = np.cov(pts, bias=True).reshape(2, 2) + np.eye(2) * gm.variance / 2
    return 0.5 * float(np.log2((2 * np.pi * np.e) ** 2 * np.linalg.det(cov)))


def rate_bounds(gm: GaussianMixture) -> tuple[float, float]:
    """Lower and upper bounds on ``h(y) - h(z)``.

    Lower: the larger of the Bhattacharyya pairwise-distance bound and the
    expected-likelihood (``-log2 E f(Y)``) bound. Upper: the smaller of
    ``log2(size)`` (component-entropy plus weight-entropy) and the Gaussian
    bound for the mixture covariance.
    """
    hz = noise_entropy(gm.variance)
    bhatt = _pairwise_lower(gm, 4.0)
    # -log2 E f(Y) = log2(2 pi sigma^2) - log2 mean_ij exp(-d/2sigma^2) = h(z) - log2(e/2) + ...
    elk = _pairwise_lower(gm, 2.0) - np.log2(np.e / 2)
    lower = max(0.0, bhatt, elk)
    upper = min(float(np.log2(gm.size)), _gaussian_upper(gm) - hz)
    return lower, max(upper, lower)


def rate_point(gm: GaussianMixture, snr_db: float, budget: int | None = None) -> RatePoint:
    lower, upper = rate_bounds(gm)
    return RatePoint(snr_db, mutual_information(gm, budget=budget), lower, upper)
