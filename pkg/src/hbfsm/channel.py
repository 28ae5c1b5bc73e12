"""Geometric L-path mmWave channel between a half-wavelength ULA pair.

    H = sqrt(N_T N_R / L) * sum_l alpha_l a_R(theta_l) a_T(phi_l)^H

with alpha_l ~ CN(0, 1) and both angles uniform on (0, 2*pi].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .numerics import RandomStream, as_generator

__all__ = [
    "PathSet",
    "ChannelRealization",
    "ScenarioChannels",
    "steering_vector",
    "channel_matrix",
    "draw_paths",
    "generate_channel",
    "generate_scenario",
    "write_channel_dump",
    "read_channel_dump",
]


def steering_vector(angle, n: int) -> np.ndarray:
    """ULA response ``(1/sqrt(n)) [1, e^{j pi sin(angle)}, ..., e^{j pi (n-1) sin(angle)}]``.

    ``angle`` may be an array; the antenna axis is appended last.
    """
    if n < 1:
        raise ValueError("antenna count must be >= 1")
    phase = np.pi * np.multiply.outer(np.sin(angle), np.arange(n))
    return np.exp(1j * phase) / np.sqrt(n)


@dataclass
class PathSet:
    """Per-path gains and angles. Arrays share a shape whose last axis is the path index."""

    gains: np.ndarray
    aod: np.ndarray
    aoa: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.gains.shape[-1]

    def __getitem__(self, idx) -> "PathSet":
        return PathSet(self.gains[idx], self.aod[idx], self.aoa[idx])


def draw_paths(rng: np.random.Generator, shape: tuple[int, ...], n_paths: int) -> PathSet:
    """Draw gains and angles for a block of channels of the given leading shape."""
    if n_paths < 1:
        raise ValueError("path count must be >= 1")
    full = tuple(shape) + (n_paths,)
    z = rng.standard_normal(full + (2,))
    gains = (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)
    # uniform on (0, 2pi]: reflect [0, 2pi)
    aod = 2 * np.pi - rng.uniform(0.0, 2 * np.pi, full)
    aoa = 2 * np.pi - rng.uniform(0.0, 2 * np.pi, full)
    return PathSet(gains, aod, aoa)


def channel_matrix(paths: PathSet, n_t: int, n_r: int) -> np.ndarray:
    """Assemble ``H`` (shape ``(..., n_r, n_t)``) from a path set."""
    a_r = steering_vector(paths.aoa, n_r)
    a_t = steering_vector(paths.aod, n_t)
    scale = np.sqrt(n_t * n_r / paths.n_paths)
    return scale * np.einsum("...l,...lr,...lt->...rt", paths.gains, a_r, np.conj(a_t))


@dataclass
class ChannelRealization:
    H: np.ndarray
    paths: PathSet
    n_t: int
    n_r: int

    def reconstruct(self) -> np.ndarray:
        return channel_matrix(self.paths, self.n_t, self.n_r)


def generate_channel(n_t: int, n_r: int, n_paths: int, stream) -> ChannelRealization:
    if min(n_t, n_r) < 1:
        raise ValueError("antenna counts must be >= 1")
    paths = draw_paths(as_generator(stream), (), n_paths)
    return ChannelRealization(channel_matrix(paths, n_t, n_r), paths, n_t, n_r)


@dataclass
class ScenarioChannels:
    """All array-to-user channels of one scenario.

    ``H[a, i]`` is the ``(n_r, n_t)`` channel from array ``a`` to user ``i``
    (both zero-based).
    """

    H: np.ndarray
    paths: PathSet
    n_t: int
    n_r: int

    @property
    def n_a(self) -> int:
        return self.H.shape[0]

    @property
    def k(self) -> int:
        return self.H.shape[1]

    def __getitem__(self, key: tuple[int, int]) -> ChannelRealization:
        a, i = key
        return ChannelRealization(self.H[a, i], self.paths[a, i], self.n_t, self.n_r)

    def __iter__(self) -> Iterator[tuple[tuple[int, int], ChannelRealization]]:
        for a in range(self.n_a):
            for i in range(self.k):
                yield (a, i), self[a, i]


def generate_scenario(n_a: int, k: int, n_t: int, n_r: int, n_paths: int,
                      stream: RandomStream) -> ScenarioChannels:
    """Draw ``n_a * k`` independent channels.

    Channel ``(a, i)`` comes from sub-stream ``stream.child(a, i)``, so it
    does not change when ``n_a`` or ``k`` grow.
    """
    if n_a < 1 or k < 1:
        raise ValueError("n_a and k must be >= 1")
    sets = [[draw_paths(stream.child(a, i).generator(), (), n_paths) for i in range(k)]
            for a in range(n_a)]
    paths = PathSet(*(np.array([[getattr(p, f) for p in row] for row in sets])
                      for f in ("gains", "aod", "aoa")))
    return ScenarioChannels(channel_matrix(paths, n_t, n_r), paths, n_t, n_r)


_DUMP_HEADER = ["a", "i", "l", "re_alpha", "im_alpha", "aod", "aoa"]


def write_channel_dump(scenario: ScenarioChannels, path) -> None:
    """CSV regression fixture, one row per path, indices one-based."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_DUMP_HEADER)
        for (a, i), ch in scenario:
            for l in range(ch.paths.n_paths):
                g = ch.paths.gains[l]
                w.writerow([a + 1, i + 1, l + 1, repr(float(g.real)), repr(float(g.imag)),
                            repr(float(ch.paths.aod[l])), repr(float(ch.paths.aoa[l]))])


def read_channel_dump(path, n_t: int, n_r: int) -> ScenarioChannels:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or list(rows[0].keys()) != _DUMP_HEADER:
        raise ValueError(f"{path}: not a channel dump")
    n_a = max(int(r["a"]) for r in rows)
    k = max(int(r["i"]) for r in rows)
    n_paths = max(int(r["l"]) for r in rows)
    gains = np.zeros((n_a, k, n_paths), complex)
    aod = np.zeros((n_a, k, n_paths))
    aoa = np.zeros((n_a, k, n_paths))
    for r in rows:
        idx = (int(r["a"]) - 1, int(r["i"]) - 1, int(r["l"]) - 1)
        gains[idx] = complex(float(r["re_alpha"]), float(r["im_alpha"]))
        aod[idx] = float(r["aod"])
        aoa[idx] = float(r["aoa"])
    paths = PathSet(gains, aod, aoa)
    return ScenarioChannels(channel_matrix(paths, n_t, n_r), paths, n_t, n_r)
