"""System model: constellations, random channels, and noisy observations.

Everything here is pure given an explicit RNG stream, so trials can be
generated independently and reproducibly under any execution order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError

BPSK = "BPSK"
QPSK = "QPSK"

_SQRT2 = np.sqrt(2.0)

_CONSTELLATION_POINTS = {
    BPSK: np.array([1.0 + 0.0j, -1.0 + 0.0j]),
    QPSK: np.array(
        [
            (1.0 + 1.0j) / _SQRT2,
            (1.0 - 1.0j) / _SQRT2,
            (-1.0 + 1.0j) / _SQRT2,
            (-1.0 - 1.0j) / _SQRT2,
        ]
    ),
}


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy symbol alphabet with a fixed point ordering.

    The point ordering is part of the contract: hard slicing breaks ties
    toward the lowest index.
    """

    kind: str
    points: np.ndarray = field(repr=False)
    bits_per_symbol: int

    def __len__(self) -> int:
        return len(self.points)

    @property
    def min_distance(self) -> float:
        """Smallest distance between two distinct constellation points."""
        diffs = self.points[:, None] - self.points[None, :]
        mags = np.abs(diffs)[~np.eye(len(self.points), dtype=bool)]
        return float(mags.min())


def make_constellation(kind: str) -> Constellation:
    """Return the unit-energy alphabet for ``kind`` (``BPSK`` or ``QPSK``)."""
    try:
        points = _CONSTELLATION_POINTS[kind]
    except KeyError:
        raise ConfigurationError(
            f"unsupported constellation kind {kind!r}; expected one of "
            f"{sorted(_CONSTELLATION_POINTS)}"
        ) from None
    return Constellation(kind=kind, points=points.copy(), bits_per_symbol=points.size.bit_length() - 1)


@dataclass(frozen=True)
class SnrSpec:
    """Linear SNR bookkeeping: per-transmit SNR, per-receive SNR, aspect ratio."""

    snr: float
    snr_rx: float
    beta: float

    @classmethod
    def from_dims(cls, snr: float, n_r: int, n_t: int) -> "SnrSpec":
        if snr <= 0:
            raise ConfigurationError(f"snr must be positive, got {snr}")
        if n_r < 1 or n_t < 1:
            raise ConfigurationError(f"dimensions must be >= 1, got ({n_r}, {n_t})")
        beta = n_t / n_r
        return cls(snr=snr, snr_rx=beta * snr, beta=beta)


@dataclass(frozen=True)
class SystemInstance:
    """One realization of ``y = sqrt(P) H s + v``."""

    H: np.ndarray
    s: np.ndarray
    v: np.ndarray
    y: np.ndarray
    power: float
    noise_var: float

    @property
    def n_r(self) -> int:
        return self.H.shape[0]

    @property
    def n_t(self) -> int:
        return self.H.shape[1]

    @property
    def snr(self) -> float:
        return self.power / self.noise_var if self.noise_var > 0 else np.inf

    def rebuild_error(self) -> float:
        """Max-norm gap between the stored y and sqrt(P) H s + v."""
        return float(np.abs(self.y - (np.sqrt(self.power) * self.H @ self.s + self.v)).max())


def rng_stream(master_seed: int, tag: str, trial_index: int = 0) -> np.random.Generator:
    """Independent substream keyed by (master_seed, purpose tag, trial index).

    The tag is folded through CRC-32 so streams are stable across runs and
    interpreters (Python's hash() is salted and unusable here).
    """
    entropy = (int(master_seed), zlib.crc32(tag.encode("utf-8")), int(trial_index))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def generate_channel(n_r: int, n_t: int, rng: np.random.Generator | int) -> np.ndarray:
    """i.i.d. circularly symmetric complex Gaussian channel, entry variance 1/n_r."""
    if n_r < 1 or n_t < 1:
        raise ConfigurationError(f"channel dimensions must be >= 1, got ({n_r}, {n_t})")
    rng = np.random.default_rng(rng)
    scale = np.sqrt(1.0 / (2.0 * n_r))
    return scale * (rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t)))


def draw_symbols(constellation: Constellation, n_t: int, rng: np.random.Generator | int) -> np.ndarray:
    """Draw n_t symbols uniformly from the constellation."""
    rng = np.random.default_rng(rng)
    idx = rng.integers(0, len(constellation), size=n_t)
    return constellation.points[idx]


def transmit(
    H: np.ndarray,
    s: np.ndarray,
    power: float,
    noise_var: float,
    rng: np.random.Generator | int,
) -> SystemInstance:
    """Form ``y = sqrt(P) H s + v`` with ``v ~ CN(0, noise_var I)``."""
    H = np.asarray(H, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    if H.ndim != 2 or s.ndim != 1 or H.shape[1] != s.shape[0]:
        raise DimensionError(f"H has shape {H.shape} but s has shape {s.shape}")
    if power <= 0:
        raise ConfigurationError(f"power must be positive, got {power}")
    if noise_var < 0:
        raise ConfigurationError(f"noise_var must be >= 0, got {noise_var}")
    rng = np.random.default_rng(rng)
    n_r = H.shape[0]
    unit = rng.standard_normal(n_r) + 1j * rng.standard_normal(n_r)
    v = np.sqrt(noise_var / 2.0) * unit
    y = np.sqrt(power) * (H @ s) + v
    return SystemInstance(H=H, s=s, v=v, y=y, power=float(power), noise_var=float(noise_var))


def db_to_linear(snr_db: float) -> float:
    return float(10.0 ** (snr_db / 10.0))


def linear_to_db(snr: float) -> float:
    return float(10.0 * np.log10(snr))
