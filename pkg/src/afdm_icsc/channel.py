"""Doubly-selective channel simulator.

A channel is a small set of paths with integer normalized delay ``l`` (samples)
and Doppler ``k`` (bins of 1/(N Ts)) and a complex gain. Doppler acts on the
post-prefix sample index ``t`` as ``exp(-j 2 pi k t / N)``, which is the sign
under which path (l, k) lands on cyclic diagonal ``l (2 k_max + 1) + k`` of
the AFDM effective channel.

Two application modes are provided and must agree: the dense N x N matrix
(``time_channel_matrix``) and the sample-stream filter (``apply_waveform``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, InfeasibleError, PrefixTooShortError
from .paramdesign import ChannelBounds
from .transforms import AfdmParams

JAKES_SINUSOIDS = 64


@dataclass(frozen=True)
class ChannelPath:
    l: int
    k: int
    gain: complex


@dataclass(frozen=True)
class ChannelRealization:
    paths: tuple[ChannelPath, ...]
    bounds: ChannelBounds
    seed: int | None = None

    def __post_init__(self):
        seen = set()
        for path in self.paths:
            if not (0 <= path.l <= self.bounds.l_max and abs(path.k) <= self.bounds.k_max):
                raise DomainError(f"path ({path.l}, {path.k}) outside {self.bounds}")
            if (path.l, path.k) in seen:
                raise DomainError(f"duplicate path at ({path.l}, {path.k})")
            seen.add((path.l, path.k))

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=np.complex128)

    def with_gains(self, gains: Sequence[complex]) -> "ChannelRealization":
        if len(gains) != len(self.paths):
            raise DimensionError("one gain per path required")
        paths = tuple(replace(p, gain=complex(g)) for p, g in zip(self.paths, gains))
        return replace(self, paths=paths)


@dataclass
class GainProcess:
    """Slow-time (frame-rate) complex gain sequence of one path."""

    gains: np.ndarray
    f_d_norm: float
    power: float


def sample_channel(
    p_count: int,
    bounds: ChannelBounds,
    power_profile: Sequence[float] | None = None,
    rng_seed: int | np.random.Generator | None = None,
) -> ChannelRealization:
    """Draw ``p_count`` distinct in-bounds (l, k) cells and Rayleigh gains.

    The i-th drawn path has gain variance ``power_profile[i]``; the profile must
    sum to one so the channel has unit average power.
    """
    if p_count < 1:
        raise DomainError("p_count must be >= 1")
    if p_count > bounds.grid_size:
        raise InfeasibleError(
            f"{p_count} paths do not fit a {bounds.l_max + 1}x{2 * bounds.k_max + 1} delay-Doppler grid"
        )
    if power_profile is None:
        power_profile = np.full(p_count, 1.0 / p_count)
    power_profile = np.asarray(power_profile, dtype=float)
    if power_profile.shape != (p_count,) or np.any(power_profile < 0):
        raise DomainError("power_profile must hold p_count non-negative entries")
    if not math.isclose(power_profile.sum(), 1.0, rel_tol=1e-9):
        raise DomainError("power_profile must sum to 1")

    rng = np.random.default_rng(rng_seed)
    cells = bounds.cells()
    chosen = rng.choice(len(cells), size=p_count, replace=False)
    g = (rng.standard_normal(p_count) + 1j * rng.standard_normal(p_count)) * np.sqrt(power_profile / 2)
    paths = tuple(ChannelPath(*cells[i], complex(gi)) for i, gi in zip(chosen, g))
    seed = rng_seed if isinstance(rng_seed, (int, np.integer)) else None
    return ChannelRealization(paths, bounds, seed)


def _doppler_ramp(k: int, n: int) -> np.ndarray:
    return np.exp(-2j * np.pi * np.mod(k * np.arange(n), n) / n)


def time_channel_matrix(ch: ChannelRealization, p: AfdmParams) -> np.ndarray:
    """Dense time-domain matrix H with ``r = H s`` for a prefix-stripped frame."""
    if p.l_cpp < ch.bounds.l_max:
        raise PrefixTooShortError(f"prefix {p.l_cpp} shorter than l_max={ch.bounds.l_max}")
    n = p.n
    rows = np.arange(n)
    H = np.zeros((n, n), dtype=np.complex128)
    for path in ch.paths:
        col = (rows - path.l) % n
        coef = path.gain * _doppler_ramp(path.k, n)
        # rows that read from the prefix pick up its chirp-periodic phase
        q = path.l - rows[: path.l]
        wrap = np.exp(-2j * np.pi * np.mod(p.c1 * (n * n - 2.0 * n * q), 1.0))
        coef[: path.l] *= wrap
        H[rows, col] += coef
    return H


def apply_waveform(samples_with_cpp: np.ndarray, ch: ChannelRealization, p: AfdmParams) -> np.ndarray:
    """Pass a prefixed frame through the channel and strip the prefix.

    ``out[t] = sum_p g_p exp(-j 2 pi k_p t / N) in[t + l_cpp - l_p]`` for
    ``t = 0..N-1``; samples before the frame start are zero.
    """
    x = np.asarray(samples_with_cpp, dtype=np.complex128)
    L = p.l_cpp
    if x.shape[-1] != p.n + L:
        raise DimensionError(f"expected {p.n + L} samples, got {x.shape[-1]}")
    out = np.zeros(x.shape[:-1] + (p.n,), dtype=np.complex128)
    for path in ch.paths:
        start = L - path.l
        if start >= 0:
            delayed = x[..., start : start + p.n]
        else:
            delayed = np.concatenate(
                [np.zeros(x.shape[:-1] + (-start,), dtype=np.complex128), x[..., : p.n + start]], axis=-1
            )
        out += path.gain * _doppler_ramp(path.k, p.n) * delayed
    return out


def jakes_gains(
    f_d_norm: float,
    n_frames: int,
    power: float = 1.0,
    rng_seed: int | np.random.Generator | None = None,
    n_sinusoids: int = JAKES_SINUSOIDS,
) -> GainProcess:
    """Rayleigh gain sequence with a Jakes spectrum, one sample per frame.

    Sum of ``n_sinusoids`` equal-power arrivals at angles
    ``(2 pi m - pi + alpha) / M`` with independent uniform phases.
    """
    if not 0 < f_d_norm < 0.5:
        raise DomainError(f"f_d_norm must lie in (0, 0.5), got {f_d_norm}")
    if n_frames < 1:
        raise DomainError("n_frames must be >= 1")
    rng = np.random.default_rng(rng_seed)
    m = np.arange(n_sinusoids)
    alpha = rng.uniform(-np.pi, np.pi)
    theta = (2 * np.pi * m - np.pi + alpha) / n_sinusoids
    phi = rng.uniform(-np.pi, np.pi, n_sinusoids)
    freqs = f_d_norm * np.cos(theta)
    t = np.arange(n_frames)
    g = np.exp(1j * (2 * np.pi * np.outer(t, freqs) + phi)).sum(axis=1)
    return GainProcess(g * np.sqrt(power / n_sinusoids), f_d_norm, power)


def add_awgn(
    x: np.ndarray,
    snr_db: float,
    signal_power: float = 1.0,
    rng_seed: int | np.random.Generator | None = None,
) -> np.ndarray:
    """Add circular complex Gaussian noise of variance ``signal_power / 10^(snr_db/10)``.

    ``snr_db = inf`` returns ``x`` unchanged.
    """
    x = np.asarray(x, dtype=np.complex128)
    if math.isinf(snr_db) and snr_db > 0:
        return x.copy()
    var = noise_variance(snr_db, signal_power)
    rng = np.random.default_rng(rng_seed)
    w = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return x + w * np.sqrt(var / 2)


def noise_variance(snr_db: float, signal_power: float = 1.0) -> float:
    if signal_power <= 0:
        raise DomainError("signal_power must be positive")
    if math.isinf(snr_db):
        return 0.0 if snr_db > 0 else math.inf
    return signal_power / 10 ** (snr_db / 10)


@dataclass
class Scenario:
    """JSON channel scenario: fixed path geometry with per-path average power.

    Schema::

        {"paths": [{"l": 0, "k": -1, "power": 0.5}, ...],
         "bounds": {"l_max": 1, "k_max": 1, "xi": 0},
         "f_d_norm": 0.05, "seed": 7}
    """

    cells: list[tuple[int, int]]
    powers: list[float]
    bounds: ChannelBounds
    f_d_norm: float | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.cells) != len(self.powers):
            raise DimensionError("one power per path required")
        if not math.isclose(sum(self.powers), 1.0, rel_tol=1e-9):
            raise DomainError("path powers must sum to 1")
        # reuse the realization checks for bounds and duplicates
        ChannelRealization(tuple(ChannelPath(l, k, 0j) for l, k in self.cells), self.bounds)

    @classmethod
    def full_grid(cls, bounds: ChannelBounds, **kw) -> "Scenario":
        cells = bounds.cells()
        return cls(cells, [1.0 / len(cells)] * len(cells), bounds, **kw)

    def rayleigh(self, rng: np.random.Generator) -> ChannelRealization:
        """Independent Rayleigh gains on the fixed geometry."""
        pw = np.asarray(self.powers)
        g = (rng.standard_normal(len(pw)) + 1j * rng.standard_normal(len(pw))) * np.sqrt(pw / 2)
        return self.realize(g)

    def realize(self, gains: Sequence[complex]) -> ChannelRealization:
        paths = tuple(ChannelPath(l, k, complex(g)) for (l, k), g in zip(self.cells, gains))
        return ChannelRealization(paths, self.bounds, self.seed)

    def to_dict(self) -> dict:
        return {
            "paths": [{"l": l, "k": k, "power": pw} for (l, k), pw in zip(self.cells, self.powers)],
            "bounds": {"l_max": self.bounds.l_max, "k_max": self.bounds.k_max, "xi": self.bounds.xi},
            "f_d_norm": self.f_d_norm,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        paths = d["paths"]
        return cls(
            cells=[(int(p["l"]), int(p["k"])) for p in paths],
            powers=[float(p["power"]) for p in paths],
            bounds=ChannelBounds(**d["bounds"]),
            f_d_norm=d.get("f_d_norm"),
            seed=int(d.get("seed", 0)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))
