"""Channel-sounding statistics from per-frame path estimates.

Paths are associated across frames by their (l, k) cell; missing detections
are zero-filled. The PDP averages path power per delay tap and the DPS is a
Welch periodogram of each cell's slow-time gain sequence.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import signal

from .errors import ConfigMismatchError, DomainError, InsufficientDataError
from .paramdesign import ChannelBounds
from .transforms import AfdmParams

DEFAULT_BANDWIDTH_HZ = 10e6
MIN_DPS_FRAMES = 64


@dataclass(frozen=True)
class PhysicalGrid:
    """Converts normalized delay/Doppler indices to seconds and hertz."""

    bandwidth_b: float
    n: int
    l_cpp: int = 0

    def __post_init__(self):
        if self.bandwidth_b <= 0:
            raise DomainError("bandwidth must be positive")

    @classmethod
    def for_params(cls, p: AfdmParams, bandwidth_b: float = DEFAULT_BANDWIDTH_HZ) -> "PhysicalGrid":
        return cls(bandwidth_b, p.n, p.l_cpp)

    @property
    def subcarrier_spacing(self) -> float:
        return self.bandwidth_b / self.n

    @property
    def symbol_duration_t(self) -> float:
        return self.n / self.bandwidth_b

    @property
    def frame_period(self) -> float:
        return (self.n + self.l_cpp) / self.bandwidth_b

    @property
    def delay_resolution(self) -> float:
        return 1.0 / self.bandwidth_b

    def delay_s(self, l) -> np.ndarray:
        return np.asarray(l) / self.bandwidth_b

    def doppler_hz(self, k) -> np.ndarray:
        """Intra-frame Doppler bin ``k`` in hertz."""
        return np.asarray(k) * self.subcarrier_spacing


@dataclass
class SoundingAccumulator:
    """Per-cell slow-time gain sequences, aligned by frame index."""

    params: AfdmParams
    bounds: ChannelBounds
    frame_count: int = 0
    sequences: dict[tuple[int, int], list[complex]] = field(default_factory=dict)

    def add(self, report) -> None:
        if report.params != self.params or report.bounds != self.bounds:
            raise ConfigMismatchError("report configuration differs from accumulator")
        seen = set()
        for path in report.paths:
            cell = (path.l, path.k)
            seq = self.sequences.setdefault(cell, [0j] * self.frame_count)
            if cell in seen:
                seq[-1] += path.gain
            else:
                seq.append(complex(path.gain))
            seen.add(cell)
        self.frame_count += 1
        for seq in self.sequences.values():
            if len(seq) < self.frame_count:
                seq.append(0j)

    def merge(self, other: "SoundingAccumulator") -> "SoundingAccumulator":
        """Concatenate ``other``'s frames after this one's."""
        if (other.params, other.bounds) != (self.params, self.bounds):
            raise ConfigMismatchError("cannot merge accumulators of different configurations")
        cells = sorted(set(self.sequences) | set(other.sequences))
        seqs = {
            c: self.sequences.get(c, [0j] * self.frame_count)
            + other.sequences.get(c, [0j] * other.frame_count)
            for c in cells
        }
        return SoundingAccumulator(self.params, self.bounds, self.frame_count + other.frame_count, seqs)

    def gains(self, cell: tuple[int, int]) -> np.ndarray:
        return np.asarray(self.sequences.get(cell, [0j] * self.frame_count))

    @property
    def cells(self) -> list[tuple[int, int]]:
        return sorted(self.sequences)

    def cell_powers(self) -> dict[tuple[int, int], float]:
        return {c: float(np.mean(np.abs(self.gains(c)) ** 2)) for c in self.cells}


def accumulate(reports: Iterable) -> SoundingAccumulator:
    acc = None
    for rep in reports:
        if acc is None:
            acc = SoundingAccumulator(rep.params, rep.bounds)
        acc.add(rep)
    if acc is None:
        raise InsufficientDataError("no estimation reports to accumulate")
    return acc


def pdp(acc: SoundingAccumulator, grid: PhysicalGrid) -> np.ndarray:
    """Rows ``(delay_s, power)`` for every delay tap ``0..l_max``, unit total power.

    An all-zero profile is returned unnormalized.
    """
    taps = np.zeros(acc.bounds.l_max + 1)
    for (l, _), pw in acc.cell_powers().items():
        taps[l] += pw
    total = taps.sum()
    if total > 0:
        taps = taps / total
    return np.column_stack([grid.delay_s(np.arange(taps.size)), taps])


def _segment_length(frames: int) -> int:
    return min(1024, frames // 8)


def cell_dps(acc: SoundingAccumulator, grid: PhysicalGrid, cell: tuple[int, int]) -> np.ndarray:
    """Rows ``(doppler_hz, psd)`` of one cell, frequency ascending, two-sided."""
    if acc.frame_count < MIN_DPS_FRAMES:
        raise InsufficientDataError(f"DPS needs >= {MIN_DPS_FRAMES} frames, got {acc.frame_count}")
    nperseg = _segment_length(acc.frame_count)
    f, psd = signal.welch(
        acc.gains(cell),
        fs=1.0 / grid.frame_period,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    order = np.argsort(f)
    return np.column_stack([f[order], psd[order]])


def dps(acc: SoundingAccumulator, grid: PhysicalGrid) -> np.ndarray:
    """Aggregate DPS: sum of per-cell spectra, so it integrates to total path power."""
    if acc.frame_count < MIN_DPS_FRAMES:
        raise InsufficientDataError(f"DPS needs >= {MIN_DPS_FRAMES} frames, got {acc.frame_count}")
    if not acc.cells:
        nperseg = _segment_length(acc.frame_count)
        f = np.sort(np.fft.fftfreq(nperseg, d=grid.frame_period))
        return np.column_stack([f, np.zeros_like(f)])
    spectra = [cell_dps(acc, grid, c) for c in acc.cells]
    return np.column_stack([spectra[0][:, 0], np.sum([s[:, 1] for s in spectra], axis=0)])


def _rms_spread(profile: np.ndarray) -> float:
    profile = np.asarray(profile, dtype=float)
    if profile.size == 0:
        raise DomainError("empty profile")
    x, w = profile[:, 0], profile[:, 1]
    total = w.sum()
    if total <= 0:
        raise DomainError("profile has no power")
    mean = np.sum(w * x) / total
    var = np.sum(w * x * x) / total - mean**2
    return float(np.sqrt(max(var, 0.0)))


def rms_delay_spread(pdp_rows: np.ndarray) -> float:
    """Power-weighted standard deviation of delay, seconds."""
    return _rms_spread(pdp_rows)


def rms_doppler_spread(dps_rows: np.ndarray) -> float:
    """Power-weighted standard deviation of Doppler frequency, hertz."""
    return _rms_spread(dps_rows)


@dataclass
class SoundingReport:
    pdp: np.ndarray
    dps: np.ndarray
    rms_delay_spread_s: float | None
    rms_doppler_spread_hz: float | None
    frame_count: int
    cell_powers: dict[tuple[int, int], float] = field(default_factory=dict)
    per_path_dps: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    insufficient_detections: bool = False

    def to_dict(self) -> dict:
        return {
            "frame_count": self.frame_count,
            "rms_delay_spread_s": self.rms_delay_spread_s,
            "rms_doppler_spread_hz": self.rms_doppler_spread_hz,
            "insufficient_detections": self.insufficient_detections,
            "pdp": [{"delay_s": float(d), "power": float(p)} for d, p in self.pdp],
            "cells": [
                {"l": l, "k": k, "power": pw} for (l, k), pw in sorted(self.cell_powers.items())
            ],
            "dps": [{"doppler_hz": float(f), "power": float(p)} for f, p in self.dps],
        }

    def to_json(self, extra: dict | None = None) -> str:
        d = self.to_dict()
        if extra:
            d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def summarize(acc: SoundingAccumulator, grid: PhysicalGrid, min_detection_rate: float = 0.5) -> SoundingReport:
    """Build the full sounding report from an accumulator.

    Flags ``insufficient_detections`` when fewer than ``min_detection_rate`` of
    frames produced any path; spreads are then ``None``.
    """
    profile = pdp(acc, grid)
    spectrum = dps(acc, grid)
    detected = np.zeros(acc.frame_count, dtype=bool)
    for c in acc.cells:
        detected |= acc.gains(c) != 0
    insufficient = detected.mean() < min_detection_rate if acc.frame_count else True
    if insufficient or profile[:, 1].sum() == 0:
        d_spread = f_spread = None
        insufficient = True
    else:
        d_spread = rms_delay_spread(profile)
        f_spread = rms_doppler_spread(spectrum)
    return SoundingReport(
        pdp=profile,
        dps=spectrum,
        rms_delay_spread_s=d_spread,
        rms_doppler_spread_hz=f_spread,
        frame_count=acc.frame_count,
        cell_powers=acc.cell_powers(),
        per_path_dps={c: cell_dps(acc, grid, c) for c in acc.cells},
        insufficient_detections=bool(insufficient),
    )


def profile_csv(rows: np.ndarray, header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for a, b in rows:
        w.writerow([f"{a:.12g}", f"{b:.12g}"])
    return buf.getvalue()
