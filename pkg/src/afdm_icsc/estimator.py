"""Embedded-pilot delay-Doppler path estimation in the DAFT domain.

A path ``(l, k)`` moves the pilot to index ``pilot - (l (2 k_max + 1) + k)``
(mod n). The receiver scans the Q + 1 indices that in-bounds paths can reach,
declares a path where the magnitude exceeds ``threshold_mult`` times the noise
level, and reads the gain by dividing out the pilot and the single-path
template.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .effective import EffectiveChannel, single_path_template, unit_path_matrix
from .errors import DimensionError, DomainError
from .modem import FrameLayout
from .paramdesign import ChannelBounds, WaveformKind, diag_shift, shift_to_delay_doppler, shift_window
from .transforms import AfdmParams

DEFAULT_THRESHOLD_MULT = 3.0


@dataclass(frozen=True)
class EstimatedPath:
    l: int
    k: int
    gain: complex
    peak_magnitude: float
    index: int

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "k": self.k,
            "gain": [self.gain.real, self.gain.imag],
            "peak_magnitude": self.peak_magnitude,
            "index": self.index,
        }


@dataclass
class EstimationReport:
    paths: list[EstimatedPath]
    noise_floor: float
    threshold: float
    params: AfdmParams
    bounds: ChannelBounds
    reconstructed: EffectiveChannel | None = None
    degenerate_noise: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "paths": [p.to_dict() for p in self.paths],
            "noise_floor": self.noise_floor,
            "threshold": self.threshold,
            "degenerate_noise": self.degenerate_noise,
        }
        d.update(self.extra)
        return d


def _search_bounds(p: AfdmParams, bounds: ChannelBounds) -> ChannelBounds:
    # the shift width is 2 n c1, i.e. 2 (k_max + xi) + 1 for the canonical c1
    width = 2 * (bounds.k_max + bounds.xi) + 1
    if not np.isclose(2 * p.n * p.c1, width, rtol=0, atol=1e-9):
        raise DomainError(
            f"estimation needs canonical AFDM c1 = {width}/(2n); got 2 n c1 = {2 * p.n * p.c1:.6g}"
        )
    return ChannelBounds(bounds.l_max, bounds.k_max + bounds.xi)


def candidate_indices(layout: FrameLayout, p: AfdmParams, bounds: ChannelBounds) -> dict[int, int]:
    """Map DAFT index -> signed shift for the Q + 1 positions in-bounds paths can reach."""
    sb = _search_bounds(p, bounds)
    return {(layout.pilot_index - d) % p.n: d for d in shift_window(sb)}


def _blind_noise_level(
    y: np.ndarray, layout: FrameLayout, p: AfdmParams, sb: ChannelBounds, cands: dict[int, int]
) -> float:
    # guard rows that neither the pilot nor any data symbol can reach hold pure noise
    reach = {(i - d) % p.n for i in layout.data_indices for d in shift_window(sb)}
    quiet = [i for i in layout.guard_indices if i not in cands and i not in reach]
    if quiet:
        return float(np.sqrt(np.mean(np.abs(y[quiet]) ** 2)))
    # otherwise the median over the candidate window: mostly noise when paths are sparse,
    # and |w| of circular Gaussian noise has median sigma * sqrt(ln 2)
    return float(np.median(np.abs(y[list(cands)])) / np.sqrt(np.log(2)))


def estimate_paths(
    y: np.ndarray,
    layout: FrameLayout,
    p: AfdmParams,
    bounds: ChannelBounds,
    threshold_mult: float = DEFAULT_THRESHOLD_MULT,
    pilot_value: complex = 1.0,
    noise_var: float | None = None,
) -> EstimationReport:
    """Threshold-based path detection around the embedded pilot.

    The noise level is ``sqrt(noise_var)`` when the receiver knows it. Otherwise
    it is the RMS of guard samples that neither pilot nor data can reach, or,
    when the layout leaves none, the median magnitude over the candidate window.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (p.n,):
        raise DimensionError(f"expected a length-{p.n} frame, got {y.shape}")
    if threshold_mult <= 0:
        raise DomainError("threshold_mult must be positive")
    cands = candidate_indices(layout, p, bounds)
    sb = _search_bounds(p, bounds)

    if noise_var is None:
        sigma = _blind_noise_level(y, layout, p, sb, cands)
    else:
        sigma = float(np.sqrt(noise_var))

    degenerate = sigma <= 1e-12 * max(abs(pilot_value), 1e-300)
    if degenerate:
        # noiseless frame: only reject round-off
        threshold = 1e-8 * abs(pilot_value)
    else:
        threshold = threshold_mult * sigma

    paths = []
    for idx in sorted(cands, key=lambda i: cands[i]):
        mag = abs(y[idx])
        if mag <= threshold or pilot_value == 0:
            continue
        l, k = shift_to_delay_doppler(cands[idx], sb)
        if abs(k) > bounds.k_max:
            continue
        tpl = single_path_template(l, k, p, bounds, layout.pilot_index)
        gain = y[idx] / (pilot_value * tpl[idx])
        paths.append(EstimatedPath(l, k, complex(gain), float(mag), int(idx)))

    return EstimationReport(
        paths=paths,
        noise_floor=sigma,
        threshold=float(threshold),
        params=p,
        bounds=bounds,
        degenerate_noise=bool(degenerate and any(abs(y[i]) > threshold for i in cands)),
    )


def expected_index(l: int, k: int, layout: FrameLayout, bounds: ChannelBounds) -> int:
    """DAFT index at which path (l, k) shows the pilot (canonical AFDM)."""
    d = diag_shift(WaveformKind.AFDM, l, k, bounds.k_max + bounds.xi)
    return (layout.pilot_index - d) % layout.n


def reconstruct_heff(
    paths: list[EstimatedPath], p: AfdmParams, bounds: ChannelBounds
) -> EffectiveChannel:
    """Sum of gain-weighted unit-path effective channels."""
    M = np.zeros((p.n, p.n), dtype=np.complex128)
    seen = set()
    for path in paths:
        if (path.l, path.k) in seen:
            warnings.warn(f"duplicate path ({path.l}, {path.k}); gains summed", stacklevel=2)
        seen.add((path.l, path.k))
        M += path.gain * unit_path_matrix(path.l, path.k, p, bounds)
    return EffectiveChannel(M, p, bounds)


def nmse(A: np.ndarray, B: np.ndarray) -> float:
    """``||A - B||_F^2 / ||B||_F^2``."""
    A = getattr(A, "matrix", A)
    B = getattr(B, "matrix", B)
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    ref = np.sum(np.abs(B) ** 2)
    if ref == 0:
        raise DomainError("reference matrix is zero")
    return float(np.sum(np.abs(A - B) ** 2) / ref)
