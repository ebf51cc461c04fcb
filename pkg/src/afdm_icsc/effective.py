"""DAFT-domain effective channel ``H_eff = A H A^H`` and its diagonal structure."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelPath, ChannelRealization, apply_waveform, time_channel_matrix
from .errors import DimensionError, DomainError, ResourceError
from .paramdesign import ChannelBounds
from .transforms import DENSE_SIZE_LIMIT, AfdmParams, chirp_periodic_prefix, daft, daft_matrix, idaft


@dataclass
class EffectiveChannel:
    matrix: np.ndarray
    params: AfdmParams
    bounds: ChannelBounds | None = None

    def __matmul__(self, x):
        return self.matrix @ x


@lru_cache(maxsize=32)
def _dense_daft(p: AfdmParams) -> np.ndarray:
    A = daft_matrix(p)
    A.setflags(write=False)
    return A


def effective_channel(H: np.ndarray, p: AfdmParams, bounds: ChannelBounds | None = None) -> EffectiveChannel:
    H = np.asarray(H, dtype=np.complex128)
    if H.shape != (p.n, p.n):
        raise DimensionError(f"H must be {p.n}x{p.n}, got {H.shape}")
    if p.n > DENSE_SIZE_LIMIT:
        raise ResourceError(f"dense effective channel limited to n <= {DENSE_SIZE_LIMIT}")
    A = _dense_daft(p)
    return EffectiveChannel(A @ H @ A.conj().T, p, bounds)


def channel_effective(ch: ChannelRealization, p: AfdmParams) -> EffectiveChannel:
    """Effective channel of a realization, assembled from cached unit-path matrices."""
    M = np.zeros((p.n, p.n), dtype=np.complex128)
    for path in ch.paths:
        M += path.gain * unit_path_matrix(path.l, path.k, p, ch.bounds)
    return EffectiveChannel(M, p, ch.bounds)


def _check_cell(l: int, k: int, bounds: ChannelBounds) -> None:
    if not (0 <= l <= bounds.l_max and abs(k) <= bounds.k_max):
        raise DomainError(f"path ({l}, {k}) outside {bounds}")


@lru_cache(maxsize=256)
def unit_path_matrix(l: int, k: int, p: AfdmParams, bounds: ChannelBounds) -> np.ndarray:
    """Effective channel of a single unit-gain path (read-only, cached)."""
    _check_cell(l, k, bounds)
    ch = ChannelRealization((ChannelPath(l, k, 1.0),), bounds)
    M = effective_channel(time_channel_matrix(ch, p), p).matrix
    M.setflags(write=False)
    return M


@lru_cache(maxsize=1024)
def _template(l: int, k: int, p: AfdmParams, bounds: ChannelBounds, pilot: int) -> np.ndarray:
    ch = ChannelRealization((ChannelPath(l, k, 1.0),), bounds)
    e = np.zeros(p.n, dtype=np.complex128)
    e[pilot] = 1.0
    col = daft(apply_waveform(chirp_periodic_prefix(idaft(e, p), p), ch, p), p)
    col.setflags(write=False)
    return col


def single_path_template(
    l: int, k: int, p: AfdmParams, bounds: ChannelBounds, pilot: int = 0
) -> np.ndarray:
    """Column ``pilot`` of the unit-gain single-path effective channel.

    Computed with the fast transforms, so it is usable beyond the dense limit.
    For canonical AFDM parameters the column is an impulse at
    ``(pilot - diag_shift) mod n``.
    """
    _check_cell(l, k, bounds)
    if p.l_cpp < l:
        # the template must describe the same prefix-covered channel as the frame
        p = AfdmParams(p.n, p.c1, p.c2, bounds.l_max)
    return _template(l, k, p, bounds, pilot % p.n)


def cyclic_diagonals(matrix: np.ndarray) -> np.ndarray:
    """``D[d, r] = M[r, (r + d) mod n]``: row d holds cyclic diagonal offset d."""
    M = np.asarray(matrix)
    n = M.shape[0]
    r = np.arange(n)
    return M[r[None, :], (r[None, :] + r[:, None]) % n]


def _signed(d: int, n: int, window: range | None) -> int:
    if window is not None:
        for cand in (d, d - n):
            if cand in window:
                return cand
    return d - n if d > n // 2 else d


def diagonal_support(
    E: EffectiveChannel | np.ndarray, tol: float = 1e-6, window: range | None = None
) -> set[int]:
    """Signed cyclic diagonal offsets whose peak exceeds ``tol * max|E|``.

    Offsets are column minus row. They are reported in ``window`` when it
    contains them, otherwise in ``(-n/2, n/2]``.
    """
    M = E.matrix if isinstance(E, EffectiveChannel) else np.asarray(E)
    n = M.shape[0]
    peak = np.abs(M).max()
    if peak == 0:
        return set()
    diag_peaks = np.abs(cyclic_diagonals(M)).max(axis=1)
    return {_signed(int(d), n, window) for d in np.flatnonzero(diag_peaks > tol * peak)}


def off_support_energy(matrix: np.ndarray, offsets: set[int]) -> float:
    """Fraction of Frobenius energy outside the given cyclic diagonals."""
    D = np.abs(cyclic_diagonals(matrix)) ** 2
    n = D.shape[0]
    outside = np.ones(n, dtype=bool)
    outside[[d % n for d in offsets]] = False
    return float(D[outside].sum() / D.sum())


def instantaneous_frequency(p: AfdmParams) -> np.ndarray:
    """Normalized instantaneous frequency (cycles/sample, in [0, 1)) of each
    chirp subcarrier ``m`` at each sample ``t``; shape ``(n, n)`` indexed ``[m, t]``."""
    m = np.arange(p.n)[:, None]
    t = np.arange(p.n)[None, :]
    return np.mod(m / p.n + 2 * p.c1 * t, 1.0)
