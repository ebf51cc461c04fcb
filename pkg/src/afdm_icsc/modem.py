"""Transmit/receive chain: QPSK, embedded-pilot frames, IDAFT modulation with
chirp-periodic prefix, DAFT demodulation, LMMSE detection and link metrics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError
from .transforms import AfdmParams, chirp_periodic_prefix, daft, idaft

SQRT_HALF = np.sqrt(0.5)


class RegularizationWarning(RuntimeWarning):
    """LMMSE system was singular and a diagonal load was added."""


def map_qpsk(bits) -> np.ndarray:
    """Gray QPSK: bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)."""
    b = np.asarray(bits, dtype=np.int8).ravel()
    if b.size % 2:
        raise DimensionError(f"QPSK needs an even number of bits, got {b.size}")
    b = b.reshape(-1, 2)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) * SQRT_HALF


def demap_qpsk(symbols) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.complex128).ravel()
    return np.stack([s.real < 0, s.imag < 0], axis=1).astype(np.int8).ravel()


@dataclass(frozen=True)
class FrameLayout:
    """Pilot/guard/data partition of one DAFT-domain frame."""

    n: int
    pilot_index: int
    q: int
    data_indices: tuple[int, ...]

    @classmethod
    def embedded(cls, n: int, q: int, pilot_index: int | None = None) -> "FrameLayout":
        """Single pilot flanked by ``q`` zero guards per side; pilot defaults to index ``q``."""
        if q < 0:
            raise DomainError("guard count must be non-negative")
        if n - 2 * q - 1 <= 0:
            raise DomainError(f"no room for data: n={n}, q={q}")
        pilot = q if pilot_index is None else pilot_index % n
        reserved = {(pilot + i) % n for i in range(-q, q + 1)}
        data = tuple(i for i in range(n) if i not in reserved)
        return cls(n, pilot, q, data)

    @property
    def guard_indices(self) -> tuple[int, ...]:
        return tuple((self.pilot_index + i) % self.n for i in range(-self.q, self.q + 1) if i)

    @property
    def n_data(self) -> int:
        return len(self.data_indices)


@dataclass
class Frame:
    daft_symbols: np.ndarray
    payload_bits: np.ndarray
    layout: FrameLayout
    pilot_value: complex

    @property
    def data_symbols(self) -> np.ndarray:
        return self.daft_symbols[list(self.layout.data_indices)]


def pilot_power(snr_p_db: float, snr_d_db: float) -> float:
    """Pilot power relative to unit-power data so that both SNRs hold at one noise level.

    With no noise (``snr_d_db = inf``) the ratio is undefined and unit power is used.
    """
    if np.isinf(snr_d_db):
        return 1.0
    return float(10 ** ((snr_p_db - snr_d_db) / 10))


def build_frame(bits, layout: FrameLayout, pilot_power: float = 1.0) -> Frame:
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if bits.size != 2 * layout.n_data:
        raise DimensionError(f"layout carries {2 * layout.n_data} bits, got {bits.size}")
    x = np.zeros(layout.n, dtype=np.complex128)
    x[list(layout.data_indices)] = map_qpsk(bits)
    pv = complex(np.sqrt(pilot_power))
    x[layout.pilot_index] = pv
    return Frame(x, bits, layout, pv)


def modulate(f: Frame | np.ndarray, p: AfdmParams) -> np.ndarray:
    """IDAFT of the frame symbols with the chirp-periodic prefix prepended."""
    x = f.daft_symbols if isinstance(f, Frame) else f
    return chirp_periodic_prefix(idaft(x, p), p)


def demodulate(r: np.ndarray, p: AfdmParams) -> np.ndarray:
    """DAFT of a prefix-stripped received frame."""
    return daft(r, p)


def lmmse_detect(
    y: np.ndarray,
    H_eff: np.ndarray,
    noise_var: float,
    layout: FrameLayout,
    pilot_value: complex = 0.0,
) -> np.ndarray:
    """LMMSE estimates of the data symbols of ``y = H_eff x + w``.

    The known pilot is cancelled first; the data columns ``Hd`` are then
    equalized with ``(Hd^H Hd + noise_var I)^-1 Hd^H y``, the push-through
    form of ``Hd^H (Hd Hd^H + noise_var I)^-1 y``.
    """
    if noise_var < 0:
        raise DomainError("noise_var must be non-negative")
    H = getattr(H_eff, "matrix", H_eff)
    y = np.asarray(y, dtype=np.complex128)
    if pilot_value:
        y = y - H[:, layout.pilot_index] * pilot_value
    Hd = np.ascontiguousarray(H[:, list(layout.data_indices)])
    # lower triangle of Hd^H Hd; cho_factor only reads that triangle
    G = scipy.linalg.blas.zherk(1.0, Hd, trans=2, lower=1)
    G[np.diag_indices_from(G)] += noise_var
    rhs = Hd.conj().T @ y
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(G, lower=True, check_finite=False), rhs)
    except np.linalg.LinAlgError:
        warnings.warn("singular LMMSE system, adding 1e-12 diagonal load", RegularizationWarning, stacklevel=2)
        G = np.tril(G) + np.tril(G, -1).conj().T
        G[np.diag_indices_from(G)] += 1e-12
        return scipy.linalg.lstsq(G, rhs)[0]


def compute_ber(tx_bits, rx_bits) -> float:
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size == 0 or tx.size != rx.size:
        raise DimensionError("bit sequences must be non-empty and of equal length")
    return float(np.count_nonzero(tx != rx) / tx.size)


def compute_evm(tx_syms, rx_syms) -> float:
    """RMS error vector magnitude in percent of the RMS reference."""
    tx = np.asarray(tx_syms, dtype=np.complex128).ravel()
    rx = np.asarray(rx_syms, dtype=np.complex128).ravel()
    if tx.size == 0 or tx.size != rx.size:
        raise DimensionError("symbol sequences must be non-empty and of equal length")
    return float(100 * np.sqrt(np.sum(np.abs(rx - tx) ** 2) / np.sum(np.abs(tx) ** 2)))
