"""Discrete affine Fourier transform (DAFT) and its inverse.

The forward transform is ``A = L(c2) F L(c1)`` with ``L(c) = diag(exp(-j 2 pi c n^2))``
and ``F`` the unitary DFT. ``daft`` maps time samples to the DAFT domain
(demodulation); ``idaft`` is the modulation direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidSizeError, ResourceError

DENSE_SIZE_LIMIT = 4096


@dataclass(frozen=True)
class AfdmParams:
    """Waveform parameterization shared by transmitter and receiver.

    OFDM is ``c1 = c2 = 0``; OCDM is ``c1 = c2 = 1/(2n)``.
    """

    n: int
    c1: float
    c2: float
    l_cpp: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidSizeError(f"n must be an integer >= 2, got {self.n}")
        if int(self.l_cpp) != self.l_cpp or self.l_cpp < 0:
            raise InvalidSizeError(f"l_cpp must be a non-negative integer, got {self.l_cpp}")

    @classmethod
    def ofdm(cls, n: int, l_cpp: int = 0) -> "AfdmParams":
        return cls(n, 0.0, 0.0, l_cpp)

    @classmethod
    def ocdm(cls, n: int, l_cpp: int = 0) -> "AfdmParams":
        return cls(n, 1.0 / (2 * n), 1.0 / (2 * n), l_cpp)


def chirp_diag(c: float, n: int) -> np.ndarray:
    """Diagonal of ``L(c)``: entry k is ``exp(-j 2 pi c k^2)``."""
    if n < 1:
        raise InvalidSizeError(f"chirp length must be >= 1, got {n}")
    k = np.arange(n, dtype=np.float64)
    # reduce c*k^2 modulo 1 before scaling so large k keep full phase precision
    phase = np.mod(c * k * k, 1.0)
    return np.exp(-2j * np.pi * phase)


def _check_len(x: np.ndarray, p: AfdmParams) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != p.n:
        raise DimensionError(f"expected trailing length {p.n}, got {x.shape[-1]}")
    return x


def daft(x: np.ndarray, p: AfdmParams) -> np.ndarray:
    """Fast forward DAFT along the last axis (chirp, FFT, chirp)."""
    x = _check_len(x, p)
    return chirp_diag(p.c2, p.n) * np.fft.fft(chirp_diag(p.c1, p.n) * x, norm="ortho")


def idaft(X: np.ndarray, p: AfdmParams) -> np.ndarray:
    """Fast inverse DAFT along the last axis; this is the modulator."""
    X = _check_len(X, p)
    return np.conj(chirp_diag(p.c1, p.n)) * np.fft.ifft(
        np.conj(chirp_diag(p.c2, p.n)) * X, norm="ortho"
    )


def dft_matrix(n: int) -> np.ndarray:
    m = np.arange(n)
    return np.exp(-2j * np.pi * (np.outer(m, m) % n) / n) / np.sqrt(n)


def daft_matrix(p: AfdmParams, limit: int = DENSE_SIZE_LIMIT) -> np.ndarray:
    """Dense ``A = L(c2) F L(c1)``; ``idaft`` corresponds to ``A.conj().T``."""
    if p.n > limit:
        raise ResourceError(f"dense DAFT of size {p.n} exceeds limit {limit}")
    return chirp_diag(p.c2, p.n)[:, None] * dft_matrix(p.n) * chirp_diag(p.c1, p.n)[None, :]


def chirp_periodic_prefix(s: np.ndarray, p: AfdmParams) -> np.ndarray:
    """Prepend the ``p.l_cpp``-sample chirp-periodic prefix to the body ``s``.

    Prefix sample ``-q`` is ``s[n - q] * exp(-j 2 pi c1 (n^2 - 2 n q))``; with
    ``c1 = 0`` this is the ordinary cyclic prefix.
    """
    s = _check_len(s, p)
    q = np.arange(p.l_cpp, 0, -1)
    n = p.n
    phase = np.mod(p.c1 * (n * n - 2.0 * n * q), 1.0)
    prefix = s[..., n - q] * np.exp(-2j * np.pi * phase)
    return np.concatenate([prefix, s], axis=-1)
