"""Parameter design rules: chirp rates, guard count, prefix length and the
delay-Doppler to DAFT-domain shift map."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, NoPathError
from .transforms import AfdmParams


@dataclass(frozen=True)
class ChannelBounds:
    """Maximum normalized delay ``l_max``, Doppler ``k_max`` and the extra
    fractional-Doppler guard ``xi``."""

    l_max: int
    k_max: int
    xi: int = 0

    def __post_init__(self):
        for name in ("l_max", "k_max", "xi"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {v}")

    @property
    def grid_size(self) -> int:
        return (self.l_max + 1) * (2 * self.k_max + 1)

    def cells(self) -> list[tuple[int, int]]:
        """All in-bounds ``(l, k)`` pairs, delay-major."""
        return [
            (l, k)
            for l in range(self.l_max + 1)
            for k in range(-self.k_max, self.k_max + 1)
        ]


class WaveformKind(str, enum.Enum):
    OFDM = "OFDM"
    OCDM = "OCDM"
    AFDM = "AFDM"

    @classmethod
    def parse(cls, value) -> "WaveformKind":
        """Case-insensitive lookup that also accepts members."""
        return value if isinstance(value, cls) else cls(str(value).upper())


def min_c1(b: ChannelBounds, n: int) -> float:
    """Smallest c1 giving full diversity; used with equality as the canonical c1."""
    return float(min_c1_exact(b, n))


def min_c1_exact(b: ChannelBounds, n: int) -> Fraction:
    return Fraction(2 * (b.k_max + b.xi) + 1, 2 * n)


def default_c2(n: int, kind: WaveformKind = WaveformKind.AFDM) -> float:
    """Deterministic irrational c2 = 1/(2 pi n^2), below 1/(2 n^2)."""
    if kind is WaveformKind.OFDM:
        return 0.0
    if kind is WaveformKind.OCDM:
        return 1.0 / (2 * n)
    return 1.0 / (2.0 * math.pi * n * n)


def guard_count(n: int, c1: float, l_max: int) -> int:
    """Smallest Q with ``Q >= 2 n c1 (l_max + 1) - 1``, clamped at zero."""
    if c1 < 0:
        raise DomainError("c1 must be non-negative")
    # Fraction keeps the canonical case exact, e.g. 2*32*(3/64)*3 - 1 == 8
    bound = 2 * n * Fraction(c1).limit_denominator(1 << 40) * (l_max + 1) - 1
    return max(0, math.ceil(bound))


def check_orthogonality(b: ChannelBounds, n: int) -> bool:
    return 2 * (b.k_max + b.xi) * (b.l_max + 1) + b.l_max <= n


def cpp_length(l_max: int, override: int | None = None) -> int:
    """Minimum prefix covering the maximum delay; ``override`` may only enlarge it."""
    if l_max < 0:
        raise DomainError("l_max must be non-negative")
    if override is None:
        return l_max
    return max(l_max, override)


def diag_shift(kind: WaveformKind, l: int, k: int, k_max: int) -> int:
    """Signed cyclic-diagonal offset (column minus row) induced by path (l, k)."""
    if abs(k) > k_max:
        raise DomainError(f"|k|={abs(k)} exceeds k_max={k_max}")
    if l < 0:
        raise DomainError("delay must be non-negative")
    kind = WaveformKind.parse(kind)
    if kind is WaveformKind.OFDM:
        return k
    if kind is WaveformKind.OCDM:
        return l + k
    return l * (2 * k_max + 1) + k


def shift_window(b: ChannelBounds) -> range:
    """Signed AFDM shifts reachable by in-bounds paths."""
    return range(-b.k_max, b.l_max * (2 * b.k_max + 1) + b.k_max + 1)


def shift_to_delay_doppler(d: int, b: ChannelBounds) -> tuple[int, int]:
    """Invert the AFDM shift map."""
    if d not in shift_window(b):
        raise NoPathError(f"shift {d} outside window [{shift_window(b).start}, {shift_window(b).stop - 1}]")
    width = 2 * b.k_max + 1
    l = (d + b.k_max) // width
    return l, d - l * width


def canonical_params(
    kind: WaveformKind, n: int, b: ChannelBounds, l_cpp: int | None = None
) -> AfdmParams:
    """Chirp parameters for ``kind`` under bounds ``b`` with the minimal prefix."""
    kind = WaveformKind.parse(kind)
    l_cpp = cpp_length(b.l_max, l_cpp)
    if kind is WaveformKind.OFDM:
        return AfdmParams.ofdm(n, l_cpp)
    if kind is WaveformKind.OCDM:
        return AfdmParams.ocdm(n, l_cpp)
    return AfdmParams(n, min_c1(b, n), default_c2(n), l_cpp)


def otfs_guard_area(b: ChannelBounds) -> int:
    """Guard area of a standard OTFS embedded pilot, for overhead comparison only."""
    return (2 * b.l_max + 1) * (4 * b.k_max + 1)
