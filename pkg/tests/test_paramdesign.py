import itertools
from fractions import Fraction

import pytest

from afdm_icsc.errors import DomainError, NoPathError
from afdm_icsc.paramdesign import (
    ChannelBounds,
    WaveformKind,
    canonical_params,
    check_orthogonality,
    cpp_length,
    default_c2,
    diag_shift,
    guard_count,
    min_c1,
    min_c1_exact,
    otfs_guard_area,
    shift_to_delay_doppler,
)

AFDM, OFDM, OCDM = WaveformKind.AFDM, WaveformKind.OFDM, WaveformKind.OCDM


@pytest.mark.parametrize(
    "k_max,xi,n,expected",
    [(1, 0, 32, Fraction(3, 64)), (0, 0, 16, Fraction(1, 32)), (1, 1, 1024, Fraction(5, 2048))],
)
def test_min_c1(k_max, xi, n, expected):
    b = ChannelBounds(0, k_max, xi)
    assert min_c1_exact(b, n) == expected
    assert min_c1(b, n) == float(expected)


class TestDefaultC2:
    @pytest.mark.parametrize("n", [32, 1024])
    def test_below_threshold(self, n):
        assert 0 < default_c2(n) < 1 / (2 * n * n)

    def test_ofdm(self):
        assert default_c2(32, OFDM) == 0.0


class TestGuardCount:
    def test_n32_delay2_doppler1(self):
        assert guard_count(32, 3 / 64, 2) == 8

    def test_second_example(self):
        assert guard_count(16, 3 / 32, 1) == 5

    def test_degenerate(self):
        assert guard_count(16, 0.0, 0) == 0

    def test_negative_c1(self):
        with pytest.raises(DomainError):
            guard_count(16, -0.1, 1)

    def test_non_canonical_rounds_up(self):
        # 2*16*0.1*2 - 1 = 5.4
        assert guard_count(16, 0.1, 1) == 6

    def test_canonical_grid(self):
        for l_max, k_max, xi in itertools.product(range(9), range(5), range(3)):
            b = ChannelBounds(l_max, k_max, xi)
            n = 4096
            assert guard_count(n, min_c1(b, n), l_max) == (2 * (k_max + xi) + 1) * (l_max + 1) - 1


class TestOrthogonality:
    def test_n16_delay1_doppler1(self):
        assert check_orthogonality(ChannelBounds(1, 1), 16)

    def test_n32_delay2_doppler1(self):
        assert check_orthogonality(ChannelBounds(2, 1), 32)

    def test_violation(self):
        assert not check_orthogonality(ChannelBounds(7, 3), 16)

    def test_boundary(self):
        # 2*1*2 + 1 = 5
        assert check_orthogonality(ChannelBounds(1, 1), 5)
        assert not check_orthogonality(ChannelBounds(1, 1), 4)


class TestShiftMap:
    def test_examples(self):
        assert diag_shift(AFDM, 1, 1, 1) == 4
        assert diag_shift(OFDM, 1, 1, 1) == 1
        assert diag_shift(OCDM, 1, 1, 1) == 2
        for kind in WaveformKind:
            assert diag_shift(kind, 0, 0, 3) == 0

    def test_doppler_out_of_range(self):
        with pytest.raises(DomainError):
            diag_shift(AFDM, 0, 2, 1)

    def test_inverse_examples(self):
        b = ChannelBounds(2, 1)
        assert shift_to_delay_doppler(4, b) == (1, 1)
        assert shift_to_delay_doppler(0, b) == (0, 0)
        assert shift_to_delay_doppler(-1, b) == (0, -1)

    @pytest.mark.parametrize("d", [-2, 8])
    def test_inverse_out_of_window(self, d):
        with pytest.raises(NoPathError):
            shift_to_delay_doppler(d, ChannelBounds(2, 1))

    @pytest.mark.parametrize("l_max,k_max", [(0, 0), (1, 1), (2, 1), (3, 2), (5, 4)])
    def test_round_trip(self, l_max, k_max):
        b = ChannelBounds(l_max, k_max)
        for l, k in b.cells():
            assert shift_to_delay_doppler(diag_shift(AFDM, l, k, k_max), b) == (l, k)

    @pytest.mark.parametrize("l_max,k_max", [(1, 1), (2, 1)])
    def test_injectivity(self, l_max, k_max):
        cells = ChannelBounds(l_max, k_max).cells()
        afdm = [diag_shift(AFDM, l, k, k_max) for l, k in cells]
        ofdm = [diag_shift(OFDM, l, k, k_max) for l, k in cells]
        assert len(set(afdm)) == len(cells)
        assert len(set(ofdm)) < len(cells)


def test_guard_overhead_below_otfs():
    b = ChannelBounds(2, 1)
    q = guard_count(32, min_c1(b, 32), b.l_max)
    assert otfs_guard_area(b) == 25
    assert 2 * q + 1 < 2 * q + 2 < otfs_guard_area(b)


class TestCpp:
    def test_minimal(self):
        assert cpp_length(2) == 2
        assert cpp_length(0) == 0

    def test_override(self):
        assert cpp_length(1, 4) == 4
        assert cpp_length(3, 1) == 3


def test_canonical_params():
    b = ChannelBounds(1, 1)
    assert canonical_params(OFDM, 16, b) == canonical_params("OFDM", 16, b)
    p = canonical_params(AFDM, 16, b)
    assert (p.c1, p.l_cpp) == (3 / 32, 1)
    assert canonical_params(OCDM, 16, b).c1 == 1 / 32


def test_bounds_validation():
    with pytest.raises(DomainError):
        ChannelBounds(-1, 0)
    assert ChannelBounds(1, 1).grid_size == 6
