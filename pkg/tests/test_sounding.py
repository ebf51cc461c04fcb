import numpy as np
import pytest

from afdm_icsc.errors import ConfigMismatchError, DomainError, InsufficientDataError
from afdm_icsc.estimator import EstimatedPath, EstimationReport
from afdm_icsc.paramdesign import ChannelBounds, WaveformKind, canonical_params
from afdm_icsc.sounding import (
    PhysicalGrid,
    SoundingAccumulator,
    accumulate,
    cell_dps,
    dps,
    pdp,
    profile_csv,
    rms_delay_spread,
    rms_doppler_spread,
    summarize,
)

B = ChannelBounds(2, 1)
P = canonical_params(WaveformKind.AFDM, 32, B)
GRID = PhysicalGrid.for_params(P, 10e6)


def report(cells_gains, params=P, bounds=B):
    paths = [EstimatedPath(l, k, complex(g), abs(g), 0) for (l, k), g in cells_gains]
    return EstimationReport(paths, 0.0, 0.0, params, bounds)


def constant_run(cells_gains, frames=256):
    return accumulate(report(cells_gains) for _ in range(frames))


class TestGrid:
    def test_units(self):
        g = PhysicalGrid(10e6, 256, 2)
        assert g.subcarrier_spacing == pytest.approx(39062.5)
        assert g.symbol_duration_t == pytest.approx(25.6e-6)
        assert g.frame_period == pytest.approx(25.8e-6)
        assert g.delay_s(3) == pytest.approx(3e-7)
        assert g.doppler_hz(-1) == pytest.approx(-39062.5)

    def test_bad_bandwidth(self):
        with pytest.raises(DomainError):
            PhysicalGrid(0.0, 16)


class TestAccumulator:
    def test_missing_frames_are_zero(self):
        acc = accumulate([report([((0, 0), 1.0)]), report([]), report([((1, 1), 2.0)])])
        np.testing.assert_array_equal(acc.gains((0, 0)), [1, 0, 0])
        np.testing.assert_array_equal(acc.gains((1, 1)), [0, 0, 2])
        assert acc.frame_count == 3

    def test_mismatch(self):
        acc = SoundingAccumulator(P, B)
        with pytest.raises(ConfigMismatchError):
            acc.add(report([], bounds=ChannelBounds(1, 1)))

    def test_merge(self):
        a = accumulate([report([((0, 0), 1.0)])] * 2)
        b = accumulate([report([((2, 0), 1.0)])] * 3)
        m = a.merge(b)
        assert m.frame_count == 5
        np.testing.assert_array_equal(m.gains((0, 0)), [1, 1, 0, 0, 0])
        np.testing.assert_array_equal(m.gains((2, 0)), [0, 0, 1, 1, 1])

    def test_empty(self):
        with pytest.raises(InsufficientDataError):
            accumulate([])


class TestPdp:
    def test_single_tap(self):
        rows = pdp(constant_run([((1, 0), 0.5)], 4), GRID)
        np.testing.assert_allclose(rows[:, 1], [0, 1, 0])
        assert rms_delay_spread(rows) == 0.0

    def test_two_equal_taps(self):
        rows = pdp(constant_run([((0, 0), 1.0), ((2, 1), 1j)], 4), GRID)
        np.testing.assert_allclose(rows[:, 1], [0.5, 0, 0.5])
        assert rms_delay_spread(rows) == pytest.approx(2e-7 / 2)

    def test_normalized(self):
        rows = pdp(constant_run([((0, 0), 3.0), ((1, -1), 1.0), ((1, 1), 2.0)], 4), GRID)
        assert rows[:, 1].sum() == pytest.approx(1.0)
        assert rows[1, 1] == pytest.approx(5 / 14)

    def test_scales_with_bandwidth(self):
        acc = constant_run([((0, 0), 1.0), ((2, 0), 1.0)], 4)
        a = rms_delay_spread(pdp(acc, PhysicalGrid(10e6, 32)))
        b = rms_delay_spread(pdp(acc, PhysicalGrid(20e6, 32)))
        assert a == pytest.approx(2 * b)


class TestDps:
    def test_constant_gain_is_dc(self):
        rows = dps(constant_run([((0, 0), 1.0)]), GRID)
        dc = np.argmin(np.abs(rows[:, 0]))
        assert rows[dc, 1] / rows[:, 1].sum() > 0.99 * 0.5  # Hann main lobe spans 3 bins
        assert rows[dc - 1 : dc + 2, 1].sum() / rows[:, 1].sum() > 0.99

    def test_tone_and_integral(self):
        frames = 4096
        t = np.arange(frames)
        g = np.exp(2j * np.pi * 0.125 * t)
        acc = accumulate(report([((0, 0), gi)]) for gi in g)
        rows = dps(acc, GRID)
        f_peak = rows[np.argmax(rows[:, 1]), 0]
        assert f_peak == pytest.approx(0.125 / GRID.frame_period, rel=1e-9)
        df = rows[1, 0] - rows[0, 0]
        assert rows[:, 1].sum() * df == pytest.approx(1.0, rel=0.02)
        assert rms_doppler_spread(rows) < 0.01 / GRID.frame_period

    def test_too_few_frames(self):
        acc = constant_run([((0, 0), 1.0)], 10)
        with pytest.raises(InsufficientDataError):
            dps(acc, GRID)
        with pytest.raises(InsufficientDataError):
            cell_dps(acc, GRID, (0, 0))

    def test_spread_of_empty_profile(self):
        with pytest.raises(DomainError):
            rms_doppler_spread(np.zeros((4, 2)))


class TestSummary:
    def test_flags_missing_detections(self):
        acc = accumulate([report([])] * 100)
        s = summarize(acc, GRID)
        assert s.insufficient_detections
        assert s.rms_delay_spread_s is None

    def test_report_json(self):
        s = summarize(constant_run([((0, 0), 1.0), ((1, 1), 1.0)], 128), GRID)
        assert not s.insufficient_detections
        d = s.to_dict()
        assert [c["l"] for c in d["cells"]] == [0, 1]
        assert '"frame_count": 128' in s.to_json()

    def test_csv(self):
        assert profile_csv(np.array([[0.0, 0.5], [1e-7, 0.5]]), ["delay_s", "power"]) == (
            "delay_s,power\n0,0.5\n1e-07,0.5\n"
        )
