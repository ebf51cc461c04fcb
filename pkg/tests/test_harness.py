import json
import math

import pytest

from afdm_icsc.cli import main
from afdm_icsc.errors import ConfigError
from afdm_icsc.harness import ExperimentConfig, run_ber_sweep, run_design, run_sounding, validate, wilson_interval
from afdm_icsc.paramdesign import ChannelBounds


def small_cfg(**kw):
    base = dict(n=32, bounds=ChannelBounds(2, 1), p_count=3, snr_d_list=[10.0], frames_per_point=4,
                sounding_frames=128)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_round_trip(self):
        cfg = small_cfg(snr_d_list=[5.0, math.inf], snr_p=-math.inf)
        back = ExperimentConfig.from_json(cfg.to_json())
        assert back == cfg
        assert '"-inf"' in cfg.to_json()

    def test_unknown_field(self):
        with pytest.raises(ConfigError) as e:
            ExperimentConfig.from_dict({"frames": 3})
        assert e.value.reason == "unknown_field"

    @pytest.mark.parametrize(
        "kw,reason",
        [
            ({"waveforms": ["OTFS"]}, "otfs_unsupported"),
            ({"waveforms": ["FOO"]}, "unknown_waveform"),
            ({"waveforms": []}, "no_waveforms"),
            ({"frames_per_point": 0}, "frames"),
            ({"snr_d_list": []}, "snr_list"),
            ({"csi_mode": "genie"}, "csi_mode"),
            ({"csi_mode": "estimated"}, "estimation_requires_afdm"),
            ({"p_count": 10}, "infeasible_paths"),
            ({"power_profile": [0.5, 0.5, 0.5]}, "power_profile"),
            ({"n": 8, "bounds": ChannelBounds(3, 1)}, "orthogonality"),
            ({"n": 16, "bounds": ChannelBounds(2, 1)}, "guard_overflow"),
            ({"f_d_norm": 0.6}, "doppler"),
            ({"threshold_mult": 0}, "threshold"),
        ],
    )
    def test_reason_codes(self, kw, reason):
        with pytest.raises(ConfigError) as e:
            validate(small_cfg(**kw))
        assert e.value.reason == reason

    def test_defaults_valid(self):
        validate(ExperimentConfig())


class TestDesign:
    def test_n32_delay2_doppler1(self):
        d = run_design(32, ChannelBounds(2, 1))
        assert d["c1_fraction"] == "3/64"
        assert d["guard_q"] == 8
        assert d["pilot_overhead_fraction"] == "17/32"
        assert d["data_symbols"] == 15
        assert sorted(d["shift_table"].values()) == list(range(-1, 8))
        assert d["shifts_distinct"]

    def test_ofdm_collides(self):
        assert not run_design(16, ChannelBounds(1, 1), "OFDM")["shifts_distinct"]


class TestSimulation:
    def test_wilson(self):
        lo, hi = wilson_interval(10, 1000)
        assert lo < 0.01 < hi
        assert wilson_interval(0, 100)[0] == 0.0

    def test_noiseless_zero_ber(self):
        rows = run_ber_sweep(small_cfg(snr_d_list=[math.inf]))
        assert [r.ber for r in rows] == [0.0, 0.0, 0.0]
        assert all(r.evm < 1e-6 for r in rows)

    def test_noiseless_estimated_zero_ber(self):
        rows = run_ber_sweep(small_cfg(waveforms=["AFDM"], snr_d_list=[math.inf], csi_mode="estimated"))
        assert rows[0].ber == 0.0

    def test_common_random_numbers(self):
        a = run_ber_sweep(small_cfg(waveforms=["AFDM"], snr_d_list=[5.0]))
        b = run_ber_sweep(small_cfg(waveforms=["OFDM", "AFDM"], snr_d_list=[0.0, 5.0]))
        assert a[0] == b[-1]

    def test_workers_match_serial(self):
        cfg = small_cfg(snr_d_list=[0.0, 10.0])
        assert run_ber_sweep(cfg) == run_ber_sweep(small_cfg(snr_d_list=[0.0, 10.0], workers=2))

    def test_sounding_noiseless_matches_truth(self):
        run = run_sounding(small_cfg(snr_d_sounding=math.inf))
        assert run.comparison["pdp_taps_estimated"] == run.comparison["pdp_taps_true"]
        assert max(e for e in run.comparison["pdp_tap_relative_error"] if e is not None) < 1e-9

    def test_sounding_without_pilot(self):
        run = run_sounding(small_cfg(snr_p=-math.inf))
        assert run.report.insufficient_detections


class TestCli:
    def test_design_stdout(self, capsys):
        assert main(["design", "--n", "32", "--l-max", "2", "--k-max", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["guard_q"] == 8

    def test_otfs_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"waveforms": ["OTFS"]}))
        assert main(["ber-sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "otfs_unsupported"

    def test_emit_config(self, capsys):
        assert main(["ber-sweep", "--n", "64", "--emit-config"]) == 0
        assert ExperimentConfig.from_json(capsys.readouterr().out).n == 64

    def test_effective_channel(self, tmp_path):
        assert main(["effective-channel", "--out", str(tmp_path), "--p-count", "1", "--seed", "3"]) == 0
        summary = json.loads((tmp_path / "heff.json").read_text())
        assert summary["n"] == 16 and len(summary["diagonal_support"]) == 1
        assert (tmp_path / "heff.csv").read_text().count("\n") == 257

    def test_ber_sweep_reproducible(self, tmp_path):
        args = ["ber-sweep", "--n", "32", "--l-max", "2", "--k-max", "1", "--p-count", "3",
                "--snr-d", "0,10", "--frames", "3", "--seed", "9"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / "ber.csv").read_bytes() == (tmp_path / "b" / "ber.csv").read_bytes()
