"""Experiment runner: configuration, BER sweeps, sounding campaigns and
parameter-design reports.

Every frame draws its randomness from ``default_rng([seed, stream, frame])``,
so results do not depend on worker count or scheduling, and every waveform and
SNR point sees the same channels, bits and unit-variance noise draws (common
random numbers keep curve comparisons tight).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .channel import Scenario, add_awgn, apply_waveform, jakes_gains, noise_variance, sample_channel
from .effective import channel_effective
from .errors import ConfigError
from .estimator import DEFAULT_THRESHOLD_MULT, EstimatedPath, EstimationReport, estimate_paths, reconstruct_heff
from .modem import FrameLayout, build_frame, compute_evm, demap_qpsk, demodulate, lmmse_detect, modulate, pilot_power
from .paramdesign import (
    ChannelBounds,
    WaveformKind,
    canonical_params,
    check_orthogonality,
    cpp_length,
    default_c2,
    diag_shift,
    guard_count,
    min_c1_exact,
    otfs_guard_area,
)
from .sounding import PhysicalGrid, SoundingReport, accumulate, summarize

CSI_MODES = ("perfect", "estimated")
_BER_STREAM = 1
_SOUND_STREAM = 2


def _db(x) -> float:
    """JSON-friendly dB value; accepts 'inf'/'-inf' strings."""
    return float(x)


def _db_out(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass
class ExperimentConfig:
    waveforms: list[str] = field(default_factory=lambda: ["OFDM", "OCDM", "AFDM"])
    n: int = 256
    bounds: ChannelBounds = field(default_factory=lambda: ChannelBounds(1, 1))
    p_count: int = 6
    power_profile: list[float] | None = None
    snr_d_list: list[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0])
    snr_p: float = 35.0
    snr_d_sounding: float = 20.0
    frames_per_point: int = 400
    min_bits: int = 0
    f_d_norm: float = 0.05
    seed: int = 0
    csi_mode: str = "perfect"
    bandwidth_hz: float = 10e6
    threshold_mult: float = DEFAULT_THRESHOLD_MULT
    sounding_frames: int = 10_000
    workers: int = 1
    batch_frames: int = 16

    @property
    def grid(self) -> PhysicalGrid:
        return PhysicalGrid(self.bandwidth_hz, self.n, cpp_length(self.bounds.l_max))

    @property
    def profile(self) -> list[float]:
        if self.power_profile is not None:
            return list(self.power_profile)
        return [1.0 / self.p_count] * self.p_count

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["bounds"] = dataclasses.asdict(self.bounds)
        d["snr_d_list"] = [_db_out(x) for x in self.snr_d_list]
        d["snr_p"] = _db_out(self.snr_p)
        d["snr_d_sounding"] = _db_out(self.snr_d_sounding)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError("unknown_field", f"unknown config fields: {sorted(unknown)}")
        d = dict(d)
        if "bounds" in d and isinstance(d["bounds"], dict):
            d["bounds"] = ChannelBounds(**d["bounds"])
        if "snr_d_list" in d:
            d["snr_d_list"] = [_db(x) for x in d["snr_d_list"]]
        for key in ("snr_p", "snr_d_sounding"):
            if key in d:
                d[key] = _db(d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


def validate(cfg: ExperimentConfig) -> None:
    """Raise ``ConfigError`` with a reason code for every infeasible setup."""
    kinds = []
    for w in cfg.waveforms:
        if not isinstance(w, WaveformKind) and str(w).upper() == "OTFS":
            raise ConfigError("otfs_unsupported", "OTFS is a comparison-only waveform and is not simulated")
        try:
            kinds.append(WaveformKind.parse(w))
        except ValueError:
            raise ConfigError("unknown_waveform", f"unknown waveform {w!r}") from None
    if not kinds:
        raise ConfigError("no_waveforms", "at least one waveform is required")
    if cfg.n < 2:
        raise ConfigError("frame_size", "n must be >= 2")
    if cfg.frames_per_point < 1 or cfg.sounding_frames < 1:
        raise ConfigError("frames", "frame counts must be >= 1")
    if not cfg.snr_d_list:
        raise ConfigError("snr_list", "snr_d_list must be non-empty")
    if cfg.csi_mode not in CSI_MODES:
        raise ConfigError("csi_mode", f"csi_mode must be one of {CSI_MODES}")
    if cfg.csi_mode == "estimated" and any(k is not WaveformKind.AFDM for k in kinds):
        raise ConfigError("estimation_requires_afdm", "pilot-based estimation is only defined for AFDM")
    if cfg.p_count < 1 or cfg.p_count > cfg.bounds.grid_size:
        raise ConfigError(
            "infeasible_paths", f"{cfg.p_count} paths do not fit {cfg.bounds.grid_size} delay-Doppler cells"
        )
    prof = cfg.profile
    if len(prof) != cfg.p_count or any(x < 0 for x in prof) or not math.isclose(sum(prof), 1.0, rel_tol=1e-9):
        raise ConfigError("power_profile", "power_profile needs p_count non-negative entries summing to 1")
    if not check_orthogonality(cfg.bounds, cfg.n):
        b = cfg.bounds
        lhs = 2 * (b.k_max + b.xi) * (b.l_max + 1) + b.l_max
        raise ConfigError("orthogonality", f"2(k_max+xi)(l_max+1)+l_max = {lhs} exceeds n = {cfg.n}")
    q = afdm_guard(cfg.n, cfg.bounds)
    if cfg.n - 2 * q - 1 <= 0:
        raise ConfigError("guard_overflow", f"guards (Q={q}) leave no data symbols at n={cfg.n}")
    if not 0 < cfg.f_d_norm < 0.5:
        raise ConfigError("doppler", "f_d_norm must lie in (0, 0.5)")
    if cfg.threshold_mult <= 0:
        raise ConfigError("threshold", "threshold_mult must be positive")


def afdm_guard(n: int, bounds: ChannelBounds) -> int:
    return guard_count(n, float(min_c1_exact(bounds, n)), bounds.l_max)


# --- BER sweep -------------------------------------------------------------


@dataclass
class BerRow:
    waveform: str
    snr_db: float
    ber: float
    ci_low: float
    ci_high: float
    evm: float
    frames: int
    bits: int
    errors: int


def wilson_interval(errors: int, bits: int) -> tuple[float, float]:
    ci = binomtest(errors, bits).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def _frame_rng(seed: int, stream: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream, *key])


def _simulate_ber_frame(cfg, p, layout, snr_d, frame):
    rng = _frame_rng(cfg.seed, _BER_STREAM, frame)
    ch = sample_channel(cfg.p_count, cfg.bounds, cfg.profile, rng)
    bits = rng.integers(0, 2, 2 * cfg.n, dtype=np.int8)[: 2 * layout.n_data]
    noise = rng.standard_normal((2, p.n))
    n0 = noise_variance(snr_d)
    f = build_frame(bits, layout, pilot_power(cfg.snr_p, snr_d))
    r = apply_waveform(modulate(f, p), ch, p)
    r = r + (noise[0] + 1j * noise[1]) * math.sqrt(n0 / 2)
    y = demodulate(r, p)
    if cfg.csi_mode == "perfect":
        H = channel_effective(ch, p).matrix
    else:
        rep = estimate_paths(y, layout, p, cfg.bounds, cfg.threshold_mult, f.pilot_value, noise_var=n0)
        H = reconstruct_heff(rep.paths, p, cfg.bounds).matrix
        # each estimated gain carries error variance n0/|pilot|^2; fold it into the
        # detector's noise term since it acts as extra noise on unit-power data
        if f.pilot_value:
            n0 = n0 * (1 + len(rep.paths) / abs(f.pilot_value) ** 2)
    x_hat = lmmse_detect(y, H, n0, layout, f.pilot_value)
    rx_bits = demap_qpsk(x_hat)
    err = int(np.count_nonzero(rx_bits != bits))
    sq_err = float(np.sum(np.abs(x_hat - f.data_symbols) ** 2))
    return err, bits.size, sq_err, float(np.sum(np.abs(f.data_symbols) ** 2))


def _run_point(cfg: ExperimentConfig, kind: WaveformKind, layout: FrameLayout, snr_d: float) -> BerRow:
    p = canonical_params(kind, cfg.n, cfg.bounds)
    errors = bits = frames = 0
    sq_err = ref = 0.0
    while frames < cfg.frames_per_point:
        stop = min(frames + cfg.batch_frames, cfg.frames_per_point)
        for fr in range(frames, stop):
            e, b, se, rp = _simulate_ber_frame(cfg, p, layout, snr_d, fr)
            errors += e
            bits += b
            sq_err += se
            ref += rp
        frames = stop
        if errors and bits >= cfg.min_bits:
            lo, hi = wilson_interval(errors, bits)
            if (hi - lo) / 2 < errors / bits / 5:
                break
    lo, hi = wilson_interval(errors, bits)
    return BerRow(kind.value, snr_d, errors / bits, lo, hi, 100 * math.sqrt(sq_err / ref), frames, bits, errors)


def run_ber_sweep(cfg: ExperimentConfig) -> list[BerRow]:
    """BER/EVM per (waveform, SNRd); one shared AFDM-sized pilot layout for all waveforms."""
    validate(cfg)
    layout = FrameLayout.embedded(cfg.n, afdm_guard(cfg.n, cfg.bounds))
    jobs = [(WaveformKind.parse(w), snr) for w in cfg.waveforms for snr in cfg.snr_d_list]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            futures = [pool.submit(_run_point, cfg, k, layout, snr) for k, snr in jobs]
            return [f.result() for f in futures]
    return [_run_point(cfg, k, layout, snr) for k, snr in jobs]


def ber_csv(rows: Sequence[BerRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["waveform", "snr_db", "ber", "ci_low", "ci_high", "evm", "frames"])
    for r in rows:
        w.writerow([r.waveform, _db_out(r.snr_db), f"{r.ber:.10g}", f"{r.ci_low:.10g}",
                    f"{r.ci_high:.10g}", f"{r.evm:.10g}", r.frames])
    return buf.getvalue()


# --- sounding --------------------------------------------------------------


@dataclass
class SoundingRun:
    report: SoundingReport
    truth: SoundingReport
    scenario: Scenario
    comparison: dict

    def to_json(self) -> str:
        extra = {
            "scenario": self.scenario.to_dict(),
            "ground_truth": self.truth.to_dict(),
            "comparison": self.comparison,
        }
        return self.report.to_json(extra)


def sounding_scenario(cfg: ExperimentConfig) -> Scenario:
    """Fixed path geometry for a campaign, drawn once from the config seed."""
    ch = sample_channel(cfg.p_count, cfg.bounds, cfg.profile, _frame_rng(cfg.seed, _SOUND_STREAM, 0, 0))
    order = sorted(range(cfg.p_count), key=lambda i: (ch.paths[i].l, ch.paths[i].k))
    return Scenario(
        cells=[(ch.paths[i].l, ch.paths[i].k) for i in order],
        powers=[cfg.profile[i] for i in order],
        bounds=cfg.bounds,
        f_d_norm=cfg.f_d_norm,
        seed=cfg.seed,
    )


def run_sounding(cfg: ExperimentConfig, scenario: Scenario | None = None) -> SoundingRun:
    """AFDM sounding campaign with Jakes-faded path gains and a ground-truth block."""
    validate(cfg)
    scenario = scenario or sounding_scenario(cfg)
    p = canonical_params(WaveformKind.AFDM, cfg.n, cfg.bounds)
    layout = FrameLayout.embedded(cfg.n, afdm_guard(cfg.n, cfg.bounds))
    frames = cfg.sounding_frames
    gains = np.stack([
        jakes_gains(cfg.f_d_norm, frames, pw, _frame_rng(cfg.seed, _SOUND_STREAM, 1, i)).gains
        for i, pw in enumerate(scenario.powers)
    ])
    snr_d = cfg.snr_d_sounding
    n0 = noise_variance(snr_d)
    pp = 0.0 if cfg.snr_p == -math.inf else pilot_power(cfg.snr_p, snr_d)

    reports, truths = [], []
    for t in range(frames):
        rng = _frame_rng(cfg.seed, _SOUND_STREAM, 2, t)
        ch = scenario.realize(gains[:, t])
        bits = rng.integers(0, 2, 2 * layout.n_data, dtype=np.int8)
        noise = rng.standard_normal((2, p.n))
        f = build_frame(bits, layout, pp)
        r = apply_waveform(modulate(f, p), ch, p) + (noise[0] + 1j * noise[1]) * math.sqrt(n0 / 2)
        reports.append(estimate_paths(demodulate(r, p), layout, p, cfg.bounds, cfg.threshold_mult,
                                      f.pilot_value, noise_var=n0))
        truths.append(EstimationReport(
            [EstimatedPath(c.l, c.k, c.gain, abs(c.gain), 0) for c in ch.paths], 0.0, 0.0, p, cfg.bounds))

    grid = cfg.grid
    est = summarize(accumulate(reports), grid)
    truth = summarize(accumulate(truths), grid)
    return SoundingRun(est, truth, scenario, _compare(est, truth))


def _rel(a, b):
    if a is None or b is None or b == 0:
        return None
    return abs(a - b) / abs(b)


def _compare(est: SoundingReport, truth: SoundingReport) -> dict:
    tp = truth.pdp[:, 1]
    ep = est.pdp[:, 1]
    tap_err = [float(abs(e - t) / t) if t > 0 else None for e, t in zip(ep, tp)]
    return {
        "pdp_tap_relative_error": tap_err,
        "pdp_taps_estimated": [int(i) for i in np.flatnonzero(ep > 0)],
        "pdp_taps_true": [int(i) for i in np.flatnonzero(tp > 0)],
        "rms_delay_spread_relative_error": _rel(est.rms_delay_spread_s, truth.rms_delay_spread_s),
        "rms_doppler_spread_relative_error": _rel(est.rms_doppler_spread_hz, truth.rms_doppler_spread_hz),
    }


# --- design ----------------------------------------------------------------


def run_design(n: int, bounds: ChannelBounds, kind: WaveformKind | str = WaveformKind.AFDM) -> dict:
    """All design quantities for frame size ``n`` under ``bounds``."""
    kind = WaveformKind.parse(kind)
    if kind is WaveformKind.AFDM:
        c1 = min_c1_exact(bounds, n)
    elif kind is WaveformKind.OCDM:
        c1 = Fraction(1, 2 * n)
    else:
        c1 = Fraction(0)
    q = guard_count(n, float(c1), bounds.l_max)
    shifts = {
        f"{l},{k}": diag_shift(kind, l, k, bounds.k_max)
        for l, k in bounds.cells()
    }
    return {
        "waveform": kind.value,
        "n": n,
        "bounds": dataclasses.asdict(bounds),
        "c1": float(c1),
        "c1_fraction": str(c1),
        "c2": default_c2(n, kind),
        "guard_q": q,
        "l_cpp": cpp_length(bounds.l_max),
        "orthogonal": check_orthogonality(bounds, n),
        "shift_table": shifts,
        "shifts_distinct": len(set(shifts.values())) == len(shifts),
        "pilot_overhead": (2 * q + 1) / n,
        "pilot_overhead_fraction": str(Fraction(2 * q + 1, n)),
        "data_symbols": n - 2 * q - 1,
        "otfs_guard_area": otfs_guard_area(bounds),
    }
