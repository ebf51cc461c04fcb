"""Command-line interface: ``afdm-icsc {design,effective-channel,ber-sweep,sound}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .channel import sample_channel
from .effective import channel_effective, diagonal_support, instantaneous_frequency
from .errors import AfdmError, ConfigError
from .harness import ExperimentConfig, ber_csv, run_ber_sweep, run_design, run_sounding, validate
from .paramdesign import ChannelBounds, WaveformKind, canonical_params, shift_window
from .sounding import profile_csv

log = logging.getLogger("afdm_icsc")

EXIT_CONFIG = 2


def _load_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        cfg = ExperimentConfig()
    overrides = {}
    for name in ("n", "seed", "p_count", "frames_per_point", "sounding_frames", "snr_p", "f_d_norm",
                 "csi_mode", "workers", "min_bits"):
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if getattr(args, "waveforms", None):
        overrides["waveforms"] = args.waveforms.split(",")
    if getattr(args, "snr_d", None):
        overrides["snr_d_list"] = [float(x) for x in args.snr_d.split(",")]
    if any(getattr(args, k, None) is not None for k in ("l_max", "k_max", "xi")):
        b = cfg.bounds
        overrides["bounds"] = ChannelBounds(
            args.l_max if args.l_max is not None else b.l_max,
            args.k_max if args.k_max is not None else b.k_max,
            args.xi if args.xi is not None else b.xi,
        )
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return cfg


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    log.info("wrote %s", out / name)


def cmd_design(args) -> int:
    cfg = _load_config(args)
    kind = args.waveform or "AFDM"
    report = run_design(cfg.n, cfg.bounds, kind)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(Path(args.out), "design.json", text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_effective(args) -> int:
    cfg = _load_config(args)
    if args.n is None and not args.config:
        cfg.n = 16
    kind = WaveformKind.parse(args.waveform or "AFDM")
    p = canonical_params(kind, cfg.n, cfg.bounds)
    ch = sample_channel(cfg.p_count, cfg.bounds, cfg.profile, cfg.seed)
    E = channel_effective(ch, p)
    mag = np.abs(E.matrix)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "magnitude"])
    for r in range(cfg.n):
        for c in range(cfg.n):
            w.writerow([r, c, f"{mag[r, c]:.12g}"])
    out = Path(args.out or ".")
    _write(out, "heff.csv", buf.getvalue())

    freq = instantaneous_frequency(p) * cfg.bandwidth_hz
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subcarrier", "sample", "time_s", "frequency_hz"])
    for m in range(cfg.n):
        for t in range(cfg.n):
            w.writerow([m, t, f"{t / cfg.bandwidth_hz:.12g}", f"{freq[m, t]:.12g}"])
    _write(out, "tf.csv", buf.getvalue())

    summary = {
        "waveform": kind.value,
        "n": cfg.n,
        "c1": p.c1,
        "c2": p.c2,
        "paths": [{"l": q.l, "k": q.k} for q in ch.paths],
        "diagonal_support": sorted(diagonal_support(E, window=shift_window(cfg.bounds) if kind is WaveformKind.AFDM else None)),
    }
    _write(out, "heff.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_ber(args) -> int:
    cfg = _load_config(args)
    validate(cfg)
    rows = run_ber_sweep(cfg)
    out = Path(args.out or ".")
    _write(out, "ber.csv", ber_csv(rows))
    return 0


def cmd_sound(args) -> int:
    cfg = _load_config(args)
    validate(cfg)
    run = run_sounding(cfg)
    out = Path(args.out or ".")
    _write(out, "sounding.json", run.to_json())
    _write(out, "pdp.csv", profile_csv(run.report.pdp, ["delay_s", "power"]))
    _write(out, "dps.csv", profile_csv(run.report.dps, ["doppler_hz", "power"]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="afdm-icsc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--l-max", dest="l_max", type=int)
    common.add_argument("--k-max", dest="k_max", type=int)
    common.add_argument("--xi", type=int)
    common.add_argument("--p-count", dest="p_count", type=int)
    common.add_argument("--emit-config", action="store_true", help="print the resolved config and exit")

    p = sub.add_parser("design", parents=[common], help="parameter-design report")
    p.add_argument("--waveform", choices=[k.value for k in WaveformKind])
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("effective-channel", parents=[common], help="dump |H_eff| heatmap data")
    p.add_argument("--waveform", choices=[k.value for k in WaveformKind])
    p.set_defaults(func=cmd_effective)

    p = sub.add_parser("ber-sweep", parents=[common], help="Monte Carlo BER vs SNRd")
    p.add_argument("--waveforms", help="comma-separated, e.g. OFDM,OCDM,AFDM")
    p.add_argument("--snr-d", dest="snr_d", help="comma-separated SNRd values in dB")
    p.add_argument("--snr-p", dest="snr_p", type=float)
    p.add_argument("--frames", dest="frames_per_point", type=int)
    p.add_argument("--min-bits", dest="min_bits", type=int)
    p.add_argument("--csi", dest="csi_mode", choices=["perfect", "estimated"])
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("sound", parents=[common], help="channel-sounding campaign")
    p.add_argument("--snr-p", dest="snr_p", type=float)
    p.add_argument("--frames", dest="sounding_frames", type=int)
    p.add_argument("--f-d", dest="f_d_norm", type=float, help="max Doppler, cycles per frame")
    p.set_defaults(func=cmd_sound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.emit_config:
            sys.stdout.write(_load_config(args).to_json())
            return 0
        return args.func(args)
    except ConfigError as e:
        sys.stderr.write(json.dumps({"error": e.reason, "message": e.message}) + "\n")
        return EXIT_CONFIG
    except AfdmError as e:
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
