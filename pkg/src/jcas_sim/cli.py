"""Command-line front end: ``sweep``, ``bench`` and ``demo`` subcommands.

Exit codes: 0 on success, 1 for configuration errors, 2 for runtime errors.
Angles are printed in degrees at this boundary; the library works in
radians internally.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import (
    ConfigError,
    ExperimentConfig,
    complexity_bench,
    emit_results,
    ber_sweep,
    load_config,
    _packet_rng,
    _sense,
    _KIND_TRIAL,
)
from . import harness as _harness


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1 (config error)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="jcas-sim", description="Uplink JCAS CSI estimation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[], help="Monte-Carlo BER/MSE sweep")
    sweep.add_argument("--config", help="flat key=value config file")
    sweep.add_argument("--snr-min", type=float, help="lowest SNR point in dB")
    sweep.add_argument("--snr-max", type=float, help="highest SNR point in dB")
    sweep.add_argument("--snr-step", type=float, default=1.0, help="SNR grid step in dB")
    sweep.add_argument("--mod", type=int, choices=(4, 16), help="QAM order")
    sweep.add_argument("--methods", help="comma list from ls,mmse,sakf")
    sweep.add_argument("--trials", type=int, help="packets per SNR point")
    sweep.add_argument("--seed", type=int, help="master seed")
    sweep.add_argument("--jobs", type=int, help="worker processes")
    sweep.add_argument("--timing", action="store_true", help="record wall times in the output")
    sweep.add_argument("--out", default="ber_results.csv", help="output path")
    sweep.add_argument("--format", default="csv", choices=("csv", "plotdata"), dest="fmt")

    bench = sub.add_parser("bench", help="complexity benchmark of the estimation steps")
    bench.add_argument("--sizes", default="16,64,256,1024", help="comma list of N = P*Q (squares)")
    bench.add_argument("--reps", type=int, default=5, help="repetitions per size")
    bench.add_argument("--out", help="optional CSV output path")

    demo = sub.add_parser("demo", help="single verbose trial")
    demo.add_argument("--config", help="flat key=value config file")
    demo.add_argument("--snr", type=float, default=0.0, help="SNR in dB")
    demo.add_argument("--mod", type=int, choices=(4, 16))
    demo.add_argument("--seed", type=int)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    overrides = {}
    if getattr(args, "snr_min", None) is not None or getattr(args, "snr_max", None) is not None:
        if args.snr_min is None or args.snr_max is None:
            raise ConfigError("--snr-min and --snr-max must be given together")
        if args.snr_max < args.snr_min:
            raise ConfigError("--snr-max must be >= --snr-min")
        count = int(round((args.snr_max - args.snr_min) / args.snr_step)) + 1
        overrides["snr_points_db"] = tuple(args.snr_min + i * args.snr_step for i in range(count))
    if getattr(args, "mod", None) is not None:
        overrides["modulation_order"] = args.mod
    if getattr(args, "methods", None):
        overrides["methods"] = tuple(m.strip().lower() for m in args.methods.split(",") if m.strip())
    if getattr(args, "trials", None) is not None:
        overrides["trials_per_point"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        overrides["workers"] = args.jobs
    if getattr(args, "timing", False):
        overrides["record_timing"] = True
    return replace(cfg, **overrides).validate()


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    table = ber_sweep(cfg)
    written = emit_results(table, args.out, args.fmt)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    result = complexity_bench(sizes, repetitions=args.reps)
    print(f"{'method':>6} {'N':>6} {'sec/estimate':>14}")
    for method, n, t in result.rows:
        print(f"{method:>6} {n:>6} {t:>14.3e}")
    for method, slope in result.slopes.items():
        print(f"log-log slope {method}: {slope:.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("method,size_n,seconds_per_estimate\n")
            for method, n, t in result.rows:
                fh.write(f"{method},{n},{t!r}\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_demo(args) -> int:
    cfg = _config_from_args(args)
    cfg = replace(cfg, trials_per_point=1).validate()
    snr = args.snr

    rng = _packet_rng(cfg, snr, _KIND_TRIAL, 0)
    paths = _harness.sample_paths(cfg.waveform(), cfg.path_bounds(), rng)
    print(f"single trial at {snr:.2f} dB SNR, {cfg.modulation_order}-QAM, seed {cfg.master_seed}")
    print("true paths (azimuth deg, elevation deg, |gain|):")
    for i, p in enumerate(paths):
        az, el = p.aoa_rx.to_degrees()
        print(f"  path {i}: az {az:8.3f}  el {el:8.3f}  |b| {abs(p.gain):.4f}")

    rhh = _harness.compute_rhh(cfg, snr) if "mmse" in cfg.methods else None
    packet = _harness._run_packet(cfg, snr, 0, list(cfg.methods), rhh=rhh)

    # Re-run the sensing chain for the trace.
    chi = _harness.transmit_bf_gains(paths, cfg.ue_array())
    pt = _harness.power_for_snr(10.0 ** (snr / 10.0), paths, chi, cfg.noise_var_w)
    wave = cfg.waveform(tx_power_w=pt)
    truth = _harness.true_csi(paths, _harness.OffsetProcess.zero(cfg.num_symbols), wave, cfg.bs_array(), chi,
                              dtype=cfg.complex_dtype)
    d = _harness.preamble_grid(cfg.num_subcarriers, cfg.num_symbols, rng).astype(cfg.complex_dtype)
    y = _harness.received_preamble(truth, d, cfg.noise_var_w, rng)
    aoa = _sense(cfg, _harness.ls_estimate(y, d))
    print(f"estimated number of paths: {aoa.est_num_paths}")
    print("estimated arrivals (azimuth deg, elevation deg):")
    for a in aoa.angles:
        az, el = a.to_degrees()
        print(f"  az {az:8.3f}  el {el:8.3f}")
    print(f"estimated noise power: {aoa.est_noise_var:.4e} W (configured {cfg.noise_var_w:.4e} W)")
    for method in cfg.methods:
        r = packet[method]
        print(f"{method:>5}: channel MSE {r.channel_mse:.4e}  BER {r.errors}/{r.bits} = {r.errors / r.bits:.3e}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "demo":
            return _cmd_demo(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ValueError, FileNotFoundError) as exc:
        print(f"jcas-sim: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"jcas-sim: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
