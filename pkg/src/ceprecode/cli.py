"""Command-line front end.

Subcommands: channel-gen, precode, rate, min-power, sweep-tau, sweep-n.
Global flags: --seed, --config FILE, --out PATH, --threads, --paper-scale.
All outputs are pure functions of (config, seed); errors print a single
machine-readable line ``error: <message>`` and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from . import rng as streams
from .baseline import UnreachableTargetError, zf_min_power
from .channel import PowerDelayProfile, generate_channel
from .frames import gaussian_symbols
from .harness import (
    ExperimentConfig,
    ce_min_power,
    rows_to_csv,
    sweep_antennas,
    sweep_tau,
    SweepRow,
)
from .precoder import precode_frame
from .rate import ergodic_rate
from .serial import channel_to_dict, load_json, phase_frame_to_dict, save_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ceprecode",
        description="Constant-envelope precoding simulator for frequency-selective "
        "massive MIMO downlinks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="master RNG seed")
        p.add_argument("--config", type=str, default=None, help="JSON experiment config")
        p.add_argument("--out", type=str, default=None, help="output path")
        p.add_argument(
            "--threads", type=int, default=None,
            help="worker threads (default: CE_PRECODE_THREADS or 1)",
        )
        p.add_argument(
            "--paper-scale", action="store_true",
            help="use the full-size defaults (N=80, M=10) instead of desk scale",
        )
        return p

    p = common(sub.add_parser("channel-gen", help="draw a channel tensor to JSON"))
    p.add_argument("-N", type=int, default=None)
    p.add_argument("-M", type=int, default=None)
    p.add_argument("-L", type=int, default=None)

    p = common(sub.add_parser("precode", help="precode one Gaussian symbol frame"))
    p.add_argument("--channel", type=str, default=None, help="channel_tensor JSON")
    p.add_argument("--energy", type=float, default=1.0, help="per-user symbol energy")

    p = common(sub.add_parser("rate", help="ergodic rate bound at a fixed power"))
    p.add_argument("--power-db", type=float, default=0.0, help="P_T/sigma^2 in dB")
    p.add_argument("--energy", type=float, default=1.0, help="per-user symbol energy")

    common(sub.add_parser("min-power", help="minimum power for the target rate (CE and ZF)"))

    p = common(sub.add_parser("sweep-tau", help="block-length sweep (one row per L, tau)"))
    p.add_argument("--tau-list", type=str, default=None, help="comma list, default L,2L,3L,6L")
    p.add_argument("--L-list", type=str, default=None, help="comma list, default config L")

    p = common(sub.add_parser("sweep-n", help="antenna sweep (one row per N)"))
    p.add_argument("--N-list", type=str, default=None, help="comma list, default N,2N,4N")

    return parser


def load_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_json(args.config)
    elif args.paper_scale:
        cfg = ExperimentConfig.paper_scale()
    else:
        cfg = ExperimentConfig.desk_scale()
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)
    return cfg


def thread_count(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("CE_PRECODE_THREADS")
    return max(1, int(env)) if env else 1


def emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _int_list(text, default):
    if text is None:
        return default
    return [int(v) for v in text.split(",") if v.strip()]


def cmd_channel_gen(args) -> int:
    cfg = load_config(args)
    N = args.N or cfg.N
    M = args.M or cfg.M
    L = args.L or cfg.L
    pdp = PowerDelayProfile.uniform(L)
    H = generate_channel(streams.substream(cfg.rng_seed, streams.CHANNEL, 0), N, M, pdp)
    emit(json.dumps(channel_to_dict(H, seed=cfg.rng_seed, pdp=pdp)) + "\n", args.out)
    return 0


def cmd_precode(args) -> int:
    cfg = load_config(args)
    if args.channel:
        from .serial import channel_from_dict

        H = channel_from_dict(load_json(args.channel))
    else:
        H = generate_channel(
            streams.substream(cfg.rng_seed, streams.CHANNEL, 0),
            cfg.N, cfg.M, PowerDelayProfile.uniform(cfg.L),
        )
    U = gaussian_symbols(
        H.n_users, cfg.T, args.energy, streams.substream(cfg.rng_seed, streams.SYMBOLS, 0)
    )
    theta, report = precode_frame(H, U, cfg.precoder_config())
    payload = {
        "phase_frame": phase_frame_to_dict(theta),
        "report": report.to_json_dict(),
        "mean_residual_energy": report.final_objective / (H.n_users * cfg.T),
    }
    emit(json.dumps(payload) + "\n", args.out)
    return 0


def cmd_rate(args) -> int:
    cfg = load_config(args)
    est = ergodic_rate(
        cfg.N, cfg.M, cfg.L, args.energy, 10.0 ** (args.power_db / 10.0), cfg.T,
        cfg.precoder_config(), cfg.n_channels, cfg.n_symbol_frames, cfg.rng_seed,
        n_threads=thread_count(args),
    )
    emit(json.dumps(est.to_json_dict() | {"config": cfg.to_json_dict()}) + "\n", args.out)
    return 0


def cmd_min_power(args) -> int:
    cfg = load_config(args)
    threads = thread_count(args)
    ce = ce_min_power(cfg, n_threads=threads)
    zf_db = zf_min_power(
        cfg.N, cfg.M, cfg.L, cfg.target_rate_bpcu, cfg.n_channels, cfg.rng_seed
    )
    row = SweepRow(
        sweep_var="none", L=cfg.L, tau=cfg.tau, N=cfg.N, M=cfg.M,
        E_star=ce.e_star, ce_min_db=ce.power_db, zf_min_db=zf_db,
        gap_db=ce.power_db - zf_db, rate_se=ce.rate_se,
    )
    emit(rows_to_csv([row], cfg.rng_seed, __version__), args.out)
    return 0


def cmd_sweep_tau(args) -> int:
    cfg = load_config(args)
    tau_default = sorted({cfg.L, 2 * cfg.L, 3 * cfg.L, 6 * cfg.L})
    taus = _int_list(args.tau_list, tau_default)
    Ls = _int_list(args.L_list, [cfg.L])
    rows = sweep_tau(cfg, taus, Ls, n_threads=thread_count(args))
    emit(rows_to_csv(rows, cfg.rng_seed, __version__), args.out)
    return 0


def cmd_sweep_n(args) -> int:
    cfg = load_config(args)
    ns = _int_list(args.N_list, [cfg.N, 2 * cfg.N, 4 * cfg.N])
    rows = sweep_antennas(cfg, ns, n_threads=thread_count(args))
    emit(rows_to_csv(rows, cfg.rng_seed, __version__), args.out)
    return 0


COMMANDS = {
    "channel-gen": cmd_channel_gen,
    "precode": cmd_precode,
    "rate": cmd_rate,
    "min-power": cmd_min_power,
    "sweep-tau": cmd_sweep_tau,
    "sweep-n": cmd_sweep_n,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnreachableTargetError as exc:
        print(
            f"error: {exc} bracket_rates=[{exc.rate_lo:.6f},{exc.rate_hi:.6f}]",
            file=sys.stderr,
        )
        return 3


if __name__ == "__main__":
    sys.exit(main())
