"""Command line entry point: ``tdbeam example1 | sweep | solve``.

Log verbosity comes from the ``TDBEAM_LOG_LEVEL`` environment variable
(default ``WARNING``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from .channel import dbm_to_watts, sample_channels
from .harness import Example1Mismatch, ScenarioConfig, run_example1, run_scheme, run_sweep, trial_seed
from .schemes import SCHEMES


def _scheme_list(text: str):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown scheme(s) {bad}; choose from {SCHEMES}")
    return names


def _load(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.trials is not None:
        over["num_trials"] = args.trials
    if args.schemes is not None:
        over["schemes"] = args.schemes
    return replace(cfg, **over) if over else cfg


def _cmd_example1(args) -> int:
    try:
        run_example1(out=sys.stdout, check=True)
    except Example1Mismatch as exc:
        print(f"MISMATCH: {exc}", file=sys.stderr)
        return 1
    print("example 1: all published values reproduced")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    res = run_sweep(cfg, args.out, threads=args.threads, timing=args.timing)
    failed = sum(1 for r in res.raw if str(r["status"]).startswith("error"))
    print(f"wrote {res.raw_path} ({len(res.raw)} rows) and {res.aggregate_path}")
    if failed:
        print(f"{failed} scheme runs failed; see the status column", file=sys.stderr)
    return 0


def _cmd_solve(args) -> int:
    cfg = _load(args)
    p_dbm = args.p_dbm if args.p_dbm is not None else cfg.p_max_dbm_grid[0]
    M = args.antennas if args.antennas is not None else cfg.m_grid[0]
    ch = sample_channels(cfg.channel_model(M), trial_seed(cfg.seed, args.trial))
    p_max = dbm_to_watts(p_dbm)
    print(f"instance: p_max {p_dbm:g} dBm ({p_max:g} W), M={M}, K={cfg.num_ers}, "
          f"trial {args.trial}, seed {cfg.seed}")
    for name in cfg.schemes:
        sched, rep = run_scheme(name, ch, p_max, cfg.block_length, cfg.eh, cfg.algorithm)
        active = int(np.sum(sched.durations > 1e-12 * cfg.block_length))
        print(f"{name}: min DC {rep.min_dc_energy:.6f}  mean DC {rep.mean_dc_energy:.6f}  "
              f"status {rep.status}  slots {active}/{sched.num_slots}  "
              f"outer {rep.outer_iterations} inner {rep.inner_iterations}")
        for c in rep.certificates:
            gap = "n/a" if c.duality_gap_bound is None else f"{c.duality_gap_bound:.2e}"
            print(f"    certificate: objective {c.objective:.6g}  primal residual "
                  f"{c.primal_residual:.2e}  gap bound {gap}  status {c.status}  "
                  f"iterations {c.iterations}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tdbeam", description="Time-division energy beamforming")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("example1", help="reproduce the two-receiver example")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file (defaults used if omitted)")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--schemes", type=_scheme_list, help="comma separated subset")
    common.add_argument("--threads", type=int, default=1, help="worker processes")

    sw = sub.add_parser("sweep", parents=[common], help="Monte Carlo sweep to CSV")
    sw.add_argument("--out", required=True, help="output directory")
    sw.add_argument("--timing", action="store_true",
                    help="fill wall_ms (makes output run-dependent)")

    so = sub.add_parser("solve", parents=[common], help="one instance with certificates")
    so.add_argument("--p-dbm", type=float, help="transmit power (default: first grid value)")
    so.add_argument("--antennas", type=int, help="M (default: first grid value)")
    so.add_argument("--trial", type=int, default=0)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("TDBEAM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handler = {"example1": _cmd_example1, "sweep": _cmd_sweep, "solve": _cmd_solve}
    try:
        return handler[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
