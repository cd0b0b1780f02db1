"""Command-line entry points for the experiment harness.

Exit codes: 0 success, 2 configuration error, 3 partial failure (some
instances were skipped; see stderr and manifest.json).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace

from . import io, sweeps
from .config import ExperimentConfig, ModelSpec, ProposalSpec, load_config
from .errors import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _default_config(command: str) -> ExperimentConfig:
    """Desk-scale defaults used when no --config file is given."""
    if command in ("ising-bound", "gap-grid"):
        model = ModelSpec(kind="ising_chain", sizes=(8,), field_halfwidth=0.0)
    else:
        model = ModelSpec(kind="sk", sizes=(7, 8, 9, 10))
    proposal = ProposalSpec()
    if command == "gap-grid" and model.kind == "ising_chain":
        proposal = ProposalSpec(
            kind="quench",
            h_values=tuple(round(0.1 * i, 10) for i in range(1, 21)),
            t_mode="finite",
            t_values=tuple(round(0.25 * i, 10) for i in range(1, 25)),
        )
    instances = 1 if model.kind == "ising_chain" else 100
    return ExperimentConfig(model=model, proposal=proposal, instances=instances)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.max_dim is not None:
        if args.max_dim < 2:
            raise ConfigError("--max-dim must be at least 2")
        cfg = replace(cfg, max_spins=int(math.floor(math.log2(args.max_dim))))
    threads = args.threads
    if threads is None:
        env = os.environ.get("QMCMC_THREADS")
        if env is not None:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ConfigError(f"QMCMC_THREADS must be an integer, got {env!r}") from exc
    if threads is not None:
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = replace(cfg, threads=threads)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def _finish(out_dir: str, cfg: ExperimentConfig, result: sweeps.SweepResult) -> int:
    io.write_resolved_config(out_dir, cfg.resolved())
    io.write_manifest(out_dir, result.rows, result.wall_time_s, result.failures)
    if result.failures:
        io.log(f"[qmcmc] {result.failures} group(s) failed and were skipped")
        return EXIT_PARTIAL
    return EXIT_OK


def _run_command(args) -> int:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = _default_config(args.command)
    cfg = _apply_overrides(cfg, args)
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    io.write_resolved_config(out_dir, cfg.resolved())

    if args.command == "gap-grid":
        result = sweeps.run_gap_grid(cfg, out_dir)
    elif args.command == "gap-scaling":
        if args.with_ipr:
            result = sweeps.run_glass_sweep(cfg, out_dir)
        else:
            result = sweeps.run_gap_grid(cfg, out_dir)
            rows = sweeps.fit_gaps_csv(
                os.path.join(out_dir, "gaps.csv"),
                os.path.join(out_dir, sweeps.GAP_FITS_FILE),
                means_path=os.path.join(out_dir, sweeps.GAP_MEANS_FILE),
            )
            result.rows[sweeps.GAP_FITS_FILE] = rows
    elif args.command == "baselines":
        result = sweeps.classical_baselines(cfg, out_dir)
    elif args.command == "ipr-scan":
        result = sweeps.run_ipr_scan(cfg, out_dir)
    elif args.command == "ising-bound":
        result = sweeps.run_ising_bound(cfg, out_dir)
    elif args.command == "time-trace":
        result = sweeps.run_time_trace(cfg, out_dir, gaps_csv=args.gaps)
    elif args.command == "cuts":
        result = sweeps.run_cut_reports(cfg, out_dir)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown command {args.command!r}")
    return _finish(out_dir, cfg, result)


def _run_fit(args) -> int:
    if not os.path.exists(args.input):
        raise ConfigError(f"input CSV not found: {args.input}")
    out_dir = args.out or os.path.dirname(args.input) or "."
    os.makedirs(out_dir, exist_ok=True)
    start = time.perf_counter()
    rows = sweeps.fit_gaps_csv(
        args.input,
        os.path.join(out_dir, sweeps.GAP_FITS_FILE),
        means_path=os.path.join(out_dir, sweeps.GAP_MEANS_FILE),
    )
    io.write_manifest(
        out_dir, {sweeps.GAP_FITS_FILE: rows}, time.perf_counter() - start, failures=0
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmcmc",
        description="Quench-proposal Markov chain gap experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON experiment configuration", default=None)
        p.add_argument("--out", help="output directory (overrides config)", default=None)
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (or env QMCMC_THREADS)")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--max-dim", type=int, default=None,
                       help="largest dense matrix dimension (2^N guard)")

    for name, help_text in [
        ("gap-grid", "spectral gaps over the configured (h, t) grid"),
        ("gap-scaling", "long-time gaps over sizes with 2^{-kN} fits"),
        ("baselines", "uniform and single-flip classical chains with fits"),
        ("ipr-scan", "IPR energy-window averages and scaling exponents"),
        ("ising-bound", "closed-form chain bound vs exact gaps"),
        ("time-trace", "gap vs quench time at the best/worst field"),
        ("cuts", "bound-ladder reports over energy-superlevel cuts"),
    ]:
        p = sub.add_parser(name, help=help_text)
        add_common(p)
        if name == "gap-scaling":
            p.add_argument("--with-ipr", action="store_true",
                           help="also emit IPR windows/exponents from the same spectra")
        if name == "time-trace":
            p.add_argument("--gaps", default=None,
                           help="existing long-time gaps.csv to pick h_max/h_min from")

    fit = sub.add_parser("fit", help="fit 2^{-kN} scaling to an existing gaps CSV")
    fit.add_argument("--input", required=True, help="gaps CSV produced by a sweep")
    fit.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "fit":
            return _run_fit(args)
        return _run_command(args)
    except ConfigError as exc:
        io.log(f"[qmcmc] configuration error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
