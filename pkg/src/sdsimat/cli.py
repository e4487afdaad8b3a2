"""Command-line entry point: ``sdsimat {simulate,pilots,coherence,recover}``."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import config_hash, config_to_dict, load_config
from .exceptions import SdsImatError
from .harness import failure_warning, run_coherence_experiment, run_experiment, trial_rng
from .io import (
    read_complex_csv,
    read_pattern_file,
    write_csv,
    write_metadata,
    write_rows,
    write_taps_csv,
)
from .ofdm import PilotObservation
from .pilots import (
    PilotPattern,
    cds_family,
    coherence,
    coherence_lower_bound,
    is_cds,
    load_base_cds,
    random_pattern,
    random_search,
)
from .recovery import METHODS, MeasurementSystem, RecoveryConfig

log = logging.getLogger("sdsimat")


def _cmd_simulate(args):
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["trials_per_point"] = args.trials
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["output_path"] = args.out
    cfg = replace(cfg, **overrides)

    start = time.perf_counter()
    points = run_experiment(cfg)
    wall = time.perf_counter() - start
    if cfg.output_path is None:
        write_csv(points, sys.stdout)
        return 0
    out = Path(cfg.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(points, out)
    write_metadata(
        out.with_name(out.name + ".meta.json"),
        config=config_to_dict(cfg),
        config_hash=config_hash(cfg),
        master_seed=cfg.master_seed,
        wall_time_s=wall,
        mse_definition="sum over trials of ||h_hat - h||^2 divided by sum of ||h||^2",
        failure_warning=failure_warning(points),
        equalization_singular_events={f"{p.method}@{p.snr_db:g}dB": p.equalization_singular_events for p in points},
    )
    log.info("wrote %s (%.1f s)", out, wall)
    return 0


def _pilot_pattern(args):
    mode = args.mode
    if mode == "cds":
        return cds_family(load_base_cds(args.n, args.np), args.shift, args.multiplier), None
    rng = trial_rng(args.seed, 2**32 - 1, 0, 3)
    if mode == "random":
        return random_pattern(args.n, args.np, rng), None
    return random_search(args.n, args.np, args.l, args.iterations, rng)


def _cmd_pilots(args):
    pattern, trace = _pilot_pattern(args)
    mu = coherence(pattern, args.l)
    params = is_cds(pattern)
    header = ("n", "np", "l", "mode", "coherence", "lower_bound", "is_cds", "guarantee", "pattern")
    row = (
        args.n,
        args.np,
        args.l,
        args.mode,
        mu,
        coherence_lower_bound(args.n, args.np),
        params is not None,
        mu < 1 / (2 * args.k),
        " ".join(str(i) for i in pattern.indices),
    )
    if args.out:
        write_rows(args.out, header, [row])
    else:
        write_rows(sys.stdout, header, [row])
    if trace is not None:
        rows = [(i + 1, float(v)) for i, v in enumerate(trace)]
        if args.trace:
            write_rows(args.trace, ("iteration", "best_coherence"), rows)
        else:
            sys.stdout.write("\n")
            write_rows(sys.stdout, ("iteration", "best_coherence"), rows)
    return 0


def _cmd_coherence(args):
    rows = run_coherence_experiment(args.n, args.np, args.l, args.iterations, args.seed)
    write_rows(args.out or sys.stdout, ("iteration", "random_search_best", "cds_value"), rows)
    return 0


def _cmd_recover(args):
    values = read_complex_csv(args.observation)
    pattern = PilotPattern(args.n, tuple(read_pattern_file(args.pattern)))
    msys = MeasurementSystem.build(pattern, args.l)
    obs = PilotObservation(values, pattern, args.noise_variance)
    cfg = load_config(args.config).recovery if args.config else RecoveryConfig()
    if args.method == "oracle":
        if args.support is None:
            raise SdsImatError("--support is required for the oracle method")
        support = [int(s) for s in args.support.split(",") if s.strip()]
        result = METHODS["oracle"](obs, msys, support)
    else:
        result = METHODS[args.method](obs, msys, cfg)
    write_taps_csv(args.out or sys.stdout, result.estimate.as_vector)
    log.info("%s: %d iterations, residual %.3g", result.method, result.iterations_used, result.residual_norm)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="sdsimat", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    sim.add_argument("--config", required=True, help="YAML file or preset:<name>")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--trials", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--out")
    sim.set_defaults(func=_cmd_simulate)

    pil = sub.add_parser("pilots", help="design a pilot pattern and report its coherence")
    pil.add_argument("--n", type=int, default=91)
    pil.add_argument("--np", type=int, default=10)
    pil.add_argument("--l", type=int, default=32)
    pil.add_argument("--k", type=int, default=4, help="sparsity for the mu < 1/(2K) guarantee flag")
    pil.add_argument("--mode", choices=("cds", "random-search", "random"), default="cds")
    pil.add_argument("--iterations", type=int, default=1000)
    pil.add_argument("--seed", type=int, default=2022)
    pil.add_argument("--shift", type=int, default=0)
    pil.add_argument("--multiplier", type=int, default=1)
    pil.add_argument("--out")
    pil.add_argument("--trace", help="write the random-search trace here instead of stdout")
    pil.set_defaults(func=_cmd_pilots)

    coh = sub.add_parser("coherence", help="random-search coherence trace next to the CDS value")
    coh.add_argument("--n", type=int, default=91)
    coh.add_argument("--np", type=int, default=10)
    coh.add_argument("--l", type=int, default=32)
    coh.add_argument("--iterations", type=int, default=10_000)
    coh.add_argument("--seed", type=int, default=2022)
    coh.add_argument("--out")
    coh.set_defaults(func=_cmd_coherence)

    rec = sub.add_parser("recover", help="estimate channel taps from one pilot observation")
    rec.add_argument("--observation", required=True, help="CSV of real,imag pairs")
    rec.add_argument("--pattern", required=True, help="pilot indices, one per line")
    rec.add_argument("--n", type=int, required=True)
    rec.add_argument("--l", type=int, default=32)
    rec.add_argument("--method", choices=sorted(METHODS), default="sds_imat")
    rec.add_argument("--config", help="experiment YAML whose recovery section is used")
    rec.add_argument("--noise-variance", type=float, default=0.0)
    rec.add_argument("--support", help="comma-separated true support (oracle only)")
    rec.add_argument("--out")
    rec.set_defaults(func=_cmd_recover)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "mode", None) == "random-search" and args.iterations < 1:
        print("error: --iterations must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (SdsImatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
