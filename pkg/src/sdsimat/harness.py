"""Seeded Monte Carlo runner for the channel-estimation comparisons.

Every (SNR point, trial) pair draws its channel, data bits, noise and (for
``random`` pilots) its pilot pattern from independent substreams keyed by
``(master_seed, snr_index, trial, purpose)``.  All configured methods see the
same draws, so comparisons between methods, and between experiments that
differ only in pilot mode, are paired.  Results do not depend on the worker
count: each trial is computed in isolation and reductions run in trial order.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .channel import ChannelConfig, draw_channel
from .config import ExperimentConfig
from .exceptions import SdsImatError
from .ofdm import (
    equalize_and_demodulate,
    extract_pilot_observation,
    make_frame,
    transmit_receive,
)
from .pilots import (
    PilotPattern,
    cds_family,
    coherence,
    coherence_lower_bound,
    load_base_cds,
    random_pattern,
    random_search,
)
from .recovery import METHODS, MeasurementSystem

__all__ = [
    "CurvePoint",
    "TrialTable",
    "simulate_trials",
    "aggregate",
    "run_experiment",
    "run_coherence_experiment",
    "failure_warning",
    "trial_rng",
    "experiment_pattern",
    "FAILURE_WARN_FRACTION",
]

log = logging.getLogger(__name__)

FAILURE_WARN_FRACTION = 0.01

# substream purpose tags
_CHANNEL, _BITS, _NOISE, _PILOTS = 0, 1, 2, 3
_SETUP = 2**32 - 1


def trial_rng(master_seed: int, snr_index: int, trial: int, purpose: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(snr_index, trial, purpose))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class CurvePoint:
    method: str
    pilot_mode: str
    snr_db: float
    mse: float
    ber: float
    trials: int
    failures: int
    equalization_singular_events: int = 0
    mse_se: float = math.nan
    ber_se: float = math.nan


@dataclass
class TrialTable:
    """Per-trial outcomes, arrays of shape ``(n_snr, n_trials)``.

    ``sq_error[m]`` and ``bit_errors[m]`` are NaN where method ``m`` failed.
    """

    methods: tuple
    snr_grid_db: tuple
    pilot_mode: str
    bits_per_trial: int
    channel_energy: np.ndarray
    sq_error: Dict[str, np.ndarray]
    bit_errors: Dict[str, np.ndarray]
    singular: Dict[str, np.ndarray]

    @property
    def n_trials(self) -> int:
        return self.channel_energy.shape[1]

    def ber_per_trial(self, method: str) -> np.ndarray:
        return self.bit_errors[method] / self.bits_per_trial

    def failures(self, method: str) -> np.ndarray:
        return np.isnan(self.sq_error[method]).sum(axis=1)


def experiment_pattern(cfg: ExperimentConfig):
    """Fixed pilot pattern for ``cds`` and ``random_search`` modes, ``None`` for ``random``."""
    sysc, pc = cfg.system, cfg.pilots
    if pc.mode == "cds":
        return cds_family(load_base_cds(sysc.n_total, sysc.n_pilots), pc.shift, pc.multiplier)
    if pc.mode == "random_search":
        rng = trial_rng(cfg.master_seed, _SETUP, 0, _PILOTS)
        pattern, _ = random_search(sysc.n_total, sysc.n_pilots, sysc.n_cols, pc.search_iterations, rng)
        return pattern
    return None


def _run_trial(cfg: ExperimentConfig, fixed: PilotPattern, snr_index: int, trial: int, sys_cache: dict):
    sysc = cfg.system
    snr = cfg.snr_grid_db[snr_index]
    seed = cfg.master_seed
    if fixed is None:
        pattern = random_pattern(sysc.n_total, sysc.n_pilots, trial_rng(seed, snr_index, trial, _PILOTS))
    else:
        pattern = fixed
    msys = sys_cache.get(pattern.indices)
    if msys is None:
        msys = MeasurementSystem.build(pattern, sysc.n_cols)
        if fixed is not None:
            sys_cache[pattern.indices] = msys

    h = draw_channel(ChannelConfig(sysc.n_cols, sysc.sparsity), trial_rng(seed, snr_index, trial, _CHANNEL))
    frame = make_frame(pattern, trial_rng(seed, snr_index, trial, _BITS), pilot_value=sysc.pilot_value)
    received, sigma2 = transmit_receive(
        frame, h, math.inf if cfg.noiseless else snr, trial_rng(seed, snr_index, trial, _NOISE)
    )
    obs = extract_pilot_observation(received, frame, sigma2)

    h_true = h.as_vector
    out = {}
    for name in cfg.methods:
        try:
            if name == "oracle":
                res = METHODS[name](obs, msys, h.support)
            else:
                res = METHODS[name](obs, msys, cfg.recovery)
            est = res.estimate.as_vector
            if not np.all(np.isfinite(est)):
                raise FloatingPointError("non-finite estimate")
            demod = equalize_and_demodulate(received, est, frame)
        except (SdsImatError, np.linalg.LinAlgError, FloatingPointError) as exc:
            log.debug("%s failed at snr=%s trial=%d: %s", name, snr, trial, exc)
            out[name] = (math.nan, math.nan, 0)
            continue
        sq = float(np.sum(np.abs(est - h_true) ** 2))
        errors = int(np.count_nonzero(demod.bits != frame.bits))
        out[name] = (sq, errors, demod.singular_events)
    return float(np.sum(np.abs(h_true) ** 2)), out


def _run_block(args):
    cfg, fixed, snr_index, trials = args
    cache = {}
    return [_run_trial(cfg, fixed, snr_index, t, cache) for t in trials]


def simulate_trials(cfg: ExperimentConfig, pattern=None) -> TrialTable:
    """Run every (SNR, trial) pair and keep per-trial outcomes.

    ``pattern`` overrides the pilot pattern implied by ``cfg.pilots``.
    """
    fixed = pattern if pattern is not None else experiment_pattern(cfg)
    n_snr, n_trials = len(cfg.snr_grid_db), cfg.trials_per_point
    chunk = max(1, math.ceil(n_trials / (4 * cfg.workers)))
    jobs = [
        (cfg, fixed, s, range(start, min(start + chunk, n_trials)))
        for s in range(n_snr)
        for start in range(0, n_trials, chunk)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            blocks = list(pool.map(_run_block, jobs))
    else:
        blocks = [_run_block(job) for job in jobs]

    energy = np.empty((n_snr, n_trials))
    sq = {m: np.empty((n_snr, n_trials)) for m in cfg.methods}
    errs = {m: np.empty((n_snr, n_trials)) for m in cfg.methods}
    sing = {m: np.zeros((n_snr, n_trials), dtype=np.int64) for m in cfg.methods}
    for (_, _, s, trials), block in zip(jobs, blocks):
        for t, (e, per_method) in zip(trials, block):
            energy[s, t] = e
            for m, (q, b, n_sing) in per_method.items():
                sq[m][s, t] = q
                errs[m][s, t] = b
                sing[m][s, t] = n_sing
    n_data = cfg.system.n_total - cfg.system.n_pilots
    return TrialTable(cfg.methods, cfg.snr_grid_db, cfg.pilots.mode, 2 * n_data, energy, sq, errs, sing)


def aggregate(table: TrialTable) -> List[CurvePoint]:
    """One :class:`CurvePoint` per (method, SNR).

    MSE is the ratio of means ``sum ||h_hat - h||^2 / sum ||h||^2`` over the
    trials where the method succeeded.
    """
    points = []
    for m in table.methods:
        for s, snr in enumerate(table.snr_grid_db):
            ok = ~np.isnan(table.sq_error[m][s])
            n_ok = int(ok.sum())
            failures = table.n_trials - n_ok
            singular = int(table.singular[m][s].sum())
            if n_ok == 0:
                points.append(CurvePoint(m, table.pilot_mode, snr, math.nan, math.nan, 0, failures, singular))
                continue
            sq = table.sq_error[m][s][ok]
            energy = table.channel_energy[s][ok]
            ber_t = table.bit_errors[m][s][ok] / table.bits_per_trial
            mean_energy = float(np.sum(energy) / n_ok)
            mse = float(np.sum(sq) / np.sum(energy))
            ber = float(np.sum(table.bit_errors[m][s][ok]) / (n_ok * table.bits_per_trial))
            mse_se = float(np.std(sq, ddof=1) / math.sqrt(n_ok) / mean_energy) if n_ok > 1 else math.nan
            ber_se = float(np.std(ber_t, ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else math.nan
            points.append(CurvePoint(m, table.pilot_mode, snr, mse, ber, n_ok, failures, singular, mse_se, ber_se))
    return points


def run_experiment(cfg: ExperimentConfig) -> List[CurvePoint]:
    points = aggregate(simulate_trials(cfg))
    total = cfg.trials_per_point * len(cfg.snr_grid_db)
    for m in cfg.methods:
        failed = sum(p.failures for p in points if p.method == m)
        if failed > FAILURE_WARN_FRACTION * total:
            log.warning("%s failed on %d of %d trials", m, failed, total)
    return points


def failure_warning(points: List[CurvePoint]) -> bool:
    """True when any method failed on more than 1% of its trials."""
    by_method: Dict[str, List[int]] = {}
    for p in points:
        acc = by_method.setdefault(p.method, [0, 0])
        acc[0] += p.failures
        acc[1] += p.failures + p.trials
    return any(f > FAILURE_WARN_FRACTION * n for f, n in by_method.values())


def run_coherence_experiment(n_total: int, n_pilots: int, n_cols: int, iterations: int, seed: int):
    """Rows ``(iteration, random_search_best, cds_value)`` for the coherence trace."""
    rng = trial_rng(seed, _SETUP, 0, _PILOTS)
    _, trace = random_search(n_total, n_pilots, n_cols, iterations, rng)
    try:
        cds_value = coherence(load_base_cds(n_total, n_pilots), n_cols)
    except SdsImatError:
        cds_value = coherence_lower_bound(n_total, n_pilots)
        log.warning("no shipped difference set for (%d, %d); reporting the lower bound", n_total, n_pilots)
    return [(i + 1, float(v), cds_value) for i, v in enumerate(trace)]
