"""Experiment driver: seeded trial batches, rate fitting, CSV/JSON output.

Every trial is a pure function of (master_seed, trial_id), so batches can
run serially or on a process pool and produce byte-identical output either
way.  CSV carries the per-epoch error curves; the JSON summary mirrors the
full trial records.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import sensing
from .core import dist_phase_aligned
from .seeding import (
    ENSEMBLE_STREAM,
    SIGNAL_STREAM,
    SOLVER_STREAM,
    SPECTRAL_STREAM,
    derive_seed,
)
from .solver import ROW_UNIFORM, SolverConfig, solve
from .spectral import SpectralConfig, spectral_init

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "TrialRecord",
    "run_trial",
    "run_experiment",
    "fit_rate",
    "write_csv",
    "render_csv",
    "summary_dict",
    "write_summary_json",
    "parse_config_file",
    "load_signal",
    "THREADS_ENV",
]

THREADS_ENV = "PR_KACZMARZ_THREADS"

SIGNAL_RANDOM = "random"
SIGNAL_PROVIDED = "provided"

_RATE_FLOOR = 1e-14


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass
class ExperimentConfig:
    n: int
    model: str = sensing.MODEL_SPHERE
    m: int | None = None  # sphere model
    K: int | None = None  # unitary model (m = K * n)
    num_trials: int = 1
    master_seed: int = 0
    max_iters: int | None = None  # None -> 200 * n
    tol_aligned_rel: float | None = 1e-8
    tol_residual: float | None = None
    row_rule: str = ROW_UNIFORM
    zero_threshold: float = 1e-14
    history_stride: int | None = None
    truncation_multiplier: float = 3.0
    power_iters_max: int = 1000
    power_tol: float = 1e-8
    signal_mode: str = SIGNAL_RANDOM
    signal: np.ndarray | None = None
    output_path: str | None = None
    output_format: str = "csv"

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.num_trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.model == sensing.MODEL_SPHERE:
            if self.m is None or self.m < 1:
                raise ConfigError("sphere model needs m >= 1")
        elif self.model == sensing.MODEL_UNITARY:
            if self.K is None or self.K < 1:
                raise ConfigError("unitary model needs K >= 1")
        else:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.signal_mode not in (SIGNAL_RANDOM, SIGNAL_PROVIDED):
            raise ConfigError(f"unknown signal_mode {self.signal_mode!r}")
        if self.signal_mode == SIGNAL_PROVIDED:
            if self.signal is None:
                raise ConfigError("signal_mode=provided needs a signal")
            if np.asarray(self.signal).shape != (self.n,):
                raise ConfigError("provided signal has wrong dimension")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.output_format!r}")

    @property
    def effective_m(self) -> int:
        if self.model == sensing.MODEL_UNITARY:
            return self.K * self.n
        return self.m

    @property
    def effective_max_iters(self) -> int:
        return self.max_iters if self.max_iters is not None else 200 * self.n


@dataclass
class TrialRecord:
    trial_id: int
    seed: int
    n: int
    m: int
    model: str
    failed: bool = False
    error: str = ""
    init_aligned_error: float = math.nan
    init_aligned_error_normalized: float = math.nan
    iterations_run: int = 0
    converged: bool = False
    final_aligned_error: float = math.nan
    final_raw_error: float = math.nan
    final_residual: float = math.nan
    epochs: list = field(default_factory=list)
    aligned_errors: list = field(default_factory=list)
    raw_errors: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    rho_hat: float | None = None

    def to_dict(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "model": self.model,
            "failed": self.failed,
            "error": self.error,
            "init_aligned_error": self.init_aligned_error,
            "init_aligned_error_normalized": self.init_aligned_error_normalized,
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "final_aligned_error": self.final_aligned_error,
            "final_raw_error": self.final_raw_error,
            "final_residual": self.final_residual,
            "epochs": self.epochs,
            "aligned_errors": self.aligned_errors,
            "raw_errors": self.raw_errors,
            "residuals": self.residuals,
            "rho_hat": self.rho_hat,
        }


def fit_rate(record: TrialRecord) -> float | None:
    """Per-epoch contraction ratio: exp of the least-squares slope of
    log(aligned error) against epoch index, using samples above 1e-14.
    None (and rho_hat stays unset) when fewer than 3 samples qualify."""
    epochs = np.asarray(record.epochs, dtype=float)
    errs = np.asarray(record.aligned_errors, dtype=float)
    usable = np.isfinite(errs) & (errs > _RATE_FLOOR)
    if int(np.count_nonzero(usable)) < 3:
        return None
    slope = np.polyfit(epochs[usable], np.log(errs[usable]), 1)[0]
    return float(np.exp(slope))


def _signal_for_trial(cfg: ExperimentConfig, trial_id: int) -> np.ndarray:
    if cfg.signal_mode == SIGNAL_PROVIDED:
        return np.asarray(cfg.signal, dtype=complex)
    rng = np.random.default_rng(derive_seed(cfg.master_seed, trial_id, SIGNAL_STREAM))
    return sensing.sample_unit_vector(cfg.n, rng)


def run_trial(cfg: ExperimentConfig, trial_id: int) -> TrialRecord:
    """One seeded trial: sample signal and ensemble, measure, initialize
    spectrally, solve, fit the rate.  Failures are captured in the record,
    never dropped."""
    seed = derive_seed(cfg.master_seed, trial_id)
    rec = TrialRecord(
        trial_id=trial_id,
        seed=seed,
        n=cfg.n,
        m=cfg.effective_m,
        model=cfg.model,
    )
    try:
        z = _signal_for_trial(cfg, trial_id)
        ens_seed = derive_seed(cfg.master_seed, trial_id, ENSEMBLE_STREAM)
        if cfg.model == sensing.MODEL_UNITARY:
            ensemble = sensing.sample_block_unitary(cfg.n, cfg.K, ens_seed)
        else:
            ensemble = sensing.sample_sphere(cfg.n, cfg.m, ens_seed)
        y = sensing.measure(ensemble, z)

        spec_cfg = SpectralConfig(
            truncation_multiplier=cfg.truncation_multiplier,
            power_iters_max=cfg.power_iters_max,
            power_tol=cfg.power_tol,
            seed=derive_seed(cfg.master_seed, trial_id, SPECTRAL_STREAM),
        )
        x0 = spectral_init(ensemble, y, spec_cfg)

        nz = float(np.linalg.norm(z))
        rec.init_aligned_error = dist_phase_aligned(x0, z).aligned
        x0_normalized = x0 * (nz / float(np.linalg.norm(x0)))
        rec.init_aligned_error_normalized = dist_phase_aligned(x0_normalized, z).aligned

        sol_cfg = SolverConfig(
            max_iters=cfg.effective_max_iters,
            tol_aligned_rel=cfg.tol_aligned_rel,
            tol_residual=cfg.tol_residual,
            row_rule=cfg.row_rule,
            zero_threshold=cfg.zero_threshold,
            seed=derive_seed(cfg.master_seed, trial_id, SOLVER_STREAM),
            history_stride=cfg.history_stride,
        )
        state = solve(ensemble, y, x0, sol_cfg, z=z)

        stride = sol_cfg.history_stride if sol_cfg.history_stride else ensemble.n
        for k, raw, aligned, res in state.history:
            rec.epochs.append(k / stride)
            rec.raw_errors.append(raw)
            rec.aligned_errors.append(aligned)
            rec.residuals.append(res)
        rec.iterations_run = state.k
        _, raw, aligned, res = state.history[-1]
        rec.final_raw_error = raw
        rec.final_aligned_error = aligned
        rec.final_residual = res
        if cfg.tol_aligned_rel is not None:
            rec.converged = aligned <= cfg.tol_aligned_rel * nz
        else:
            rec.converged = res <= cfg.tol_residual
        rec.rho_hat = fit_rate(rec)
    except Exception as exc:  # noqa: BLE001 - failed trials are recorded, not raised
        rec.failed = True
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _trial_worker(args) -> TrialRecord:
    cfg, trial_id = args
    return run_trial(cfg, trial_id)


def _worker_count(workers: int | None) -> int:
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if workers == 0:
        workers = os.cpu_count() or 1
    return max(1, workers)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[TrialRecord]:
    """Run all trials; ``workers`` falls back to the PR_KACZMARZ_THREADS
    environment variable (unset -> serial, 0 -> all cores).  Output order
    and content are independent of the worker count."""
    cfg.validate()
    nworkers = _worker_count(workers)
    ids = list(range(cfg.num_trials))
    if nworkers == 1 or cfg.num_trials == 1:
        records = [run_trial(cfg, tid) for tid in ids]
    else:
        with ProcessPoolExecutor(max_workers=min(nworkers, cfg.num_trials)) as pool:
            records = list(pool.map(_trial_worker, [(cfg, tid) for tid in ids]))
    records.sort(key=lambda r: r.trial_id)
    return records


# ---------------------------------------------------------------------------
# output


_CSV_COLUMNS = (
    "trial_id",
    "seed",
    "n",
    "m",
    "model",
    "epoch",
    "aligned_error",
    "raw_error",
    "residual",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def render_csv(records: list[TrialRecord]) -> str:
    """Fixed-schema CSV: one row per (trial, epoch sample), then one summary
    row per trial repeating the final state (always the last row of the
    trial's block).  Deterministic byte-for-byte given the records."""
    lines = [",".join(_CSV_COLUMNS)]
    for rec in records:
        prefix = f"{rec.trial_id},{rec.seed},{rec.n},{rec.m},{rec.model}"
        for ep, al, raw, res in zip(
            rec.epochs, rec.aligned_errors, rec.raw_errors, rec.residuals
        ):
            lines.append(f"{prefix},{_fmt(ep)},{_fmt(al)},{_fmt(raw)},{_fmt(res)}")
        n = max(rec.n, 1)
        summary_epoch = rec.iterations_run / n
        lines.append(
            f"{prefix},{_fmt(summary_epoch)},{_fmt(rec.final_aligned_error)},"
            f"{_fmt(rec.final_raw_error)},{_fmt(rec.final_residual)}"
        )
    return "\n".join(lines) + "\n"


def write_csv(records: list[TrialRecord], path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(render_csv(records))


def summary_dict(cfg: ExperimentConfig, records: list[TrialRecord]) -> dict:
    side_condition = None
    if cfg.model == sensing.MODEL_UNITARY:
        m = cfg.effective_m
        side_condition = bool(math.sqrt(cfg.n) > math.log(m) ** 2)
    config = {
        "model": cfg.model,
        "n": cfg.n,
        "m": cfg.effective_m,
        "K": cfg.K,
        "num_trials": cfg.num_trials,
        "master_seed": cfg.master_seed,
        "max_iters": cfg.effective_max_iters,
        "tol_aligned_rel": cfg.tol_aligned_rel,
        "tol_residual": cfg.tol_residual,
        "row_rule": cfg.row_rule,
        "signal_mode": cfg.signal_mode,
        "truncation_multiplier": cfg.truncation_multiplier,
    }
    return {
        "config": config,
        "unitary_side_condition_sqrt_n_gt_log_sq_m": side_condition,
        "trials": [r.to_dict() for r in records],
    }


def write_summary_json(cfg: ExperimentConfig, records: list[TrialRecord], path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(summary_dict(cfg, records), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# config file: "key = value" lines, '#' comments


_INT_KEYS = {
    "n", "m", "K", "trials", "master_seed", "max_iters", "history_stride",
    "power_iters_max",
}
_FLOAT_KEYS = {
    "tol_aligned_rel", "tol_residual", "zero_threshold",
    "truncation_multiplier", "power_tol",
}
_STR_KEYS = {"model", "row_rule", "signal_mode", "signal_path", "out", "format"}


def load_signal(path) -> np.ndarray:
    """Signal file: JSON object with 're' and 'im' lists."""
    with open(path) as fh:
        payload = json.load(fh)
    try:
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"signal file {path} needs 're' and 'im' lists") from exc
    if re.shape != im.shape or re.ndim != 1:
        raise ConfigError(f"signal file {path} has mismatched re/im lists")
    return re + 1j * im


def parse_config_file(path) -> ExperimentConfig:
    """Parse the key = value experiment format (see README for the keys)."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    kwargs: dict = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            caster = int
        elif key in _FLOAT_KEYS:
            caster = lambda v: None if v.lower() == "none" else float(v)  # noqa: E731
        elif key in _STR_KEYS:
            caster = str
        else:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            kwargs[key] = caster(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc

    if "n" not in kwargs:
        raise ConfigError("config must set n")
    cfg = ExperimentConfig(n=kwargs.pop("n"))
    rename = {"trials": "num_trials", "out": "output_path", "format": "output_format"}
    signal_path = kwargs.pop("signal_path", None)
    for key, value in kwargs.items():
        setattr(cfg, rename.get(key, key), value)
    if "tol_residual" in raw and "tol_aligned_rel" not in raw:
        cfg.tol_aligned_rel = None
    if signal_path is not None:
        cfg.signal = load_signal(signal_path)
        cfg.signal_mode = SIGNAL_PROVIDED
    cfg.validate()
    return cfg


def override_config(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Copy cfg with non-None overrides applied, then re-validate."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    out = replace(cfg, **updates)
    out.validate()
    return out
