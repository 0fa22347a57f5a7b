"""Monte Carlo experiment orchestration, config ingestion, and reports.

An experiment is described by a JSON config (strict schema, unknown keys
rejected), runs a grid of independent replications keyed by (T, rep), and
produces a report: the raw per-replication records, per-T summaries that are
recomputable from the records, diagnostics against the closed-form constants,
and pass/fail verdicts with the tolerance used. Replication seeds derive from
the master seed by counter, so results are independent of execution order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .asymptotics import clt_variances, delta_h, finite_t_variance_bm
from .errors import ConfigError, DomainError
from .estimators import (
    ALL_ESTIMATORS,
    ESTIMATOR_HAT_ITO,
    ESTIMATOR_HAT_ORACLE,
    ESTIMATOR_HAT_PRIME,
    ESTIMATOR_TILDE,
    f_statistic,
    theta_hat_ito,
    theta_hat_oracle,
    theta_hat_prime,
    theta_tilde,
)
from .fbm import SamplePath, TimeGrid, generate_fbm
from .fou import FouParams, integrated_square, simulate_fou, stationary_second_moment
from .seeding import substream_seed

KIND_ERGODIC = "ergodic"
KIND_CONSISTENCY = "consistency"
KIND_CLT = "clt"
KIND_F_VARIANCE = "f_variance"

ALL_KINDS = (KIND_ERGODIC, KIND_CONSISTENCY, KIND_CLT, KIND_F_VARIANCE)

#: below this replication count, verdicts are not asserted at all.
LOW_POWER_REPS = 10

#: asymptotic Kolmogorov-Smirnov critical value at alpha ~ 0.01.
KS_COEFFICIENT = 1.63

CSV_HEADER = "rep,seed,T,value"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    params: FouParams
    t_values: tuple[float, ...]
    delta: float
    n_reps: int
    master_seed: int
    estimator: str | None = None
    output_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise ConfigError(f"kind must be one of {ALL_KINDS}, got {self.kind!r}")
        if self.n_reps < 2:
            raise ConfigError(f"n_reps must be >= 2, got {self.n_reps}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if not self.t_values:
            raise ConfigError("t_values must be nonempty")
        if any(b <= a for a, b in zip(self.t_values, self.t_values[1:])):
            raise ConfigError(f"t_values must be strictly increasing, got {self.t_values}")
        for t in self.t_values:
            steps = t / self.delta
            if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
                raise ConfigError(f"t_values entry {t} is not an integer multiple of delta={self.delta}")
        if self.estimator is not None and self.estimator not in ALL_ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ALL_ESTIMATORS}, got {self.estimator!r}")
        if self.kind in (KIND_CONSISTENCY, KIND_CLT) and self.estimator is None:
            raise ConfigError(f"kind={self.kind!r} requires an estimator")
        if self.kind == KIND_F_VARIANCE and self.estimator not in (
            None, ESTIMATOR_HAT_ITO, ESTIMATOR_HAT_ORACLE,
        ):
            raise ConfigError(
                "f_variance uses the least-squares estimator: "
                "estimator must be omitted, 'hat_ito', or 'hat_oracle'"
            )

    def grid_for(self, t_max: float) -> TimeGrid:
        return TimeGrid(t_max=t_max, n_steps=round(t_max / self.delta))

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "params": {"theta": self.params.theta, "sigma": self.params.sigma, "h": self.params.h},
            "t_values": list(self.t_values),
            "delta": self.delta,
            "n_reps": self.n_reps,
            "master_seed": self.master_seed,
        }
        if self.estimator is not None:
            out["estimator"] = self.estimator
        if self.output_path is not None:
            out["output_path"] = self.output_path
        return out


@dataclass(frozen=True)
class RepRecord:
    rep: int
    seed: int
    t: float
    value: float


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    observed: float
    target: float
    tolerance: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[RepRecord]
    summaries: list[dict]
    diagnostics: dict
    verdicts: list[Verdict]
    flags: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "records": [asdict(r) for r in self.records],
            "summaries": self.summaries,
            "diagnostics": self.diagnostics,
            "verdicts": [asdict(v) for v in self.verdicts],
            "flags": self.flags,
            "passed": self.passed,
        }


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from parsed JSON, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be a JSON object, got {type(raw).__name__}")
    allowed = {"kind", "params", "t_values", "delta", "n_reps", "master_seed", "estimator", "output_path"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    required = {"kind", "params", "t_values", "delta", "n_reps", "master_seed"}
    missing = required - set(raw)
    if missing:
        raise ConfigError(f"missing config key(s): {', '.join(sorted(missing))}")
    raw_params = raw["params"]
    if not isinstance(raw_params, dict):
        raise ConfigError("params must be an object with keys theta, sigma, h")
    unknown_p = set(raw_params) - {"theta", "sigma", "h"}
    if unknown_p:
        raise ConfigError(f"unknown params key(s): {', '.join(sorted(unknown_p))}")
    missing_p = {"theta", "sigma", "h"} - set(raw_params)
    if missing_p:
        raise ConfigError(f"missing params key(s): {', '.join(sorted(missing_p))}")
    try:
        params = FouParams(
            theta=float(raw_params["theta"]),
            sigma=float(raw_params["sigma"]),
            h=float(raw_params["h"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid params: {exc}") from exc
    t_values = raw["t_values"]
    if not isinstance(t_values, list) or not all(isinstance(t, (int, float)) for t in t_values):
        raise ConfigError("t_values must be a list of numbers")
    try:
        return ExperimentConfig(
            kind=raw["kind"],
            params=params,
            t_values=tuple(float(t) for t in t_values),
            delta=float(raw["delta"]),
            n_reps=int(raw["n_reps"]),
            master_seed=int(raw["master_seed"]),
            estimator=raw.get("estimator"),
            output_path=raw.get("output_path"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON experiment config."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(raw)


def _simulate_replication(config: ExperimentConfig, t_index: int, rep: int) -> tuple[int, SamplePath]:
    seed = substream_seed(config.master_seed, t_index * config.n_reps + rep)
    grid = config.grid_for(config.t_values[t_index])
    fbm_path = generate_fbm(grid, config.params.h, seed)
    return seed, simulate_fou(config.params, fbm_path)


def _estimate(estimator: str, path: SamplePath, params: FouParams) -> float:
    if estimator == ESTIMATOR_TILDE:
        return theta_tilde(path, params.sigma, params.h).estimate
    if estimator == ESTIMATOR_HAT_ORACLE:
        return theta_hat_oracle(path, params.sigma, params.h, params.theta).estimate
    if estimator == ESTIMATOR_HAT_PRIME:
        return theta_hat_prime(path).estimate
    if estimator == ESTIMATOR_HAT_ITO:
        return theta_hat_ito(path).estimate
    raise ValueError(f"unknown estimator {estimator!r}")


def _collect(config: ExperimentConfig, value_of) -> tuple[list[RepRecord], list[np.ndarray]]:
    """Run all (T, rep) tasks in deterministic order; values keyed per T."""
    records: list[RepRecord] = []
    per_t: list[np.ndarray] = []
    for t_index, t_max in enumerate(config.t_values):
        values = np.empty(config.n_reps)
        for rep in range(config.n_reps):
            seed, path = _simulate_replication(config, t_index, rep)
            values[rep] = value_of(path)
            records.append(RepRecord(rep=rep, seed=seed, t=t_max, value=float(values[rep])))
        per_t.append(values)
    return records, per_t


def _base_summary(t_max: float, values: np.ndarray) -> dict:
    return {
        "T": t_max,
        "n": int(values.size),
        "mean": float(values.mean()),
        "variance": float(values.var(ddof=1)),
        "std_error": float(values.std(ddof=1) / math.sqrt(values.size)),
    }


def run_ergodic(config: ExperimentConfig) -> ExperimentReport:
    """Check (1/T) int X^2 dt against the stationary second moment."""
    if config.kind != KIND_ERGODIC:
        raise ConfigError(f"run_ergodic needs kind='ergodic', got {config.kind!r}")
    target = stationary_second_moment(config.params)
    records, per_t = _collect(
        config, lambda path: integrated_square(path) / path.grid.t_max
    )
    summaries = []
    for t_max, values in zip(config.t_values, per_t):
        summary = _base_summary(t_max, values)
        summary["target"] = target
        summaries.append(summary)
    verdicts = []
    if config.n_reps >= LOW_POWER_REPS:
        for summary in summaries:
            tol = 3.0 * summary["std_error"]
            verdicts.append(Verdict(
                name=f"mean_within_3se[T={summary['T']:g}]",
                passed=abs(summary["mean"] - target) <= tol,
                observed=summary["mean"],
                target=target,
                tolerance=tol,
            ))
        for prev, nxt in zip(summaries, summaries[1:]):
            verdicts.append(Verdict(
                name=f"variance_nonincreasing[T={prev['T']:g}->{nxt['T']:g}]",
                passed=nxt["variance"] <= 1.10 * prev["variance"],
                observed=nxt["variance"],
                target=prev["variance"],
                tolerance=0.10,
            ))
    flags = [] if config.n_reps >= LOW_POWER_REPS else ["low_power"]
    return ExperimentReport(
        config=config,
        records=records,
        summaries=summaries,
        diagnostics={"target": target},
        verdicts=verdicts,
        flags=flags,
    )


def run_consistency(config: ExperimentConfig) -> ExperimentReport:
    """Track estimates across a T ladder; error should shrink toward zero."""
    if config.kind != KIND_CONSISTENCY:
        raise ConfigError(f"run_consistency needs kind='consistency', got {config.kind!r}")
    theta = config.params.theta
    records, per_t = _collect(
        config, lambda path: _estimate(config.estimator, path, config.params)
    )
    summaries = []
    for t_max, values in zip(config.t_values, per_t):
        summary = _base_summary(t_max, values)
        summary["mae"] = float(np.abs(values - theta).mean())
        summaries.append(summary)
    verdicts = []
    if config.n_reps >= LOW_POWER_REPS:
        maes = [s["mae"] for s in summaries]
        verdicts.append(Verdict(
            name="mae_decreasing",
            passed=all(b < a for a, b in zip(maes, maes[1:])),
            observed=maes[-1],
            target=maes[0],
            tolerance=0.0,
        ))
        final = summaries[-1]
        tol = 3.0 * final["std_error"]
        verdicts.append(Verdict(
            name=f"final_mean_within_3se[T={final['T']:g}]",
            passed=abs(final["mean"] - theta) <= tol,
            observed=final["mean"],
            target=theta,
            tolerance=tol,
        ))
    flags = [] if config.n_reps >= LOW_POWER_REPS else ["low_power"]
    return ExperimentReport(
        config=config,
        records=records,
        summaries=summaries,
        diagnostics={"theta": theta, "mae": [s["mae"] for s in summaries]},
        verdicts=verdicts,
        flags=flags,
    )


def run_clt(config: ExperimentConfig) -> ExperimentReport:
    """Compare the spread of sqrt(T)(estimate - theta) to its limit variance."""
    if config.kind != KIND_CLT:
        raise ConfigError(f"run_clt needs kind='clt', got {config.kind!r}")
    params = config.params
    if params.h >= 0.75:
        raise DomainError(f"normality of the fluctuations requires h < 3/4, got {params.h}")
    if config.estimator == ESTIMATOR_TILDE and params.h <= 0.5:
        raise DomainError("the moment-inversion estimator's normal limit requires h > 1/2")
    var_hat, var_tilde = clt_variances(params)
    target = var_tilde if config.estimator == ESTIMATOR_TILDE else var_hat
    records, per_t = _collect(
        config, lambda path: _estimate(config.estimator, path, params)
    )
    ks_threshold = KS_COEFFICIENT / math.sqrt(config.n_reps)
    summaries = []
    for t_max, values in zip(config.t_values, per_t):
        z = math.sqrt(t_max) * (values - params.theta)
        summary = _base_summary(t_max, values)
        summary["z_variance"] = float(z.var(ddof=1))
        summary["z_target_variance"] = target
        summary["ks_statistic"] = float(stats.kstest(z / math.sqrt(target), "norm").statistic)
        summaries.append(summary)
    verdicts = []
    if config.n_reps >= LOW_POWER_REPS:
        for summary in summaries:
            ratio = summary["z_variance"] / target
            verdicts.append(Verdict(
                name=f"variance_within_15pct[T={summary['T']:g}]",
                passed=abs(ratio - 1.0) <= 0.15,
                observed=summary["z_variance"],
                target=target,
                tolerance=0.15,
            ))
            verdicts.append(Verdict(
                name=f"ks_normal[T={summary['T']:g}]",
                passed=summary["ks_statistic"] < ks_threshold,
                observed=summary["ks_statistic"],
                target=0.0,
                tolerance=ks_threshold,
            ))
    flags = [] if config.n_reps >= LOW_POWER_REPS else ["low_power"]
    return ExperimentReport(
        config=config,
        records=records,
        summaries=summaries,
        diagnostics={
            "target_variance": target,
            "ks_threshold": ks_threshold,
            "ks_statistic": [s["ks_statistic"] for s in summaries],
        },
        verdicts=verdicts,
        flags=flags,
    )


def run_f_variance(config: ExperimentConfig) -> ExperimentReport:
    """Second moment of the realized fluctuation statistic vs its target."""
    if config.kind != KIND_F_VARIANCE:
        raise ConfigError(f"run_f_variance needs kind='f_variance', got {config.kind!r}")
    params = config.params
    rough = params.h > 0.5
    if params.h >= 0.75:
        raise DomainError(f"the fluctuation second moment requires h < 3/4, got {params.h}")
    estimator = config.estimator or (ESTIMATOR_HAT_ORACLE if rough else ESTIMATOR_HAT_ITO)

    def realized_f(path: SamplePath) -> float:
        est = _estimate(estimator, path, params)
        return f_statistic(path, est, params.theta)

    records, per_t = _collect(config, realized_f)
    summaries = []
    for t_max, values in zip(config.t_values, per_t):
        if rough:
            target = params.theta ** (1.0 - 4.0 * params.h) * params.sigma**4 * delta_h(params.h)
        else:
            target = finite_t_variance_bm(params.theta, params.sigma, t_max)
        second = values**2
        summary = _base_summary(t_max, values)
        summary["second_moment"] = float(second.mean())
        summary["second_moment_std_error"] = float(second.std(ddof=1) / math.sqrt(second.size))
        summary["target"] = target
        summaries.append(summary)
    verdicts = []
    if config.n_reps >= LOW_POWER_REPS:
        for summary in summaries:
            if rough:
                tol = 0.10
                passed = abs(summary["second_moment"] / summary["target"] - 1.0) <= tol
            else:
                tol = 3.0 * summary["second_moment_std_error"]
                passed = abs(summary["second_moment"] - summary["target"]) <= tol
            verdicts.append(Verdict(
                name=f"second_moment[T={summary['T']:g}]",
                passed=passed,
                observed=summary["second_moment"],
                target=summary["target"],
                tolerance=tol,
            ))
    flags = [] if config.n_reps >= LOW_POWER_REPS else ["low_power"]
    return ExperimentReport(
        config=config,
        records=records,
        summaries=summaries,
        diagnostics={"estimator": estimator, "targets": [s["target"] for s in summaries]},
        verdicts=verdicts,
        flags=flags,
    )


_RUNNERS = {
    KIND_ERGODIC: run_ergodic,
    KIND_CONSISTENCY: run_consistency,
    KIND_CLT: run_clt,
    KIND_F_VARIANCE: run_f_variance,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    return _RUNNERS[config.kind](config)


def write_report(report: ExperimentReport, directory: str | Path) -> tuple[Path, Path]:
    """Write report.json and records.csv into `directory` (created if needed).

    The CSV holds one row per replication with full-precision (17 significant
    digit) decimal floats, so identical configs reproduce byte-identical
    files.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    json_path = directory / "report.json"
    csv_path = directory / "records.csv"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    lines = [CSV_HEADER]
    for record in report.records:
        lines.append(f"{record.rep},{record.seed},{record.t:.17g},{record.value:.17g}")
    csv_path.write_text("\n".join(lines) + "\n")
    return json_path, csv_path
