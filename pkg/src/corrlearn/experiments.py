"""Seeded experiment runners and their machine-readable outputs.

Every runner is a pure function of its config: trial streams are derived
from (seed, structural indices) only, so repeat runs emit byte-identical
output. CSV uses a fixed header, 12-significant-digit reals and LF line
endings; JSON output carries the same rows as objects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .batch import attainable_error, batch_correct
from .bounds import BOUND_CSV_COLUMNS, BoundReport, monte_carlo_report
from .core import Categorical, Seed, counts_from_sequence, empirical_estimate, l1_error, sample_sequence
from .dp import solve
from .likelihood import CandidateSet, default_candidates, misclassification_experiment
from .mdp import MdpSpec, l1_terminal_reward
from .teacher import run_online

EXPERIMENT_NAMES = ("multinomial", "binomial", "variance", "bounds", "bio")


class ConfigError(ValueError):
    """The experiment configuration is invalid."""


class InvariantViolationError(RuntimeError):
    """An emitted record breaks a cross-module invariant."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    trials: int | None = None
    n_values: tuple[int, ...] | None = None
    budgets: tuple[int, ...] | None = None
    m_values: tuple[int, ...] | None = None
    theta0: tuple[float, ...] | None = None
    candidates: str | None = None
    theta0_label: int | None = None
    output: str | None = None
    fmt: str = "csv"

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; "
                f"expected one of {', '.join(EXPERIMENT_NAMES)}"
            )
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.fmt!r}")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.candidates is not None and not Path(self.candidates).is_file():
            raise ConfigError(f"candidate file {self.candidates!r} does not exist")

    @classmethod
    def from_file(cls, path: str | Path, **overrides: Any) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        merged = {**data, **{k: v for k, v in overrides.items() if v is not None}}
        return cls(**_normalise(merged))


def _normalise(data: dict[str, Any]) -> dict[str, Any]:
    out = dict(data)
    for key in ("n_values", "budgets", "m_values", "theta0"):
        if out.get(key) is not None:
            out[key] = tuple(out[key])
    return out


@dataclass(frozen=True)
class ExperimentRecord:
    experiment: str
    seed: int
    trial: int
    budget: int
    error_original: float
    error_online: float
    error_batch: float
    budget_spent: int
    error_attainable: float | None = None

    def __post_init__(self) -> None:
        if min(self.error_original, self.error_online, self.error_batch) < 0:
            raise InvariantViolationError("negative error in a record")
        if self.error_batch > self.error_online + 1e-12:
            raise InvariantViolationError(
                f"batch error {self.error_batch} exceeds online error "
                f"{self.error_online} (trial {self.trial}, budget {self.budget})"
            )


MULTINOMIAL_COLUMNS = (
    "experiment", "seed", "trial", "budget",
    "error_original", "error_online", "error_batch", "budget_spent",
)
BINOMIAL_COLUMNS = (
    "experiment", "seed", "trial", "budget",
    "error_original", "error_online", "error_attainable", "error_batch",
    "budget_spent",
)
VARIANCE_COLUMNS = ("n", "budget", "trials", "var_first", "var_total")
BIO_COLUMNS = ("n", "budget", "trials", "misclassification_rate")


def _theta(config: ExperimentConfig, default: tuple[float, ...]) -> Categorical:
    try:
        return Categorical(config.theta0 if config.theta0 is not None else default)
    except ValueError as exc:
        raise ConfigError(f"invalid theta0: {exc}") from exc


def _run_correction_records(
    config: ExperimentConfig,
    default_theta: tuple[float, ...],
    default_n: int,
    with_attainable: bool,
) -> list[ExperimentRecord]:
    theta0 = _theta(config, default_theta)
    if config.n_values is not None and len(config.n_values) != 1:
        raise ConfigError(
            f"the {config.experiment} experiment takes a single n, "
            f"got {config.n_values}"
        )
    n = config.n_values[0] if config.n_values else default_n
    budgets = config.budgets if config.budgets is not None else (1,)
    trials = config.trials if config.trials is not None else 50
    seed = Seed(config.seed)
    sequences = [sample_sequence(theta0, n, seed.spawn(t)) for t in range(trials)]
    records = []
    for budget in budgets:
        spec = MdpSpec(k=theta0.k, n=n, budget=budget,
                       model=theta0, reward=l1_terminal_reward(theta0))
        policy, _ = solve(spec)
        for trial, seq in enumerate(sequences):
            original = counts_from_sequence(seq)
            estimate = empirical_estimate(original)
            trace = run_online(seq, policy, budget)
            online = l1_error(
                empirical_estimate(counts_from_sequence(trace.corrected)), theta0
            )
            records.append(ExperimentRecord(
                experiment=config.experiment,
                seed=config.seed,
                trial=trial,
                budget=budget,
                error_original=l1_error(estimate, theta0),
                error_online=online,
                error_batch=batch_correct(original, theta0, budget).error,
                budget_spent=trace.budget_spent,
                error_attainable=(
                    attainable_error(n, theta0, budget, estimate)
                    if with_attainable else None
                ),
            ))
    return records


def run_multinomial(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Per-trial original/online/batch errors; defaults to the three-value
    source (0.4, 0.3, 0.3) with five observations and budget one."""
    return _run_correction_records(config, (0.4, 0.3, 0.3), 5, with_attainable=False)


def run_binomial(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Two-value variant, with the closed-form attainable error alongside;
    defaults to a fair source with ten observations."""
    if _theta(config, (0.5, 0.5)).k != 2:
        raise ConfigError("the binomial experiment needs a two-value theta0")
    return _run_correction_records(config, (0.5, 0.5), 10, with_attainable=True)


def run_variance_sweep(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Sample variance of the corrected estimate per (n, budget) cell.

    ``var_first`` is the variance of the estimate's first coordinate (the
    documented headline number); ``var_total`` sums the per-coordinate
    variances. Streams are shared across budgets at each n.
    """
    theta0 = _theta(config, (0.4, 0.3, 0.3))
    n_values = config.n_values if config.n_values is not None else (5, 10, 15, 20, 25)
    budgets = config.budgets if config.budgets is not None else (0, 1, 2)
    trials = config.trials if config.trials is not None else 2000
    seed = Seed(config.seed)
    rows = []
    for n in n_values:
        sequences = [
            sample_sequence(theta0, n, seed.spawn(n, t)) for t in range(trials)
        ]
        for budget in budgets:
            spec = MdpSpec(k=theta0.k, n=n, budget=budget,
                           model=theta0, reward=l1_terminal_reward(theta0))
            policy, _ = solve(spec)
            estimates = np.empty((trials, theta0.k))
            for t, seq in enumerate(sequences):
                trace = run_online(seq, policy, budget)
                counts = counts_from_sequence(trace.corrected)
                estimates[t] = empirical_estimate(counts).probs
            per_coord = estimates.var(axis=0, ddof=1)
            rows.append({
                "n": n, "budget": budget, "trials": trials,
                "var_first": float(per_coord[0]),
                "var_total": float(per_coord.sum()),
            })
    return rows


def run_bounds(config: ExperimentConfig) -> list[BoundReport]:
    """One Monte-Carlo bound report per (n, m, budget) grid point."""
    n_values = config.n_values if config.n_values is not None else (5, 10, 25)
    m_values = config.m_values if config.m_values is not None else (1, 2, 4)
    budgets = config.budgets if config.budgets is not None else (0, 1, 3, 5)
    trials = config.trials if config.trials is not None else 100_000
    seed = Seed(config.seed)
    reports = []
    for n in n_values:
        for m in m_values:
            for budget in budgets:
                reports.append(
                    monte_carlo_report(n, m, budget, trials, seed.spawn(n, m, budget))
                )
    return reports


def run_bio(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Misclassification rates per (n, budget) for the identification task."""
    candidates = (
        CandidateSet.from_file(config.candidates)
        if config.candidates else default_candidates()
    )
    label = config.theta0_label if config.theta0_label is not None else 4
    if label not in candidates.labels():
        raise ConfigError(f"theta0_label {label} not among {candidates.labels()}")
    n_values = config.n_values if config.n_values is not None else (10,)
    budgets = config.budgets if config.budgets is not None else (0, 1, 2)
    trials = config.trials if config.trials is not None else 1000
    seed = Seed(config.seed)
    rows = []
    for n in n_values:
        rates = misclassification_experiment(
            label, candidates, n, tuple(budgets), trials, seed.spawn(n)
        )
        for budget in budgets:
            rows.append({
                "n": n, "budget": budget, "trials": trials,
                "misclassification_rate": rates[budget],
            })
    return rows


def _format_value(value: Any) -> str:
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def format_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(_format_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _record_rows(records: Sequence[ExperimentRecord], columns: Sequence[str]):
    return [tuple(getattr(r, c) for c in columns) for r in records]


def run_and_format(config: ExperimentConfig) -> str:
    """Run the configured experiment and return its serialised output."""
    if config.experiment == "multinomial":
        columns: Sequence[str] = MULTINOMIAL_COLUMNS
        rows = _record_rows(run_multinomial(config), columns)
    elif config.experiment == "binomial":
        columns = BINOMIAL_COLUMNS
        rows = _record_rows(run_binomial(config), columns)
    elif config.experiment == "variance":
        columns = VARIANCE_COLUMNS
        raw = run_variance_sweep(config)
        rows = [tuple(r[c] for c in columns) for r in raw]
    elif config.experiment == "bounds":
        columns = BOUND_CSV_COLUMNS
        rows = [r.csv_values() for r in run_bounds(config)]
    elif config.experiment == "bio":
        columns = BIO_COLUMNS
        raw = run_bio(config)
        rows = [tuple(r[c] for c in columns) for r in raw]
    else:  # unreachable: the config validates the name
        raise ConfigError(f"unknown experiment {config.experiment!r}")
    if config.fmt == "json":
        def plain(v: Any) -> Any:
            if isinstance(v, np.integer):
                return int(v)
            if isinstance(v, np.floating):
                return float(v)
            return v

        payload = [{c: plain(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(payload, indent=2) + "\n"
    return format_csv(columns, rows)


def write_output(text: str, path: str | None) -> None:
    if path is None:
        print(text, end="")
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
