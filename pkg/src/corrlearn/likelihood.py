"""Maximum-likelihood identification over a finite candidate set.

The use case: a student watches an agent act and identifies which of a
few known behavioural models (labelled by an integer parameter) produced
the actions. The action-count vector is a sufficient statistic for an
i.i.d. categorical likelihood, so the correction process plugs in here
unchanged, with the terminal reward swapped for an identification score.

Candidate sets ship as data files, not code constants, so other forward
models drop in without edits. The default set has three models over four
actions, labelled 1, 4 and 8.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core import Categorical, CountVector, Seed, counts_from_sequence, sample_sequence
from .dp import solve
from .mdp import MdpSpec, TerminalReward
from .teacher import run_online

CANDIDATE_FILE_VERSION = 1


@dataclass(frozen=True)
class CandidateModel:
    theta: int
    action_dist: Categorical


@dataclass(frozen=True)
class CandidateSet:
    models: tuple[CandidateModel, ...]

    def __post_init__(self) -> None:
        if len(self.models) < 2:
            raise ValueError("need at least two candidate models")
        labels = [m.theta for m in self.models]
        if len(set(labels)) != len(labels):
            raise ValueError("candidate labels must be distinct")
        counts = {m.action_dist.k for m in self.models}
        if len(counts) != 1:
            raise ValueError("all candidates must share one action count")

    @property
    def action_count(self) -> int:
        return self.models[0].action_dist.k

    def labels(self) -> tuple[int, ...]:
        return tuple(m.theta for m in self.models)

    def by_label(self, theta: int) -> CandidateModel:
        for m in self.models:
            if m.theta == theta:
                return m
        raise KeyError(f"no candidate labelled {theta}")

    @classmethod
    def from_file(cls, path: str | Path) -> "CandidateSet":
        return _parse_candidates(Path(path).read_text())

    def to_file(self, path: str | Path) -> None:
        payload = {
            "version": CANDIDATE_FILE_VERSION,
            "models": [
                {"theta": m.theta, "probs": list(m.action_dist.probs)}
                for m in self.models
            ],
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _parse_candidates(text: str) -> CandidateSet:
    data = json.loads(text)
    if data.get("version") != CANDIDATE_FILE_VERSION:
        raise ValueError(f"unsupported candidate file version {data.get('version')!r}")
    return CandidateSet(
        tuple(
            CandidateModel(int(m["theta"]), Categorical(tuple(m["probs"])))
            for m in data["models"]
        )
    )


def default_candidates() -> CandidateSet:
    text = (
        resources.files("corrlearn").joinpath("data/candidates_default.json").read_text()
    )
    return _parse_candidates(text)


def negative_log_likelihood(counts: CountVector, model: CandidateModel) -> float:
    """-sum_a counts[a] * ln p(a); +inf when an impossible action was seen.

    Infinity is a value here, not an error: it just rules the model out.
    """
    if counts.k != model.action_dist.k:
        raise ValueError(f"dimension mismatch: {counts.k} vs {model.action_dist.k}")
    total = 0.0
    for c, p in zip(counts.counts, model.action_dist.probs):
        if c == 0:
            continue
        if p == 0.0:
            return math.inf
        total -= c * math.log(p)
    return total


def ml_estimate(counts: CountVector, candidates: CandidateSet) -> int:
    """Label of the candidate minimising the negative log likelihood.

    Ties break to the smallest label.
    """
    if counts.total < 1:
        raise ValueError("no observations")
    best = math.inf
    best_label: int | None = None
    for model in sorted(candidates.models, key=lambda m: m.theta):
        nll = negative_log_likelihood(counts, model)
        if nll < best:
            best = nll
            best_label = model.theta
    if best_label is None:
        raise ValueError("history impossible under all candidates")
    return best_label


def bio_terminal_reward(
    theta0_label: int, candidates: CandidateSet, kind: str = "absolute"
) -> TerminalReward:
    """Identification reward on final counts.

    "absolute" scores -|estimate - theta0|; "indicator" scores -1 for any
    misidentification. Both depend on the final counts only.
    """
    candidates.by_label(theta0_label)  # raises KeyError for unknown labels
    if kind not in ("absolute", "indicator"):
        raise ValueError(f"unknown reward kind {kind!r}")

    def evaluate(counts: CountVector) -> float:
        estimate = ml_estimate(counts, candidates)
        if kind == "absolute":
            return -abs(estimate - theta0_label)
        return -1.0 if estimate != theta0_label else 0.0

    return TerminalReward(evaluate)


def misclassification_experiment(
    theta0_label: int,
    candidates: CandidateSet,
    n: int,
    budgets: tuple[int, ...],
    trials: int,
    seed: Seed,
    reward_kind: str = "absolute",
) -> dict[int, float]:
    """Fraction of episodes where the student identifies the wrong model,
    per budget.

    Observations come from the true model's action distribution; the
    teacher replays its solved policy on each stream. Trial streams are
    derived from (seed, trial) only, so every budget sees the same data.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    true_dist = candidates.by_label(theta0_label).action_dist
    reward = bio_terminal_reward(theta0_label, candidates, kind=reward_kind)
    sequences = [
        sample_sequence(true_dist, n, seed.spawn(trial)) for trial in range(trials)
    ]
    rates: dict[int, float] = {}
    for budget in budgets:
        spec = MdpSpec(
            k=candidates.action_count, n=n, budget=budget,
            model=true_dist, reward=reward,
        )
        policy, _ = solve(spec)
        wrong = 0
        for seq in sequences:
            trace = run_online(seq, policy, budget)
            counts = counts_from_sequence(trace.corrected)
            if ml_estimate(counts, candidates) != theta0_label:
                wrong += 1
        rates[budget] = wrong / trials
    return rates
