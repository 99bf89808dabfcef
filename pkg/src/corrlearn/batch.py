"""Offline correction of a fully observed count vector.

The batch corrector sees the whole realisation at once and moves up to b
observations between outcome classes to minimise the student's l1 error.
It lower-bounds anything an online teacher can achieve on the same data,
and the rounding floor ``e_min`` lower-bounds both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import Categorical, CountVector, count_vectors, empirical_estimate, l1_error

# Below this many candidate count vectors the exact optimum is found by
# enumeration; above it the greedy unit-move path is used (verified equal
# on enumerable instances by the test suite).
ENUM_LIMIT = 200_000


class EMin(NamedTuple):
    error: float
    achiever: CountVector


@dataclass(frozen=True)
class BatchResult:
    corrected: CountVector
    corrections_used: int
    error: float


def _moves_between(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    # One moved observation changes two entries by one each.
    return sum(abs(x - y) for x, y in zip(a, b)) // 2


def _apportion(theta0: Categorical, n: int) -> tuple[int, ...]:
    """Largest-remainder rounding of theta0*n to integer counts summing to n.

    Each target is rounded down and the leftover units go to the largest
    fractional parts, ties to the lowest index. For an l1 objective this
    is an exact minimiser: any optimum rounds each target to its floor or
    ceiling, and the leftover-unit assignment above maximises the gain.
    """
    targets = [p * n for p in theta0.probs]
    floors = [math.floor(t) for t in targets]
    remainder = n - sum(floors)
    fracs = sorted(
        range(theta0.k), key=lambda i: (-(targets[i] - floors[i]), i)
    )
    counts = list(floors)
    for i in fracs[:remainder]:
        counts[i] += 1
    return tuple(counts)


def e_min(n: int, theta0: Categorical, method: str = "auto") -> EMin:
    """Minimum l1 error reachable with n samples, over all count vectors.

    The floor exists because counts are integers: theta0*n generally is
    not. ``method`` picks enumeration ("enumerate"), largest-remainder
    apportionment ("apportion"), or whichever is cheap ("auto"); both are
    exact and the tests check they agree wherever enumeration is feasible.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if method == "auto":
        method = "enumerate" if math.comb(n + theta0.k - 1, theta0.k - 1) <= ENUM_LIMIT else "apportion"
    if method == "apportion":
        counts = CountVector(_apportion(theta0, n), n)
        return EMin(l1_error(empirical_estimate(counts), theta0), counts)
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    best_err = math.inf
    best: tuple[int, ...] | None = None
    for cand in count_vectors(n, theta0.k):
        err = math.fsum(abs(c / n - p) for c, p in zip(cand, theta0.probs))
        if err < best_err - 1e-15:  # strict: keeps the lexicographically smallest
            best_err = err
            best = cand
    assert best is not None
    return EMin(best_err, CountVector(best, n))


def attainable_error(
    n: int, theta0: Categorical, budget: int, theta_hat: Categorical
) -> float:
    """Best error reachable from estimate ``theta_hat`` with ``budget`` moves.

    Binomial-only closed form: each moved observation shrinks the l1 error
    by exactly 2/n until the rounding floor is hit.
    """
    if theta0.k != 2 or theta_hat.k != 2:
        raise ValueError("binomial-only formula")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    return max(l1_error(theta0, theta_hat) - 2 * budget / n, e_min(n, theta0).error)


def _greedy_correct(
    counts: tuple[int, ...], theta0: Categorical, budget: int, n: int
) -> tuple[int, ...]:
    """Move one observation at a time from the most over-full class to the
    most under-full one; stop when no move strictly helps.

    Per-class cost |c_i - n*theta_i| is convex in c_i, so steepest unit
    moves reach the exact optimum.
    """
    targets = [p * n for p in theta0.probs]
    current = list(counts)
    for _ in range(budget):
        best_gain = 0.0
        best_pair: tuple[int, int] | None = None
        for i in range(len(current)):
            if current[i] == 0:
                continue
            gain_dec = abs(current[i] - targets[i]) - abs(current[i] - 1 - targets[i])
            for j in range(len(current)):
                if j == i:
                    continue
                gain_inc = abs(current[j] - targets[j]) - abs(current[j] + 1 - targets[j])
                gain = gain_dec + gain_inc
                if gain > best_gain + 1e-15:
                    best_gain = gain
                    best_pair = (i, j)
        if best_pair is None:
            break
        i, j = best_pair
        current[i] -= 1
        current[j] += 1
    return tuple(current)


def batch_correct(
    counts: CountVector, theta0: Categorical, budget: int, method: str = "auto"
) -> BatchResult:
    """Optimally re-assign at most ``budget`` observations between classes.

    One budget unit moves one observation (count distance 2). Ties among
    optimal corrected vectors go to the lexicographically smallest, so
    results are reproducible byte for byte.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if counts.k != theta0.k:
        raise ValueError(f"dimension mismatch: {counts.k} vs {theta0.k}")
    n = counts.total
    if n < 1:
        raise ValueError("no observations")
    if method == "auto":
        method = "enumerate" if math.comb(n + counts.k - 1, counts.k - 1) <= ENUM_LIMIT else "greedy"
    original = counts.counts
    if budget == 0:
        corrected = original
    elif method == "greedy":
        corrected = _greedy_correct(original, theta0, budget, n)
    elif method == "enumerate":
        best_err = math.inf
        best = original
        for cand in count_vectors(n, counts.k):
            if _moves_between(original, cand) > budget:
                continue
            err = math.fsum(abs(c / n - p) for c, p in zip(cand, theta0.probs))
            if err < best_err - 1e-15:
                best_err = err
                best = cand
        corrected = best
    else:
        raise ValueError(f"unknown method {method!r}")
    corrected_cv = CountVector(corrected, counts.n_target)
    return BatchResult(
        corrected=corrected_cv,
        corrections_used=_moves_between(original, corrected),
        error=l1_error(empirical_estimate(corrected_cv), theta0),
    )
