"""Parametric sensor-state distributions and the statistical tests built on them.

A sensor state is a probability law from a small closed family (normal,
uniform, degenerate).  Window-level questions -- "does this sample still look
like state X?", "did the law shift between these two windows?" -- are answered
with Kolmogorov-Smirnov tests.  P-values come from the asymptotic series

    p = 2 * sum_{k>=1} (-1)^(k-1) * exp(-2 k^2 n d^2)

truncated once a term drops below 1e-10 or after 100 terms, and clamped to
[0, 1].  Against a degenerate (point-mass) law the KS statistic is undefined,
so an exact-match test with absolute tolerance 1e-9 is used instead.

Sampling uses numpy's default bit generator (PCG64) seeded explicitly, so a
fixed (distribution, seed, n) always reproduces the same sequence on a given
platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Verdict returned by match_state when no state fits.  Reserved: a sensor
# state label may never equal this token.
ANOMALOUS = "ANOMALOUS"

# Absolute tolerance of the exact-match test against a point mass.
DEGENERATE_TOLERANCE = 1e-9

_SERIES_MAX_TERMS = 100
_SERIES_EPS = 1e-10


@dataclass(frozen=True)
class Normal:
    mean: float
    stddev: float

    def __post_init__(self):
        if not self.stddev > 0:
            raise ValueError(f"normal stddev must be > 0, got {self.stddev}")


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"uniform bounds must satisfy lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Degenerate:
    value: float


Distribution = Normal | Uniform | Degenerate


@dataclass(frozen=True)
class TestResult:
    """Outcome of a goodness-of-fit or two-sample test."""

    statistic: float
    p_value: float
    sample_size: int


def draw(dist: Distribution, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` values from ``dist`` using an existing generator."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if isinstance(dist, Normal):
        return rng.normal(dist.mean, dist.stddev, n)
    if isinstance(dist, Uniform):
        return rng.uniform(dist.lo, dist.hi, n)
    if isinstance(dist, Degenerate):
        return np.full(n, dist.value, dtype=float)
    raise TypeError(f"not a distribution: {dist!r}")


def sample(dist: Distribution, seed: int, n: int) -> np.ndarray:
    """Draw ``n`` values from ``dist``; deterministic for a fixed seed."""
    return draw(dist, np.random.default_rng(seed), n)


def cdf(dist: Distribution, x: float) -> float:
    """Cumulative distribution function of ``dist`` at ``x``."""
    if isinstance(dist, Normal):
        z = (x - dist.mean) / (dist.stddev * math.sqrt(2.0))
        return 0.5 * (1.0 + math.erf(z))
    if isinstance(dist, Uniform):
        if x <= dist.lo:
            return 0.0
        if x >= dist.hi:
            return 1.0
        return (x - dist.lo) / (dist.hi - dist.lo)
    if isinstance(dist, Degenerate):
        return 1.0 if x >= dist.value else 0.0
    raise TypeError(f"not a distribution: {dist!r}")


def _ks_p_value(d: float, n_eff: float) -> float:
    """Asymptotic KS p-value for statistic ``d`` at effective sample size ``n_eff``."""
    if d <= 0.0:
        return 1.0
    t = n_eff * d * d
    total = 0.0
    for k in range(1, _SERIES_MAX_TERMS + 1):
        term = math.exp(-2.0 * k * k * t)
        total += term if k % 2 == 1 else -term
        if term < _SERIES_EPS:
            break
    return min(1.0, max(0.0, 2.0 * total))


def _as_sample(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("empty sample")
    return arr


def gof_test(values: Sequence[float], dist: Distribution) -> TestResult:
    """One-sample goodness-of-fit test of ``values`` against ``dist``.

    Kolmogorov-Smirnov for continuous laws; against a Degenerate law the
    statistic is the largest absolute deviation from the point mass and the
    p-value is 1.0 within DEGENERATE_TOLERANCE, else 0.0.
    """
    arr = _as_sample(values)
    n = arr.size
    if isinstance(dist, Degenerate):
        stat = float(np.max(np.abs(arr - dist.value)))
        p = 1.0 if stat <= DEGENERATE_TOLERANCE else 0.0
        return TestResult(statistic=stat, p_value=p, sample_size=n)
    ordered = np.sort(arr)
    f = np.array([cdf(dist, x) for x in ordered])
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - f))
    d_minus = float(np.max(f - (grid - 1.0 / n)))
    d = max(d_plus, d_minus, 0.0)
    return TestResult(statistic=d, p_value=_ks_p_value(d, n), sample_size=n)


def two_sample_test(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sample KS test for a distribution shift between ``a`` and ``b``.

    Symmetric in its arguments; the p-value uses the effective sample size
    n_a * n_b / (n_a + n_b).
    """
    xs = np.sort(_as_sample(a))
    ys = np.sort(_as_sample(b))
    pooled = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, pooled, side="right") / xs.size
    cdf_y = np.searchsorted(ys, pooled, side="right") / ys.size
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    n_eff = xs.size * ys.size / (xs.size + ys.size)
    return TestResult(statistic=d, p_value=_ks_p_value(d, n_eff), sample_size=xs.size + ys.size)


def _check_state_set(states: Sequence[tuple[str, Distribution]]) -> None:
    if not states:
        raise ValueError("state set must not be empty")
    labels = [label for label, _ in states]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate state labels: {labels}")
    if ANOMALOUS in labels:
        raise ValueError(f"state label {ANOMALOUS!r} is reserved")


def state_p_values(
    values: Sequence[float], states: Sequence[tuple[str, Distribution]]
) -> dict[str, TestResult]:
    """Goodness-of-fit result of ``values`` against every labeled state."""
    _check_state_set(states)
    return {label: gof_test(values, dist) for label, dist in states}


def match_state(
    values: Sequence[float],
    states: Sequence[tuple[str, Distribution]],
    alpha: float,
) -> str:
    """Match a sample to one state of a finite state set, or declare it anomalous.

    Each state is tested at the Bonferroni-corrected level alpha/len(states).
    Returns the label with the highest p-value among the non-rejected states,
    or ANOMALOUS if every state is rejected.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    results = state_p_values(values, states)
    level = alpha / len(results)
    survivors = [(label, r.p_value) for label, r in results.items() if r.p_value >= level]
    if not survivors:
        return ANOMALOUS
    return max(survivors, key=lambda pair: pair[1])[0]
