"""Windowed distribution-shift and anomaly detection on traces.

Windows slide inside maximal runs of a constant ground-truth label.  Windows
that straddle a label change mix two laws and would be rejected against every
state by construction, so they are skipped; localizing a change finer than the
window stride is out of scope.  For scan_anomalies the segmentation comes from
the trace's own labels, for expected_state_check from the fault-free reference
run being compared against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .distributions import ANOMALOUS, TestResult, match_state, state_p_values, two_sample_test
from .model import SystemModel
from .simulation import Trace

DEFAULT_WINDOW = 50
DEFAULT_STRIDE = 25
DEFAULT_ALPHA = 0.01


@dataclass(frozen=True)
class WindowVerdict:
    """Outcome of matching one window of one sensor against its state set."""

    sensor: str
    start: int
    length: int
    matched: str
    p_values: dict[str, float]
    alpha: float

    @property
    def anomalous(self) -> bool:
        return self.matched == ANOMALOUS

    @property
    def p_best(self) -> float:
        return max(self.p_values.values())


@dataclass(frozen=True)
class AnomalyReport:
    window: int
    stride: int
    alpha: float
    verdicts: tuple[WindowVerdict, ...]

    def anomalous_verdicts(self) -> list[WindowVerdict]:
        return [v for v in self.verdicts if v.anomalous]

    def anomalous_rate(self) -> float:
        if not self.verdicts:
            return 0.0
        return len(self.anomalous_verdicts()) / len(self.verdicts)


@dataclass(frozen=True)
class Deviation:
    """A window whose matched state differs from the expected one."""

    sensor: str
    start: int
    expected: str
    matched: str


def constant_label_windows(
    labels: Sequence[str], window: int, stride: int
) -> Iterator[tuple[int, str]]:
    """Yield (start, label) for every stride-aligned window inside a maximal
    constant-label segment."""
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be >= 1")
    n = len(labels)
    seg_start = 0
    for i in range(1, n + 1):
        if i == n or labels[i] != labels[seg_start]:
            start = seg_start
            while start + window <= i:
                yield start, labels[seg_start]
                start += stride
            seg_start = i


def detect_effect(
    trace: Trace, sensor: str, t: int, window: int, alpha: float
) -> tuple[bool, TestResult]:
    """Test for a distribution shift of ``sensor`` at tick ``t``.

    Compares the windows [t-window, t) and [t, t+window) with the two-sample
    test; an effect is declared iff p < alpha.
    """
    if t - window < 0 or t + window > len(trace):
        raise ValueError(
            f"windows [{t - window}, {t + window}) out of range for trace of length {len(trace)}"
        )
    values = trace.values_for(sensor)
    result = two_sample_test(values[t - window : t], values[t : t + window])
    return result.p_value < alpha, result


def scan_anomalies(
    trace: Trace,
    model: SystemModel,
    window: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
    alpha: float = DEFAULT_ALPHA,
) -> AnomalyReport:
    """Match every constant-label window of every sensor against its state set."""
    verdicts = []
    for sensor_id in trace.sensor_ids:
        states = model.sensor(sensor_id).states
        values = trace.values_for(sensor_id)
        labels = trace.labels_for(sensor_id)
        for start, _ in constant_label_windows(labels, window, stride):
            segment = values[start : start + window]
            p_values = {label: r.p_value for label, r in state_p_values(segment, states).items()}
            verdicts.append(
                WindowVerdict(
                    sensor=sensor_id,
                    start=start,
                    length=window,
                    matched=match_state(segment, states, alpha),
                    p_values=p_values,
                    alpha=alpha,
                )
            )
    return AnomalyReport(window=window, stride=stride, alpha=alpha, verdicts=tuple(verdicts))


def expected_state_check(
    trace: Trace,
    reference: Trace,
    model: SystemModel,
    window: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
    alpha: float = DEFAULT_ALPHA,
) -> list[Deviation]:
    """Compare a trace against the time-dependent expectations of a reference run.

    The reference trace must come from a fault-free run of the same scenario.
    For every window in which the reference holds a constant label, the trace's
    values are matched against the sensor's state set; a deviation is emitted
    whenever the matched state differs from the reference label or is
    ANOMALOUS.
    """
    if len(trace) != len(reference):
        raise ValueError(
            f"trace/reference length mismatch: {len(trace)} vs {len(reference)}"
        )
    if set(trace.sensor_ids) != set(reference.sensor_ids):
        raise ValueError("trace and reference cover different sensor sets")
    deviations = []
    for sensor_id in trace.sensor_ids:
        states = model.sensor(sensor_id).states
        values = trace.values_for(sensor_id)
        expected_labels = reference.labels_for(sensor_id)
        for start, expected in constant_label_windows(expected_labels, window, stride):
            matched = match_state(values[start : start + window], states, alpha)
            if matched != expected:
                deviations.append(
                    Deviation(sensor=sensor_id, start=start, expected=expected, matched=matched)
                )
    return deviations
