"""Validation-trace smoothing and checkpoint selection.

Traces are smoothed with a centered moving average (default 7 points);
windows must fit entirely inside the trace, so no edge padding and no
partial windows.  Smoothing is by index, not step distance: traces come
from periodic evaluations.  The selected checkpoint is the center of
the window with the highest smoothed value, earliest step on ties.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass
from math import isfinite
from typing import Iterable

from labelbalance.dataset import Source, _as_lines
from labelbalance.errors import (
    EmptyFile,
    MalformedRow,
    TraceSkippedWarning,
    TraceTooShort,
)


@dataclass(frozen=True)
class MetricTrace:
    """Metric values at strictly increasing training steps."""

    points: tuple[tuple[int, float], ...]
    metric_name: str = ""
    run_id: str = ""

    def __post_init__(self):
        last = None
        for step, value in self.points:
            if last is not None and step <= last:
                raise ValueError(f"steps must be strictly increasing at {step}")
            if not isfinite(value):
                raise ValueError(f"non-finite value at step {step}")
            last = step

    def __len__(self) -> int:
        return len(self.points)


def parse_trace_csv(source: Source, run_id: str = "") -> MetricTrace:
    """Parse a ``step,value`` CSV with optional ``# metric:`` / ``# run:``
    comment headers."""
    metric_name = ""
    points = []
    for num, raw in enumerate(_as_lines(source), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("metric:"):
                metric_name = body[len("metric:"):].strip()
            elif body.startswith("run:"):
                run_id = body[len("run:"):].strip()
            continue
        if line.replace(" ", "") == "step,value":
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise MalformedRow(f"line {num}: expected 'step,value'")
        try:
            points.append((int(parts[0]), float(parts[1])))
        except ValueError:
            raise MalformedRow(f"line {num}: bad step/value {line!r}") from None
    if not points:
        raise EmptyFile("trace has no points")
    try:
        return MetricTrace(tuple(points), metric_name, run_id)
    except ValueError as exc:
        raise MalformedRow(str(exc)) from None


def moving_average(trace: MetricTrace, window: int = 7) -> MetricTrace:
    """Centered moving average; output length is n - window + 1."""
    _check_window(window)
    n = len(trace)
    if n < window:
        raise TraceTooShort(f"trace length {n} < window {window}")
    values = [v for _, v in trace.points]
    half = window // 2
    smoothed = []
    for i in range(n - window + 1):
        mean = sum(values[i:i + window]) / window
        smoothed.append((trace.points[i + half][0], mean))
    return MetricTrace(tuple(smoothed), trace.metric_name, trace.run_id)


def select_checkpoint(trace: MetricTrace, window: int = 7) -> tuple[int, float]:
    """Step and value of the highest smoothed point, earliest on ties."""
    smoothed = moving_average(trace, window)
    best_step, best_value = smoothed.points[0]
    for step, value in smoothed.points[1:]:
        if value > best_value:
            best_step, best_value = step, value
    return best_step, best_value


def select_across_runs(traces: Iterable[MetricTrace],
                       window: int = 7) -> tuple[str, int, float]:
    """Best checkpoint over several runs.

    Too-short traces are skipped with a warning.  Ties go to the
    lexicographically smallest run id, then the earliest step.
    """
    best = None
    any_trace = False
    for trace in traces:
        any_trace = True
        try:
            step, value = select_checkpoint(trace, window)
        except TraceTooShort:
            _warnings.warn(
                f"trace {trace.run_id!r} shorter than window {window}; skipped",
                TraceSkippedWarning,
                stacklevel=2,
            )
            continue
        key = (-value, trace.run_id, step)
        if best is None or key < best[0]:
            best = (key, trace.run_id, step, value)
    if not any_trace:
        raise ValueError("no traces given")
    if best is None:
        raise TraceTooShort(f"every trace is shorter than window {window}")
    return best[1], best[2], best[3]


def _check_window(window: int) -> None:
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be an odd positive integer, got {window}")
