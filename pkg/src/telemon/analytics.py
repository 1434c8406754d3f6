"""Rule-based processing of stored vital-sign series.

Windowed aggregation for dashboard graphs, extremum lookup, outlier
flagging, a heart-rate + skin-conductance stress index, threshold
alerting, and questionnaire scoring. Everything here is a pure function
of its inputs, so it is safe to call concurrently from the ingest
notification path and request handlers.

Pinned conventions (required for reproducible oracle tests):

* Buckets are UTC-aligned: hours on the clock hour, days on 00:00 UTC,
  weeks on Monday 00:00 UTC.
* Z-scores use the population standard deviation over the window; a
  zero-variance window flags nothing.
* Stress per 5-minute bucket blends the two deviations equally:
  ``100 * clamp01(0.5*hr_dev + 0.5*gsr_dev)`` where each deviation is
  ``clamp01((x - median24h) / max(p95_24h - median24h, 1e-6))`` computed
  over the trailing window [bucket_start - 24 h, bucket_start). p95 is
  linear interpolation at position 0.95*(n-1) over sorted values.
* Alert severity: an excursion beyond a bound by more than 20 % of
  (high - low) is an alarm, anything less a warning; values exactly at a
  bound fire nothing.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    EmptyWindowError,
    InsufficientBaselineError,
    InsufficientDataError,
    InvalidWindowError,
    MalformedResponseError,
)
from .model import ParameterKind, StoredSample, descriptor_for
from .store import new_id

HOUR_MS = 3_600_000
DAY_MS = 86_400_000
WEEK_MS = 7 * DAY_MS
STRESS_BUCKET_MS = 5 * 60 * 1000
STRESS_BASELINE_MS = 24 * HOUR_MS
STRESS_MIN_BASELINE = 10
STRESS_SPAN_EPSILON = 1e-6
ALARM_EXCESS_FRACTION = 0.2
DEFAULT_ZSCORE_THRESHOLD = 3.0
# 1970-01-01 was a Thursday; Monday of that week is 3 days earlier.
_EPOCH_MONDAY_OFFSET_DAYS = 3


class Granularity(str, Enum):
    HOUR = "hour"
    DAY = "day"
    WEEK = "week"


class Statistic(str, Enum):
    MEAN = "mean"
    MIN = "min"
    MAX = "max"
    COUNT = "count"
    SUM = "sum"
    LAST = "last"


@dataclass(frozen=True)
class AggregationRequest:
    patient_id: str
    kind: ParameterKind
    start_ms: int
    end_ms: int
    granularity: Granularity
    statistic: Statistic


@dataclass(frozen=True)
class AggregateBucket:
    bucket_start_ms: int
    value: float
    sample_count: int


@dataclass(frozen=True)
class AlertRule:
    rule_id: str
    patient_id: str
    kind: ParameterKind
    low: float
    high: float
    enabled: bool = True


@dataclass(frozen=True)
class Alert:
    alert_id: str
    rule_id: str
    sample: StoredSample
    severity: str  # "warning" | "alarm"
    created_ms: int
    acknowledged: bool = False


@dataclass(frozen=True)
class SusResponse:
    answers: tuple[int, ...]


@dataclass(frozen=True)
class SusReport:
    score: float
    per_item_mean: tuple[float, ...]
    per_item_std: tuple[float, ...]


def bucket_start(ts_ms: int, granularity: Granularity) -> int:
    """UTC-calendar-aligned start of the bucket containing ``ts_ms``."""
    if granularity is Granularity.HOUR:
        return ts_ms - ts_ms % HOUR_MS
    if granularity is Granularity.DAY:
        return ts_ms - ts_ms % DAY_MS
    days = ts_ms // DAY_MS
    monday = days - (days + _EPOCH_MONDAY_OFFSET_DAYS) % 7
    return monday * DAY_MS


def aggregate(
    samples: Sequence[StoredSample],
    start_ms: int,
    end_ms: int,
    granularity: Granularity,
    statistic: Statistic,
) -> list[AggregateBucket]:
    """Per-bucket statistic over samples with start_ms <= ts < end_ms.

    Input must already be in storage order (timestamp, source, seq); the
    ``last`` statistic takes the final sample of each bucket under that
    order. Only non-empty buckets are returned, ascending.
    """
    if start_ms >= end_ms:
        raise InvalidWindowError(f"start {start_ms} >= end {end_ms}")
    groups: dict[int, list[float]] = {}
    for sample in samples:
        if not start_ms <= sample.ts_ms < end_ms:
            continue
        groups.setdefault(bucket_start(sample.ts_ms, granularity), []).append(
            sample.value
        )
    buckets = []
    for start in sorted(groups):
        values = groups[start]
        if statistic is Statistic.MEAN:
            value = sum(values) / len(values)
        elif statistic is Statistic.MIN:
            value = min(values)
        elif statistic is Statistic.MAX:
            value = max(values)
        elif statistic is Statistic.COUNT:
            value = float(len(values))
        elif statistic is Statistic.SUM:
            value = sum(values)
        else:
            value = values[-1]
        buckets.append(AggregateBucket(start, value, len(values)))
    return buckets


def aggregate_series(store, request: AggregationRequest) -> list[AggregateBucket]:
    """Store-backed aggregation: query the window, then bucket it."""
    samples = store.query_window(
        request.patient_id, request.kind, request.start_ms, request.end_ms
    )
    return aggregate(
        samples, request.start_ms, request.end_ms, request.granularity, request.statistic
    )


def find_extremum(
    samples: Sequence[StoredSample], which: str = "max"
) -> StoredSample:
    """Sample with the extreme value; ties go to the earliest timestamp."""
    if which not in ("max", "min"):
        raise ValueError(f"which must be 'max' or 'min', got {which!r}")
    if not samples:
        raise EmptyWindowError("no samples in window")
    best = samples[0]
    for sample in samples[1:]:
        better = sample.value > best.value if which == "max" else sample.value < best.value
        if better or (sample.value == best.value and sample.ts_ms < best.ts_ms):
            best = sample
    return best


@dataclass(frozen=True)
class RangePolicy:
    pass


@dataclass(frozen=True)
class ZScorePolicy:
    threshold: float = DEFAULT_ZSCORE_THRESHOLD


def detect_outliers(
    samples: Sequence[StoredSample],
    policy: RangePolicy | ZScorePolicy,
) -> list[StoredSample]:
    """Flag samples outside the plausible range, or beyond a z-score bound."""
    if isinstance(policy, RangePolicy):
        return [
            s for s in samples if not descriptor_for(s.kind).in_range(s.value)
        ]
    if len(samples) < 3:
        raise InsufficientDataError(
            f"z-score policy needs >= 3 samples, got {len(samples)}"
        )
    values = [s.value for s in samples]
    mu = sum(values) / len(values)
    sigma = statistics.pstdev(values)
    if sigma == 0:
        return []
    return [s for s in samples if abs(s.value - mu) / sigma > policy.threshold]


def percentile_linear(values: Sequence[float], q: float) -> float:
    """q-quantile via linear interpolation at position q*(n-1) (inclusive)."""
    ordered = sorted(values)
    if len(ordered) == 1:
        return ordered[0]
    position = q * (len(ordered) - 1)
    lower = int(position)
    frac = position - lower
    if lower + 1 >= len(ordered):
        return ordered[-1]
    return ordered[lower] + (ordered[lower + 1] - ordered[lower]) * frac


def _clamp01(x: float) -> float:
    return 0.0 if x < 0 else 1.0 if x > 1 else x


def _deviation(bucket_mean: float, baseline: Sequence[float]) -> float:
    median = statistics.median(baseline)
    span = max(percentile_linear(baseline, 0.95) - median, STRESS_SPAN_EPSILON)
    return _clamp01((bucket_mean - median) / span)


def stress_index(
    hr: Sequence[StoredSample],
    gsr: Sequence[StoredSample],
    start_ms: int,
    end_ms: int,
) -> list[tuple[int, float]]:
    """Per-5-minute stress values in [0, 100] over [start_ms, end_ms).

    Both inputs must include the trailing day of history before
    ``start_ms``, since each bucket's baseline (median) and span
    (p95 - median) are computed over [bucket_start - 24 h, bucket_start).
    Buckets lacking data or a 10-sample baseline on either series are
    skipped; if no bucket is computable the baseline is insufficient.
    """
    if start_ms >= end_ms:
        raise InvalidWindowError(f"start {start_ms} >= end {end_ms}")
    hr_values = [(s.ts_ms, s.value) for s in hr]
    gsr_values = [(s.ts_ms, s.value) for s in gsr]
    results: list[tuple[int, float]] = []
    first_bucket = bucket_start_5min(start_ms)
    bucket = first_bucket if first_bucket >= start_ms else first_bucket + STRESS_BUCKET_MS
    while bucket + STRESS_BUCKET_MS <= end_ms:
        hr_bucket = [v for t, v in hr_values if bucket <= t < bucket + STRESS_BUCKET_MS]
        gsr_bucket = [v for t, v in gsr_values if bucket <= t < bucket + STRESS_BUCKET_MS]
        if hr_bucket and gsr_bucket:
            hr_base = [v for t, v in hr_values if bucket - STRESS_BASELINE_MS <= t < bucket]
            gsr_base = [v for t, v in gsr_values if bucket - STRESS_BASELINE_MS <= t < bucket]
            if len(hr_base) >= STRESS_MIN_BASELINE and len(gsr_base) >= STRESS_MIN_BASELINE:
                hr_dev = _deviation(sum(hr_bucket) / len(hr_bucket), hr_base)
                gsr_dev = _deviation(sum(gsr_bucket) / len(gsr_bucket), gsr_base)
                stress = 100.0 * _clamp01(0.5 * hr_dev + 0.5 * gsr_dev)
                results.append((bucket, stress))
        bucket += STRESS_BUCKET_MS
    if not results:
        raise InsufficientBaselineError(
            "no bucket in the window has data plus a 10-sample trailing baseline"
        )
    return results


def bucket_start_5min(ts_ms: int) -> int:
    return ts_ms - ts_ms % STRESS_BUCKET_MS


def evaluate_alerts(
    sample: StoredSample,
    rules: Iterable[AlertRule],
    created_ms: int | None = None,
) -> list[Alert]:
    """One alert per enabled matching-kind rule the value violates.

    Values inside or exactly on [low, high] fire nothing. Severity is
    alarm when the excursion beyond the bound exceeds 20 % of the rule
    width, warning otherwise.
    """
    fired = []
    when = created_ms if created_ms is not None else sample.ts_ms
    for rule in rules:
        if not rule.enabled or rule.kind != sample.kind:
            continue
        if rule.low <= sample.value <= rule.high:
            continue
        excess = (
            rule.low - sample.value if sample.value < rule.low else sample.value - rule.high
        )
        severity = "alarm" if excess > ALARM_EXCESS_FRACTION * (rule.high - rule.low) else "warning"
        fired.append(
            Alert(
                alert_id=new_id("alert"),
                rule_id=rule.rule_id,
                sample=sample,
                severity=severity,
                created_ms=when,
            )
        )
    return fired


def sus_score(responses: Sequence[SusResponse]) -> SusReport:
    """Standard 10-item usability scale scoring.

    Per response: 2.5 * sum((odd - 1) + (5 - even)) over the five odd and
    five even items, yielding 0..100; the report carries the mean score
    plus per-item mean and sample standard deviation (0.0 for a single
    response).
    """
    if not responses:
        raise MalformedResponseError("at least one response required")
    for response in responses:
        if len(response.answers) != 10:
            raise MalformedResponseError(
                f"expected 10 answers, got {len(response.answers)}"
            )
        for answer in response.answers:
            if not isinstance(answer, int) or isinstance(answer, bool) or not 1 <= answer <= 5:
                raise MalformedResponseError(f"answer {answer!r} outside 1..5")

    scores = []
    for response in responses:
        contribution = 0
        for i, answer in enumerate(response.answers):
            contribution += (answer - 1) if i % 2 == 0 else (5 - answer)
        scores.append(2.5 * contribution)

    columns = list(zip(*(r.answers for r in responses)))
    per_item_mean = tuple(sum(col) / len(col) for col in columns)
    per_item_std = tuple(
        statistics.stdev(col) if len(col) > 1 else 0.0 for col in columns
    )
    return SusReport(
        score=sum(scores) / len(scores),
        per_item_mean=per_item_mean,
        per_item_std=per_item_std,
    )
