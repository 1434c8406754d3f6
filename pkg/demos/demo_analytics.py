"""Analytics walkthrough: aggregation, extremum, outliers, stress, scoring.

Everything operates on plain sample lists, so this file doubles as a
usage reference for the processing layer.

Run:  python demos/demo_analytics.py
"""

import random

from telemon.analytics import (
    AlertRule,
    Granularity,
    RangePolicy,
    Statistic,
    SusResponse,
    ZScorePolicy,
    aggregate,
    detect_outliers,
    evaluate_alerts,
    find_extremum,
    stress_index,
    sus_score,
)
from telemon.model import ParameterKind, Source, StoredSample

DAY_MS = 86_400_000
HOUR_MS = 3_600_000
START = 1_700_000_000_000 - 1_700_000_000_000 % DAY_MS


def sample(kind, ts, value):
    return StoredSample(
        patient_id="pat-1", kind=kind, ts_ms=ts, value=value, source=Source.manual()
    )


def main() -> None:
    rng = random.Random(42)

    print("== a week of systolic pressure, aggregated per day ==")
    pressure = [
        sample(ParameterKind.BLOOD_PRESSURE_SYSTOLIC, START + h * HOUR_MS, 115 + rng.uniform(0, 25))
        for h in range(7 * 24)
    ]
    for bucket in aggregate(pressure, START, START + 7 * DAY_MS, Granularity.DAY, Statistic.MEAN):
        print(f"  day {bucket.bucket_start_ms}: mean {bucket.value:.1f} over {bucket.sample_count} readings")

    highest = find_extremum(pressure, "max")
    print(f"highest value of the week: {highest.value:.1f} at {highest.ts_ms} (annotate this one)")

    print("== outlier flagging ==")
    with_spike = pressure + [sample(ParameterKind.BLOOD_PRESSURE_SYSTOLIC, START + 7 * DAY_MS - 1, 260.0)]
    slipped = detect_outliers(with_spike, RangePolicy())
    print(f"  range policy flags {[(s.value) for s in slipped]} (outside plausible bounds)")
    zflags = detect_outliers(with_spike, ZScorePolicy(threshold=3.0))
    print(f"  z-score policy (3.0 sigma) flags {[round(s.value, 1) for s in zflags]}")

    print("== stress from heart rate + skin conductance ==")
    hr = [sample(ParameterKind.HEART_RATE, START + t * 60_000, 70 + rng.uniform(-4, 4))
          for t in range(24 * 60)]
    gsr = [sample(ParameterKind.GSR, START + t * 60_000, 2.0 + rng.uniform(-0.3, 0.3))
           for t in range(24 * 60)]
    # a mildly agitated stretch in the evaluation window
    window_start = START + DAY_MS
    hr += [sample(ParameterKind.HEART_RATE, window_start + t * 60_000, 73.0) for t in range(15)]
    gsr += [sample(ParameterKind.GSR, window_start + t * 60_000, 2.15) for t in range(15)]
    points = stress_index(hr, gsr, window_start, window_start + HOUR_MS)
    print(f"  {len(points)} five-minute buckets, stress {min(v for _, v in points):.0f}"
          f"..{max(v for _, v in points):.0f} / 100")

    print("== threshold alerts ==")
    rule = AlertRule("r1", "pat-1", ParameterKind.HEART_RATE, low=50, high=120)
    for value in (72, 125, 150):
        fired = evaluate_alerts(sample(ParameterKind.HEART_RATE, START, float(value)), [rule])
        verdict = fired[0].severity if fired else "no alert"
        print(f"  heart rate {value}: {verdict}")

    print("== usability questionnaire scoring ==")
    panel = [
        SusResponse(answers=(4, 2, 4, 2, 5, 2, 4, 4, 4, 2)),
        SusResponse(answers=(4, 1, 5, 2, 5, 2, 4, 4, 4, 3)),
        SusResponse(answers=(4, 2, 3, 3, 4, 2, 3, 4, 4, 2)),
    ]
    result = sus_score(panel)
    print(f"  panel score {result.score:.1f}/100")
    print(f"  per-item means {[round(m, 1) for m in result.per_item_mean]}")


if __name__ == "__main__":
    main()
