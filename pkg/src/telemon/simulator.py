"""Stand-in for the smart-bracelet hardware.

Publishes telemetry for the four on-board sensors (finger-clip heart
rate, skin conductance, body temperature, movement magnitude) on
``vitals/<device_id>/<sensor>``, byte-compatible with the ingest payload
schema. The signal model is baseline plus seeded uniform jitter, so runs
are deterministic; scripted scenario events override a sensor's value
for a window to drive alert and stress tests. A JSONL capture can be
replayed with scaled timing.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import SENSOR_TO_KIND
from .model import canonical_unit, now_ms

SENSORS = tuple(SENSOR_TO_KIND)


@dataclass(frozen=True)
class SensorSpec:
    baseline: float
    jitter: float
    rate_hz: float = 1.0


DEFAULT_SENSORS = {
    "heart_rate": SensorSpec(baseline=72.0, jitter=4.0),
    "gsr": SensorSpec(baseline=2.0, jitter=0.3),
    "temperature": SensorSpec(baseline=36.6, jitter=0.2),
    "imu": SensorSpec(baseline=1.0, jitter=0.15),
}


@dataclass(frozen=True)
class ScenarioEvent:
    at_offset_s: float
    sensor: str
    override_value: float
    duration_s: float

    def active(self, offset_s: float) -> bool:
        return self.at_offset_s <= offset_s < self.at_offset_s + self.duration_s


@dataclass(frozen=True)
class SimProfile:
    device_id: str
    seed: int = 0
    sensors: dict[str, SensorSpec] = field(default_factory=lambda: dict(DEFAULT_SENSORS))
    scenario: tuple[ScenarioEvent, ...] = ()

    @classmethod
    def load(cls, path: str | Path) -> "SimProfile":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        sensors = {
            name: SensorSpec(
                baseline=spec["baseline"],
                jitter=spec["jitter"],
                rate_hz=spec.get("rate_hz", 1.0),
            )
            for name, spec in doc.get("sensors", {}).items()
        }
        scenario = tuple(
            ScenarioEvent(
                at_offset_s=e["at_offset_s"],
                sensor=e["sensor"],
                override_value=e["override_value"],
                duration_s=e["duration_s"],
            )
            for e in doc.get("scenario", [])
        )
        return cls(
            device_id=doc["device_id"],
            seed=doc.get("seed", 0),
            sensors=sensors or dict(DEFAULT_SENSORS),
            scenario=scenario,
        )


@dataclass
class SimReport:
    published: dict[str, int] = field(default_factory=dict)
    seq_ranges: dict[str, tuple[int, int]] = field(default_factory=dict)
    skipped_lines: int = 0

    @property
    def total(self) -> int:
        return sum(self.published.values())


def _value_at(profile: SimProfile, sensor: str, offset_s: float, rng: random.Random) -> float:
    spec = profile.sensors[sensor]
    value = spec.baseline + rng.uniform(-spec.jitter, spec.jitter)
    for event in profile.scenario:
        if event.sensor == sensor and event.active(offset_s):
            value = event.override_value
    return value


def run_sim(
    profile: SimProfile,
    connection,
    duration_s: float,
    start_ms: int | None = None,
    realtime: bool = False,
    sleep=time.sleep,
) -> SimReport:
    """Publish ``duration_s`` worth of telemetry for every sensor.

    Each sensor emits at its own rate with seq 0..n-1 and deterministic
    scheduling: exactly floor(duration * rate) messages. With
    ``realtime=False`` messages carry synthetic spaced timestamps and go
    out back-to-back, which is how bulk test traffic is generated.
    """
    report = SimReport()
    base_ms = now_ms() if start_ms is None else start_ms
    events: list[tuple[float, str, int]] = []
    for sensor, spec in profile.sensors.items():
        count = int(duration_s * spec.rate_hz)
        period = 1.0 / spec.rate_hz
        events.extend((k * period, sensor, k) for k in range(count))
    events.sort(key=lambda e: (e[0], e[1]))

    rngs = {s: random.Random(f"{profile.seed}:{s}") for s in profile.sensors}
    previous_offset = 0.0
    for offset_s, sensor, seq in events:
        if realtime and offset_s > previous_offset:
            sleep(offset_s - previous_offset)
            previous_offset = offset_s
        payload = {
            "ts": base_ms + int(offset_s * 1000),
            "value": round(_value_at(profile, sensor, offset_s, rngs[sensor]), 4),
            "unit": canonical_unit(SENSOR_TO_KIND[sensor]),
            "seq": seq,
        }
        connection.publish(
            f"vitals/{profile.device_id}/{sensor}",
            json.dumps(payload).encode("utf-8"),
        )
        report.published[sensor] = report.published.get(sensor, 0) + 1
        low, _ = report.seq_ranges.get(sensor, (seq, seq))
        report.seq_ranges[sensor] = (low, seq)
    return report


def replay_log(
    path: str | Path,
    connection,
    speed: float = 1.0,
    sleep=time.sleep,
) -> SimReport:
    """Republish a JSONL capture, preserving relative timing / ``speed``.

    Each line is ``{"topic": ..., "body": {ts, value, unit, seq}}``.
    Malformed lines are skipped and counted. Replaying the same capture
    twice leaves storage unchanged thanks to the idempotence key.
    """
    report = SimReport()
    previous_ts: int | None = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            topic = doc["topic"]
            body = doc["body"]
            ts = int(body["ts"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            report.skipped_lines += 1
            continue
        if previous_ts is not None and ts > previous_ts and speed > 0:
            sleep((ts - previous_ts) / 1000.0 / speed)
        previous_ts = ts
        connection.publish(topic, json.dumps(body).encode("utf-8"))
        sensor = topic.rsplit("/", 1)[-1]
        report.published[sensor] = report.published.get(sensor, 0) + 1
    return report
