"""Custom-device telemetry ingestion.

Subscribes to ``vitals/+/+``, parses each message, validates it, stores
it, and notifies the analytics hook. Hostile input never crashes the
loop: malformed or unknown-device messages are counted and skipped. On
broker loss the service reconnects with exponential backoff (base 1 s,
cap 60 s).

Wire format (UTF-8 JSON, unknown extra keys ignored):

    topic:   vitals/<device_id>/<sensor>
    payload: {"ts": <int ms>, "value": <number>, "unit": "<string>", "seq": <int>}

Sensors map to catalog kinds: heart_rate -> heart_rate, gsr -> gsr,
temperature -> body_temperature, imu -> activity_magnitude.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable

from .bus import reconnect_delays
from .errors import (
    MalformedBodyError,
    MalformedTopicError,
    UnitMismatchError,
    UnknownDeviceError,
)
from .model import (
    ParameterKind,
    Source,
    StoredSample,
    ValidationStatus,
    VitalSample,
    canonical_unit,
    now_ms,
    validate_sample,
)
from .store import Store

log = logging.getLogger("telemon.ingest")

TOPIC_PREFIX = "vitals"
SUBSCRIPTION_FILTER = "vitals/+/+"
DEVICE_ID_RE = re.compile(r"^[A-Za-z0-9_-]{4,64}$")

SENSOR_TO_KIND = {
    "heart_rate": ParameterKind.HEART_RATE,
    "gsr": ParameterKind.GSR,
    "temperature": ParameterKind.BODY_TEMPERATURE,
    "imu": ParameterKind.ACTIVITY_MAGNITUDE,
}


@dataclass(frozen=True)
class DeviceTopic:
    device_id: str
    sensor: str

    def render(self) -> str:
        return f"{TOPIC_PREFIX}/{self.device_id}/{self.sensor}"

    @classmethod
    def parse(cls, topic: str) -> "DeviceTopic":
        parts = topic.split("/")
        if len(parts) != 3 or parts[0] != TOPIC_PREFIX:
            raise MalformedTopicError(f"topic {topic!r} is not vitals/<device>/<sensor>")
        device_id, sensor = parts[1], parts[2]
        if not DEVICE_ID_RE.match(device_id):
            raise MalformedTopicError(f"bad device id {device_id!r}")
        if sensor not in SENSOR_TO_KIND:
            raise MalformedTopicError(f"unknown sensor {sensor!r}")
        return cls(device_id, sensor)


def parse_payload(
    topic: str,
    body: bytes,
    device_owner: Callable[[str], str | None],
) -> VitalSample:
    """Turn one raw message into a VitalSample, or raise a typed error.

    ``device_owner`` resolves a device id to its patient (the device
    registry); unregistered devices are rejected, never auto-created.
    """
    parsed_topic = DeviceTopic.parse(topic)
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedBodyError(f"payload is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedBodyError("payload is not a JSON object")

    ts = doc.get("ts")
    value = doc.get("value")
    unit = doc.get("unit")
    seq = doc.get("seq")
    if not isinstance(ts, int) or isinstance(ts, bool):
        raise MalformedBodyError("ts must be integer epoch milliseconds")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise MalformedBodyError("value must be a number")
    if not isinstance(unit, str):
        raise MalformedBodyError("unit must be a string")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise MalformedBodyError("seq must be a non-negative integer")

    kind = SENSOR_TO_KIND[parsed_topic.sensor]
    expected_unit = canonical_unit(kind)
    if unit != expected_unit:
        raise UnitMismatchError(
            f"unit {unit!r} for {parsed_topic.sensor}, expected {expected_unit!r}"
        )
    patient_id = device_owner(parsed_topic.device_id)
    if patient_id is None:
        raise UnknownDeviceError(f"device {parsed_topic.device_id!r} not registered")
    return VitalSample(
        patient_id=patient_id,
        kind=kind,
        ts_ms=ts,
        value=float(value),
        source=Source.custom_device(parsed_topic.device_id),
        seq=seq,
    )


@dataclass
class IngestStats:
    """Monotone counters since service start.

    Invariant: received == stored + duplicates + malformed +
    unknown_device + rejected at every observation point.
    """

    received: int = 0
    stored: int = 0
    duplicates: int = 0
    malformed: int = 0
    unknown_device: int = 0
    rejected: int = 0
    flagged: int = 0
    reconnects: int = 0

    def snapshot(self) -> dict[str, int]:
        return {
            "received": self.received,
            "stored": self.stored,
            "duplicates": self.duplicates,
            "malformed": self.malformed,
            "unknown_device": self.unknown_device,
            "rejected": self.rejected,
            "flagged": self.flagged,
            "reconnects": self.reconnects,
        }


@dataclass
class IngestConfig:
    client_id: str = "telemon-ingest"
    backoff_base_s: float = 1.0
    backoff_cap_s: float = 60.0
    future_skew_ms: int = 5 * 60 * 1000


class IngestService:
    """The long-running ingest loop over one broker connection.

    ``on_sample`` is the analytics notification hook, called once per
    newly stored (non-duplicate) sample with its flagged status.
    """

    def __init__(
        self,
        broker,
        store: Store,
        config: IngestConfig | None = None,
        on_sample: Callable[[StoredSample], None] | None = None,
        clock: Callable[[], int] = now_ms,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self._broker = broker
        self._store = store
        self._config = config or IngestConfig()
        self._on_sample = on_sample
        self._clock = clock
        self._sleep = sleep
        self._stats = IngestStats()
        self._stats_lock = threading.Lock()
        self._conn = None
        self._running = False
        self._reconnector: threading.Thread | None = None

    def start(self) -> "IngestService":
        self._running = True
        self._connect()
        return self

    def stop(self) -> None:
        self._running = False
        if self._conn is not None:
            self._conn.close()
            self._conn = None

    @property
    def running(self) -> bool:
        return self._running

    def stats(self) -> dict[str, int]:
        with self._stats_lock:
            return self._stats.snapshot()

    def _connect(self) -> None:
        conn = self._broker.connect(self._config.client_id)
        conn.subscribe(SUBSCRIPTION_FILTER, self._handle)
        conn.on_disconnect(self._schedule_reconnect)
        self._conn = conn

    def _schedule_reconnect(self) -> None:
        if not self._running:
            return
        thread = threading.Thread(target=self._reconnect_loop, daemon=True)
        self._reconnector = thread
        thread.start()

    def _reconnect_loop(self) -> None:
        for delay in reconnect_delays(self._config.backoff_base_s, self._config.backoff_cap_s):
            if not self._running:
                return
            self._sleep(delay)
            try:
                self._connect()
            except Exception as exc:
                log.info("reconnect failed, retrying: %s", exc)
                continue
            with self._stats_lock:
                self._stats.reconnects += 1
            log.info("reconnected to broker")
            return

    def _handle(self, topic: str, payload: bytes) -> None:
        with self._stats_lock:
            self._stats.received += 1
        try:
            sample = parse_payload(topic, payload, self._store.device_owner)
        except UnknownDeviceError as exc:
            with self._stats_lock:
                self._stats.unknown_device += 1
            log.warning("unknown device: %s", exc)
            return
        except (MalformedTopicError, MalformedBodyError) as exc:
            with self._stats_lock:
                self._stats.malformed += 1
            log.warning("malformed message on %s: %s", topic, exc)
            return

        verdict = validate_sample(
            sample, now=self._clock(), future_skew_ms=self._config.future_skew_ms
        )
        if verdict.status is ValidationStatus.REJECTED:
            with self._stats_lock:
                self._stats.rejected += 1
            log.warning("rejected sample from %s: %s", topic, verdict.reason)
            return

        report = self._store.append_samples([sample])
        with self._stats_lock:
            self._stats.stored += report.stored
            self._stats.duplicates += report.duplicates
            self._stats.flagged += report.flagged
        if report.stored and self._on_sample is not None:
            stored = StoredSample(
                patient_id=sample.patient_id,
                kind=sample.kind,
                ts_ms=sample.ts_ms,
                value=sample.value,
                source=sample.source,
                seq=sample.seq,
                flagged=verdict.status is ValidationStatus.FLAGGED_OUT_OF_RANGE,
            )
            self._on_sample(stored)


def alert_hook(store: Store) -> Callable[[StoredSample], None]:
    """Analytics notification that evaluates threshold rules and files alerts."""
    from .analytics import AlertRule, evaluate_alerts

    def on_sample(sample: StoredSample) -> None:
        rules = [
            AlertRule(
                rule_id=r["rule_id"],
                patient_id=r["patient_id"],
                kind=r["kind"],
                low=r["low"],
                high=r["high"],
                enabled=r["enabled"],
            )
            for r in store.rules_for(sample.patient_id, sample.kind)
        ]
        for alert in evaluate_alerts(sample, rules):
            store.record_alert(
                alert_id=alert.alert_id,
                rule_id=alert.rule_id,
                sample=sample,
                severity=alert.severity,
                created_ms=alert.created_ms,
            )

    return on_sample
