import json
import time

import pytest

from telemon.bus import InProcessBroker
from telemon.errors import (
    MalformedBodyError,
    MalformedTopicError,
    UnitMismatchError,
    UnknownDeviceError,
)
from telemon.ingest import (
    DeviceTopic,
    IngestConfig,
    IngestService,
    alert_hook,
    parse_payload,
)
from telemon.model import ParameterKind, SourceChannel
from telemon.simulator import SimProfile, run_sim

from .conftest import NOW_MS


def registry(**devices):
    return lambda device_id: devices.get(device_id)


def body(ts=NOW_MS, value=72, unit="bpm", seq=9, **extra) -> bytes:
    doc = {"ts": ts, "value": value, "unit": unit, "seq": seq, **extra}
    return json.dumps(doc).encode()


def test_parse_valid_heart_rate_message():
    sample = parse_payload(
        "vitals/brc-001/heart_rate", body(), registry(**{"brc-001": "pat-1"})
    )
    assert sample.kind is ParameterKind.HEART_RATE
    assert sample.value == 72
    assert sample.patient_id == "pat-1"
    assert sample.source.channel is SourceChannel.CUSTOM_DEVICE
    assert sample.source.ref == "brc-001"
    assert sample.seq == 9


def test_sensor_kind_mapping():
    reg = registry(**{"brc-001": "pat-1"})
    cases = [
        ("heart_rate", "bpm", ParameterKind.HEART_RATE),
        ("gsr", "µS", ParameterKind.GSR),
        ("temperature", "°C", ParameterKind.BODY_TEMPERATURE),
        ("imu", "g", ParameterKind.ACTIVITY_MAGNITUDE),
    ]
    for sensor, unit, kind in cases:
        sample = parse_payload(f"vitals/brc-001/{sensor}", body(unit=unit), reg)
        assert sample.kind is kind


def test_unknown_sensor_is_malformed_topic():
    with pytest.raises(MalformedTopicError):
        parse_payload("vitals/brc-001/humidity", body(), registry())


@pytest.mark.parametrize(
    "topic",
    ["vitals/brc-001", "vitals/a/b/c/heart_rate", "other/brc-001/heart_rate", "vitals/x!/heart_rate", "vitals/ab/heart_rate"],
)
def test_malformed_topics(topic):
    with pytest.raises(MalformedTopicError):
        parse_payload(topic, body(), registry())


def test_non_numeric_value_is_malformed_body():
    with pytest.raises(MalformedBodyError):
        parse_payload(
            "vitals/brc-001/heart_rate", body(value="abc"), registry(**{"brc-001": "p"})
        )


@pytest.mark.parametrize(
    "payload",
    [
        b"not json",
        b"[1,2,3]",
        json.dumps({"value": 72, "unit": "bpm", "seq": 1}).encode(),  # no ts
        json.dumps({"ts": True, "value": 72, "unit": "bpm", "seq": 1}).encode(),
        json.dumps({"ts": NOW_MS, "value": 72, "unit": "bpm", "seq": -1}).encode(),
        json.dumps({"ts": NOW_MS, "value": 72, "unit": 7, "seq": 1}).encode(),
    ],
)
def test_malformed_bodies(payload):
    with pytest.raises(MalformedBodyError):
        parse_payload("vitals/brc-001/heart_rate", payload, registry(**{"brc-001": "p"}))


def test_extra_keys_ignored():
    sample = parse_payload(
        "vitals/brc-001/heart_rate",
        body(battery=0.93, firmware="1.2"),
        registry(**{"brc-001": "pat-1"}),
    )
    assert sample.value == 72


def test_unit_mismatch():
    with pytest.raises(UnitMismatchError):
        parse_payload(
            "vitals/brc-001/heart_rate", body(unit="Hz"), registry(**{"brc-001": "p"})
        )


def test_unregistered_device_rejected():
    with pytest.raises(UnknownDeviceError):
        parse_payload("vitals/brc-999/heart_rate", body(), registry())


def test_device_topic_roundtrip():
    topic = DeviceTopic.parse("vitals/brc-001/gsr")
    assert topic.render() == "vitals/brc-001/gsr"


# -- service loop -------------------------------------------------------------


@pytest.fixture
def pipeline(store):
    store.add_device("brc-001", "pat-1", "wrist", NOW_MS)
    broker = InProcessBroker()
    service = IngestService(
        broker,
        store,
        config=IngestConfig(backoff_base_s=0.001, backoff_cap_s=0.002),
        on_sample=alert_hook(store),
        clock=lambda: NOW_MS + 10**9,  # far after any simulated timestamp
        sleep=lambda s: time.sleep(min(s, 0.001)),
    ).start()
    yield broker, service, store
    service.stop()


def test_fresh_service_has_zero_counters(pipeline):
    _, service, _ = pipeline
    stats = service.stats()
    assert all(stats[k] == 0 for k in ("received", "stored", "duplicates", "malformed", "unknown_device", "rejected"))


def test_hundred_valid_messages_stored_and_notified(pipeline):
    broker, service, store = pipeline
    notifications = []
    service._on_sample = notifications.append
    profile = SimProfile(device_id="brc-001", seed=3)
    connection = broker.connect("sim")
    report = run_sim(profile, connection, duration_s=25, start_ms=NOW_MS)
    assert report.total == 100
    stats = service.stats()
    assert stats["received"] == 100
    assert stats["stored"] == 100
    assert stats["malformed"] == 0
    assert len(notifications) == 100


def test_duplicate_replay_counts_duplicates(pipeline):
    broker, service, _ = pipeline
    profile = SimProfile(device_id="brc-001", seed=3)
    connection = broker.connect("sim")
    run_sim(profile, connection, duration_s=25, start_ms=NOW_MS)
    run_sim(profile, connection, duration_s=25, start_ms=NOW_MS)  # same seed, same ts
    stats = service.stats()
    assert stats["received"] == 200
    assert stats["stored"] == 100
    assert stats["duplicates"] == 100


def test_malformed_message_counted_loop_survives(pipeline):
    broker, service, store = pipeline
    connection = broker.connect("pub")
    connection.publish("vitals/brc-001/heart_rate", body(seq=0))
    connection.publish("vitals/brc-001/heart_rate", b"{broken")
    stats = service.stats()
    assert stats["stored"] == 1
    assert stats["malformed"] == 1
    assert service.running
    # still ingesting afterwards
    connection.publish("vitals/brc-001/heart_rate", body(ts=NOW_MS + 1000, seq=1))
    assert service.stats()["stored"] == 2


def test_unknown_device_counted(pipeline):
    broker, service, _ = pipeline
    connection = broker.connect("pub")
    connection.publish("vitals/brc-404/heart_rate", body())
    stats = service.stats()
    assert stats["unknown_device"] == 1
    assert stats["stored"] == 0


def test_future_timestamp_counted_as_rejected(store):
    store.add_device("brc-001", "pat-1", "wrist", NOW_MS)
    broker = InProcessBroker()
    service = IngestService(broker, store, clock=lambda: NOW_MS).start()
    connection = broker.connect("pub")
    connection.publish("vitals/brc-001/heart_rate", body(ts=NOW_MS + 10 * 60 * 1000))
    assert service.stats()["rejected"] == 1
    service.stop()


def test_counter_conservation_under_mixed_traffic(pipeline):
    broker, service, _ = pipeline
    connection = broker.connect("pub")
    connection.publish("vitals/brc-001/heart_rate", body(seq=0))
    connection.publish("vitals/brc-001/heart_rate", body(seq=0))  # duplicate
    connection.publish("vitals/brc-001/humidity", body())  # malformed topic
    connection.publish("vitals/brc-404/heart_rate", body())  # unknown device
    connection.publish("vitals/brc-001/heart_rate", b"broken")  # malformed body
    stats = service.stats()
    assert stats["received"] == stats["stored"] + stats["duplicates"] + stats[
        "malformed"
    ] + stats["unknown_device"] + stats["rejected"]
    assert stats["received"] == 5


def test_broker_restart_resumes_without_operator_action(pipeline):
    broker, service, _ = pipeline
    connection = broker.connect("pub")
    connection.publish("vitals/brc-001/heart_rate", body(seq=0))
    broker.kill()
    broker.restart()
    deadline = time.time() + 5
    while service.stats()["reconnects"] == 0 and time.time() < deadline:
        time.sleep(0.005)
    assert service.stats()["reconnects"] == 1
    publisher = broker.connect("pub2")
    publisher.publish("vitals/brc-001/heart_rate", body(ts=NOW_MS + 1000, seq=1))
    assert service.stats()["stored"] == 2


def test_out_of_range_value_stored_and_flagged(pipeline):
    broker, service, store = pipeline
    connection = broker.connect("pub")
    connection.publish("vitals/brc-001/temperature", body(value=55.0, unit="°C"))
    stats = service.stats()
    assert stats["stored"] == 1
    assert stats["flagged"] == 1
    stored = store.query_window("pat-1", ParameterKind.BODY_TEMPERATURE, 0, 2**62)
    assert stored[0].flagged


def test_alert_hook_files_alert_for_rule_breach(pipeline):
    broker, _, store = pipeline
    store.upsert_alert_rule("rule-1", "pat-1", ParameterKind.HEART_RATE, 50, 120)
    connection = broker.connect("pub")
    connection.publish("vitals/brc-001/heart_rate", body(value=150))
    alerts = store.alerts_for("pat-1")
    assert len(alerts) == 1
    assert alerts[0]["severity"] == "alarm"
