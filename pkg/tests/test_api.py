import json

import pytest
from fastapi.testclient import TestClient

from telemon import analytics
from telemon.api import ENDPOINT_MATRIX, ApiConfig, create_app
from telemon.bus import InProcessBroker
from telemon.ingest import IngestService, alert_hook
from telemon.model import ParameterKind, Source
from telemon.store import Note

from .conftest import NOW_MS, FakeClock, make_sample

SSN = "RSSMRA85M01H501Z"
PASSWORD = "long-enough-pass"
DAY_MS = 86_400_000
TTL_MS = 30 * 60 * 1000


@pytest.fixture
def env(store):
    clock = FakeClock(NOW_MS)
    app = create_app(store, ApiConfig(clock=clock))
    client = TestClient(app)
    return client, store, clock


def register_doctor(client, email="doc@example.org", name="Dr. Greene", specialization="cardiology"):
    response = client.post(
        "/api/doctors",
        json={"name": name, "email": email, "specialization": specialization, "password": PASSWORD},
    )
    assert response.status_code == 201, response.text
    return response.json()["doctor_id"]


def register_patient(client, doctor_id, email="mario@example.org", devices=("brc-001",)):
    response = client.post(
        "/api/patients",
        json={
            "name": "Mario Rossi",
            "ssn": SSN,
            "email": email,
            "password": PASSWORD,
            "device_ids": list(devices),
            "doctor_id": doctor_id,
        },
    )
    assert response.status_code == 201, response.text
    return response.json()["patient_id"]


def login(client, email):
    response = client.post("/api/session", json={"email": email, "password": PASSWORD})
    assert response.status_code == 201, response.text
    return response.json()["token"]


def auth(token):
    return {"Authorization": f"Bearer {token}"}


@pytest.fixture
def seeded(env):
    """Doctor + patient with a device, both logged in."""
    client, store, clock = env
    doctor_id = register_doctor(client)
    patient_id = register_patient(client, doctor_id)
    patient_token = login(client, "mario@example.org")
    doctor_token = login(client, "doc@example.org")
    return client, store, clock, {
        "doctor_id": doctor_id,
        "patient_id": patient_id,
        "patient_token": patient_token,
        "doctor_token": doctor_token,
    }


# -- registration ----------------------------------------------------------------


def test_patient_registration_binds_devices_for_ingest(env):
    client, store, clock = env
    doctor_id = register_doctor(client)

    broker = InProcessBroker()
    service = IngestService(broker, store, clock=lambda: NOW_MS + 10**9).start()
    publisher = broker.connect("sim")
    payload = json.dumps({"ts": NOW_MS, "value": 72, "unit": "bpm", "seq": 0}).encode()

    publisher.publish("vitals/brc-001/heart_rate", payload)
    assert service.stats()["unknown_device"] == 1

    register_patient(client, doctor_id, devices=("brc-001",))
    publisher.publish("vitals/brc-001/heart_rate", payload)
    stats = service.stats()
    assert stats["unknown_device"] == 1
    assert stats["stored"] == 1
    service.stop()


def test_duplicate_email_rejected(env):
    client, _, _ = env
    doctor_id = register_doctor(client)
    register_patient(client, doctor_id)
    response = client.post(
        "/api/patients",
        json={
            "name": "Other",
            "ssn": SSN,
            "email": "mario@example.org",
            "password": PASSWORD,
            "device_ids": [],
            "doctor_id": doctor_id,
        },
    )
    assert response.status_code == 409
    assert response.json()["code"] == "duplicate_email"


def test_weak_password_rejected(env):
    client, _, _ = env
    doctor_id = register_doctor(client)
    response = client.post(
        "/api/patients",
        json={
            "name": "X",
            "ssn": SSN,
            "email": "x@example.org",
            "password": "abc",
            "device_ids": [],
            "doctor_id": doctor_id,
        },
    )
    assert response.status_code == 422
    assert response.json()["code"] == "weak_password"


def test_invalid_ssn_format_rejected(env):
    client, _, _ = env
    doctor_id = register_doctor(client)
    response = client.post(
        "/api/patients",
        json={
            "name": "X",
            "ssn": "12345",
            "email": "x@example.org",
            "password": PASSWORD,
            "device_ids": [],
            "doctor_id": doctor_id,
        },
    )
    assert response.json()["code"] == "invalid_ssn_format"


def test_unknown_doctor_rejected_and_leaves_no_partial_state(env):
    client, store, _ = env
    response = client.post(
        "/api/patients",
        json={
            "name": "X",
            "ssn": SSN,
            "email": "x@example.org",
            "password": PASSWORD,
            "device_ids": ["brc-009"],
            "doctor_id": "doc-nope",
        },
    )
    assert response.json()["code"] == "unknown_doctor"
    assert store.device_owner("brc-009") is None
    assert store.find_account_by_email("x@example.org") is None


def test_ssn_stored_encrypted(seeded):
    _, store, _, ids = seeded
    assert SSN.encode() not in store.raw_image()
    assert store.get_patient_ssn(ids["patient_id"]) == SSN


def test_registered_doctor_is_selectable(env):
    client, _, _ = env
    doctor_id = register_doctor(client, email="dd@example.org", specialization="geriatrics")
    listing = client.get("/api/doctors").json()
    assert {"doctor_id": doctor_id, "name": "Dr. Greene", "specialization": "geriatrics"} in listing


def test_doctor_empty_specialization_rejected(env):
    client, _, _ = env
    response = client.post(
        "/api/doctors",
        json={"name": "D", "email": "d@e.org", "specialization": "  ", "password": PASSWORD},
    )
    assert response.status_code == 422


def test_doctor_duplicate_email_rejected(env):
    client, _, _ = env
    register_doctor(client, email="same@example.org")
    response = client.post(
        "/api/doctors",
        json={"name": "D", "email": "same@example.org", "specialization": "x", "password": PASSWORD},
    )
    assert response.json()["code"] == "duplicate_email"


# -- sessions -----------------------------------------------------------------------


def test_login_token_accepted_by_protected_endpoint(seeded):
    client, _, _, ids = seeded
    response = client.get(
        f"/api/patients/{ids['patient_id']}/devices", headers=auth(ids["patient_token"])
    )
    assert response.status_code == 200


def test_logout_then_reuse_token_fails(seeded):
    client, _, _, ids = seeded
    assert client.delete("/api/session", headers=auth(ids["patient_token"])).status_code == 204
    response = client.get(
        f"/api/patients/{ids['patient_id']}/devices", headers=auth(ids["patient_token"])
    )
    assert response.status_code == 401


def test_bad_credentials_uniform_message(seeded):
    client, _, _, _ = seeded
    wrong_password = client.post(
        "/api/session", json={"email": "mario@example.org", "password": "wrong-password"}
    )
    wrong_email = client.post(
        "/api/session", json={"email": "nobody@example.org", "password": PASSWORD}
    )
    assert wrong_password.status_code == wrong_email.status_code == 401
    assert wrong_password.json() == wrong_email.json()


def test_ten_consecutive_failures_lock_account(seeded):
    client, _, _, _ = seeded
    for _ in range(9):
        response = client.post(
            "/api/session", json={"email": "mario@example.org", "password": "wrong-password"}
        )
        assert response.json()["code"] == "bad_credentials"
    tenth = client.post(
        "/api/session", json={"email": "mario@example.org", "password": "wrong-password"}
    )
    assert tenth.json()["code"] == "account_locked"
    # even the right password is refused once locked
    locked = client.post(
        "/api/session", json={"email": "mario@example.org", "password": PASSWORD}
    )
    assert locked.json()["code"] == "account_locked"


def test_failure_counter_resets_on_success(seeded):
    client, _, _, _ = seeded
    for _ in range(5):
        client.post("/api/session", json={"email": "mario@example.org", "password": "nope-nope"})
    login(client, "mario@example.org")
    for _ in range(9):
        response = client.post(
            "/api/session", json={"email": "mario@example.org", "password": "nope-nope"}
        )
    assert response.json()["code"] == "bad_credentials"


def test_session_expires_after_idle_ttl(seeded):
    client, _, clock, ids = seeded
    clock.advance_ms(TTL_MS + 1)
    response = client.get(
        f"/api/patients/{ids['patient_id']}/devices", headers=auth(ids["patient_token"])
    )
    assert response.status_code == 401


def test_activity_extends_idle_session(seeded):
    client, _, clock, ids = seeded
    url = f"/api/patients/{ids['patient_id']}/devices"
    for _ in range(3):
        clock.advance_ms(TTL_MS - 1000)
        assert client.get(url, headers=auth(ids["patient_token"])).status_code == 200
    clock.advance_ms(TTL_MS + 1)
    assert client.get(url, headers=auth(ids["patient_token"])).status_code == 401


# -- associations ----------------------------------------------------------------------


def test_add_then_list_doctor(seeded):
    client, _, _, ids = seeded
    second = register_doctor(client, email="second@example.org", name="Dr. Two")
    listing = client.post(
        f"/api/patients/{ids['patient_id']}/doctors",
        json={"doctor_id": second},
        headers=auth(ids["patient_token"]),
    ).json()
    assert {d["doctor_id"] for d in listing} == {ids["doctor_id"], second}


def test_removed_doctor_loses_access_immediately(seeded):
    client, store, _, ids = seeded
    store.append_samples([make_sample(patient_id=ids["patient_id"], ts_ms=NOW_MS - 1000)])
    dashboard = f"/api/patients/{ids['patient_id']}/dashboard?from_ms={NOW_MS - DAY_MS}&to_ms={NOW_MS}"
    assert client.get(dashboard, headers=auth(ids["doctor_token"])).status_code == 200
    client.delete(
        f"/api/patients/{ids['patient_id']}/doctors/{ids['doctor_id']}",
        headers=auth(ids["patient_token"]),
    )
    assert client.get(dashboard, headers=auth(ids["doctor_token"])).status_code == 403


def test_remove_never_assigned_doctor(seeded):
    client, _, _, ids = seeded
    lone = register_doctor(client, email="lone@example.org")
    response = client.delete(
        f"/api/patients/{ids['patient_id']}/doctors/{lone}",
        headers=auth(ids["patient_token"]),
    )
    assert response.status_code == 422
    assert response.json()["code"] == "not_associated"


def test_unknown_doctor_association_rejected(seeded):
    client, _, _, ids = seeded
    response = client.post(
        f"/api/patients/{ids['patient_id']}/doctors",
        json={"doctor_id": "doc-missing"},
        headers=auth(ids["patient_token"]),
    )
    assert response.json()["code"] == "unknown_doctor"


# -- devices ------------------------------------------------------------------------------


def test_device_add_then_publish_stores_samples(seeded):
    client, store, _, ids = seeded
    broker = InProcessBroker()
    service = IngestService(broker, store, clock=lambda: NOW_MS + 10**9).start()
    client.post(
        f"/api/patients/{ids['patient_id']}/devices",
        json={"device_id": "brc-002"},
        headers=auth(ids["patient_token"]),
    )
    publisher = broker.connect("sim")
    publisher.publish(
        "vitals/brc-002/heart_rate",
        json.dumps({"ts": NOW_MS, "value": 70, "unit": "bpm", "seq": 0}).encode(),
    )
    assert service.stats()["stored"] == 1

    client.delete(
        f"/api/patients/{ids['patient_id']}/devices/brc-002",
        headers=auth(ids["patient_token"]),
    )
    publisher.publish(
        "vitals/brc-002/heart_rate",
        json.dumps({"ts": NOW_MS + 1000, "value": 70, "unit": "bpm", "seq": 1}).encode(),
    )
    stats = service.stats()
    assert stats["unknown_device"] == 1
    assert stats["stored"] == 1
    service.stop()


def test_rename_changes_label_only(seeded):
    client, store, _, ids = seeded
    sample = make_sample(patient_id=ids["patient_id"], ts_ms=NOW_MS - 1000)
    store.append_samples([sample])
    listing = client.patch(
        f"/api/patients/{ids['patient_id']}/devices/brc-001",
        json={"label": "wrist band"},
        headers=auth(ids["patient_token"]),
    ).json()
    assert listing == [{"device_id": "brc-001", "label": "wrist band"}]
    unchanged = store.query_window(ids["patient_id"], ParameterKind.HEART_RATE, 0, 2**62)
    assert len(unchanged) == 1


def test_duplicate_device_rejected_across_patients(seeded):
    client, _, _, ids = seeded
    second_patient = register_patient(
        client, ids["doctor_id"], email="second@example.org", devices=()
    )
    token = login(client, "second@example.org")
    response = client.post(
        f"/api/patients/{second_patient}/devices",
        json={"device_id": "brc-001"},
        headers=auth(token),
    )
    assert response.status_code == 409
    assert response.json()["code"] == "duplicate_device"


def test_rename_foreign_device_forbidden(seeded):
    client, _, _, ids = seeded
    second_patient = register_patient(
        client, ids["doctor_id"], email="second@example.org", devices=("brc-edge",)
    )
    token = login(client, "second@example.org")
    response = client.patch(
        f"/api/patients/{second_patient}/devices/brc-001",
        json={"label": "mine now"},
        headers=auth(token),
    )
    assert response.status_code == 403
    assert response.json()["code"] == "not_owner"


# -- dashboard -------------------------------------------------------------------------


def seed_series(store, patient_id, count=48, kind=ParameterKind.HEART_RATE, base=70.0):
    start = NOW_MS - 2 * DAY_MS
    samples = [
        make_sample(
            patient_id=patient_id,
            kind=kind,
            ts_ms=start + i * 3_600_000,
            value=base + (i % 7),
            source=Source.custom_device("brc-001"),
            seq=i,
        )
        for i in range(count)
    ]
    store.append_samples(samples)
    return samples


def test_dashboard_one_card_per_kind_with_data(seeded):
    client, store, _, ids = seeded
    seed_series(store, ids["patient_id"])
    payload = client.get(
        f"/api/patients/{ids['patient_id']}/dashboard",
        params={"from_ms": NOW_MS - 3 * DAY_MS, "to_ms": NOW_MS, "granularity": "day"},
        headers=auth(ids["patient_token"]),
    ).json()
    assert [c["kind"] for c in payload["cards"]] == ["heart_rate"]
    card = payload["cards"][0]
    assert card["unit"] == "bpm"
    assert card["latest"]["value"] == pytest.approx(70 + 47 % 7)
    assert payload["stress"] is None  # no gsr data


def test_dashboard_cards_follow_catalog_order(seeded):
    client, store, _, ids = seeded
    seed_series(store, ids["patient_id"], kind=ParameterKind.GSR, base=2.0)
    seed_series(store, ids["patient_id"], kind=ParameterKind.HEART_RATE)
    seed_series(store, ids["patient_id"], kind=ParameterKind.BODY_TEMPERATURE, base=36.5)
    payload = client.get(
        f"/api/patients/{ids['patient_id']}/dashboard",
        params={"from_ms": NOW_MS - 3 * DAY_MS, "to_ms": NOW_MS},
        headers=auth(ids["patient_token"]),
    ).json()
    assert [c["kind"] for c in payload["cards"]] == ["heart_rate", "body_temperature", "gsr"]
    assert payload["stress"] is not None
    assert all(0 <= p["value"] <= 100 for p in payload["stress"]["series"])


def test_dashboard_series_equals_direct_aggregation(seeded):
    client, store, _, ids = seeded
    seed_series(store, ids["patient_id"])
    start, end = NOW_MS - 3 * DAY_MS, NOW_MS
    payload = client.get(
        f"/api/patients/{ids['patient_id']}/dashboard",
        params={"from_ms": start, "to_ms": end, "granularity": "hour"},
        headers=auth(ids["patient_token"]),
    ).json()
    samples = store.query_window(ids["patient_id"], ParameterKind.HEART_RATE, start, end)
    direct = analytics.aggregate(
        samples, start, end, analytics.Granularity.HOUR, analytics.Statistic.MEAN
    )
    assert payload["cards"][0]["series"] == [
        {"bucket_start_ms": b.bucket_start_ms, "value": b.value, "count": b.sample_count}
        for b in direct
    ]


def test_dashboard_extremes_match_direct_find_extremum(seeded):
    client, store, _, ids = seeded
    seed_series(store, ids["patient_id"])
    start, end = NOW_MS - 3 * DAY_MS, NOW_MS
    payload = client.get(
        f"/api/patients/{ids['patient_id']}/dashboard",
        params={"from_ms": start, "to_ms": end},
        headers=auth(ids["patient_token"]),
    ).json()
    window = store.query_window(ids["patient_id"], ParameterKind.HEART_RATE, start, end)
    highest = analytics.find_extremum(window, "max")
    card = payload["cards"][0]
    assert card["max"] == {"value": highest.value, "ts_ms": highest.ts_ms}
    assert card["min"]["value"] == analytics.find_extremum(window, "min").value


def test_dashboard_rule_bands_expose_enabled_rules(seeded):
    client, store, _, ids = seeded
    store.upsert_alert_rule("r-on", ids["patient_id"], ParameterKind.HEART_RATE, 50, 120)
    store.upsert_alert_rule("r-off", ids["patient_id"], ParameterKind.HEART_RATE, 40, 180, enabled=False)
    seed_series(store, ids["patient_id"])
    payload = client.get(
        f"/api/patients/{ids['patient_id']}/dashboard",
        params={"from_ms": NOW_MS - 3 * DAY_MS, "to_ms": NOW_MS},
        headers=auth(ids["patient_token"]),
    ).json()
    assert payload["cards"][0]["rule_bands"] == [{"low": 50.0, "high": 120.0}]


def test_dashboard_includes_flags_alerts_notes(seeded):
    client, store, _, ids = seeded
    patient = ids["patient_id"]
    store.upsert_alert_rule("rule-1", patient, ParameterKind.HEART_RATE, 50, 120)
    samples = seed_series(store, patient)
    spike = make_sample(
        patient_id=patient, ts_ms=NOW_MS - 1000, value=300.0,
        source=Source.custom_device("brc-001"), seq=999,
    )
    store.append_samples([spike])
    hook = alert_hook(store)
    hook(store.query_window(patient, ParameterKind.HEART_RATE, NOW_MS - 1000, NOW_MS)[0])
    store.upsert_note(
        Note("note-1", patient, "patient", ParameterKind.HEART_RATE, samples[0].ts_ms, "felt dizzy", NOW_MS)
    )
    payload = client.get(
        f"/api/patients/{patient}/dashboard",
        params={"from_ms": NOW_MS - 3 * DAY_MS, "to_ms": NOW_MS},
        headers=auth(ids["patient_token"]),
    ).json()
    card = payload["cards"][0]
    assert card["outliers"] == [{"ts_ms": NOW_MS - 1000, "value": 300.0}]
    assert card["alerts"][0]["severity"] == "alarm"
    assert card["notes"][0]["text"] == "felt dizzy"


def test_dashboard_unknown_patient(seeded):
    client, _, _, ids = seeded
    response = client.get(
        "/api/patients/pat-void/dashboard",
        params={"from_ms": 0, "to_ms": 10},
        headers=auth(ids["doctor_token"]),
    )
    # the doctor is not associated with a nonexistent patient either
    assert response.status_code in (403, 404)


# -- notes -------------------------------------------------------------------------------


def test_note_on_highest_value_flow(seeded):
    client, store, _, ids = seeded
    samples = seed_series(store, ids["patient_id"], kind=ParameterKind.BLOOD_PRESSURE_SYSTOLIC, base=120)
    window = store.query_window(
        ids["patient_id"], ParameterKind.BLOOD_PRESSURE_SYSTOLIC, NOW_MS - 7 * DAY_MS, NOW_MS
    )
    highest = analytics.find_extremum(window, "max")
    response = client.post(
        f"/api/patients/{ids['patient_id']}/notes",
        json={"kind": "blood_pressure_systolic", "ts_ms": highest.ts_ms, "text": "peak this week"},
        headers=auth(ids["doctor_token"]),
    )
    assert response.status_code == 201
    notes = store.notes_for(ids["patient_id"])
    assert notes[0].author == f"doctor:{ids['doctor_id']}"
    assert notes[0].ts_ms == highest.ts_ms


def test_note_on_missing_sample_404(seeded):
    client, _, _, ids = seeded
    response = client.post(
        f"/api/patients/{ids['patient_id']}/notes",
        json={"kind": "heart_rate", "ts_ms": 1, "text": "x"},
        headers=auth(ids["patient_token"]),
    )
    assert response.status_code == 404
    assert response.json()["code"] == "target_not_found"


# -- profile -------------------------------------------------------------------------------


def test_profile_field_readable_back_with_audit_stamp(seeded):
    client, _, clock, ids = seeded
    response = client.patch(
        f"/api/patients/{ids['patient_id']}/profile",
        json={"height_cm": 178},
        headers=auth(ids["patient_token"]),
    )
    assert response.json()["profile"]["height_cm"] == 178
    assert response.json()["profile_updated_ms"] == clock()
    fetched = client.get(
        f"/api/patients/{ids['patient_id']}/profile", headers=auth(ids["patient_token"])
    ).json()
    assert fetched["profile"]["height_cm"] == 178


def test_profile_negative_height_rejected(seeded):
    client, _, _, ids = seeded
    response = client.patch(
        f"/api/patients/{ids['patient_id']}/profile",
        json={"height_cm": -5},
        headers=auth(ids["patient_token"]),
    )
    assert response.status_code == 422
    assert response.json()["code"] == "invalid_field_value"


def test_profile_edit_is_patient_only(seeded):
    client, _, _, ids = seeded
    response = client.patch(
        f"/api/patients/{ids['patient_id']}/profile",
        json={"height_cm": 178},
        headers=auth(ids["doctor_token"]),
    )
    assert response.status_code == 403


# -- alerts ---------------------------------------------------------------------------------


def test_alert_ack_flow(seeded):
    client, store, _, ids = seeded
    patient = ids["patient_id"]
    store.upsert_alert_rule("rule-1", patient, ParameterKind.HEART_RATE, 50, 120)
    spike = make_sample(patient_id=patient, ts_ms=NOW_MS - 500, value=150.0)
    store.append_samples([spike])
    alert_hook(store)(store.query_window(patient, ParameterKind.HEART_RATE, NOW_MS - 500, NOW_MS)[0])
    (alert,) = store.alerts_for(patient, unacknowledged_only=True)
    response = client.post(
        f"/api/alerts/{alert['alert_id']}/ack", headers=auth(ids["doctor_token"])
    )
    assert response.json()["acknowledged"] is True
    assert store.alerts_for(patient, unacknowledged_only=True) == []


# -- authorization matrix ----------------------------------------------------------------------


def fill_path(template, ids):
    return (
        template.replace("{patient_id}", ids["patient_id"])
        .replace("{doctor_id}", ids["doctor_id"])
        .replace("{device_id}", "brc-001")
        .replace("{alert_id}", ids.get("alert_id", "alert-x"))
    )


BODIES = {
    ("POST", "/api/patients/{patient_id}/notes"): {"kind": "heart_rate", "ts_ms": 1, "text": "x"},
    ("POST", "/api/patients/{patient_id}/doctors"): {"doctor_id": "doc-x"},
    ("POST", "/api/patients/{patient_id}/devices"): {"device_id": "brc-zz"},
    ("PATCH", "/api/patients/{patient_id}/devices/{device_id}"): {"label": "x"},
    ("PATCH", "/api/patients/{patient_id}/profile"): {"height_cm": 170},
}

QUERIES = {
    ("GET", "/api/patients/{patient_id}/dashboard"): {"from_ms": 0, "to_ms": 10},
}


def call(client, method, template, ids, token=None):
    url = fill_path(template, ids)
    headers = auth(token) if token else {}
    kwargs = {"headers": headers}
    if (method, template) in BODIES:
        kwargs["json"] = BODIES[(method, template)]
    if (method, template) in QUERIES:
        kwargs["params"] = QUERIES[(method, template)]
    return client.request(method, url, **kwargs)


def test_anonymous_calls_rejected_everywhere(seeded):
    client, _, _, ids = seeded
    for method, template, _access in ENDPOINT_MATRIX:
        response = call(client, method, template, ids, token=None)
        assert response.status_code == 401, (method, template, response.text)


def test_logged_out_token_rejected_everywhere(seeded):
    client, _, _, ids = seeded
    stale = login(client, "mario@example.org")
    client.delete("/api/session", headers=auth(stale))
    for method, template, _access in ENDPOINT_MATRIX:
        response = call(client, method, template, ids, token=stale)
        assert response.status_code == 401, (method, template, response.text)


def test_other_patient_blocked_everywhere(seeded):
    client, _, _, ids = seeded
    register_patient(client, ids["doctor_id"], email="intruder@example.org", devices=())
    intruder = login(client, "intruder@example.org")
    for method, template, access in ENDPOINT_MATRIX:
        if access == "any" or "{patient_id}" not in template:
            continue
        response = call(client, method, template, ids, token=intruder)
        assert response.status_code == 403, (method, template, response.text)


def test_non_associated_doctor_blocked_everywhere(seeded):
    client, store, _, ids = seeded
    stranger = register_doctor(client, email="stranger@example.org")
    stranger_token = login(client, "stranger@example.org")
    # alert for the alert-ack endpoint
    store.upsert_alert_rule("rule-1", ids["patient_id"], ParameterKind.HEART_RATE, 50, 120)
    store.append_samples([make_sample(patient_id=ids["patient_id"], ts_ms=NOW_MS - 500, value=150.0)])
    alert_hook(store)(
        store.query_window(ids["patient_id"], ParameterKind.HEART_RATE, NOW_MS - 500, NOW_MS)[0]
    )
    ids = dict(ids, alert_id=store.alerts_for(ids["patient_id"])[0]["alert_id"])
    for method, template, access in ENDPOINT_MATRIX:
        if access == "any":
            continue
        response = call(client, method, template, ids, token=stranger_token)
        assert response.status_code == 403, (method, template, response.text)


def test_associated_doctor_allowed_on_patient_data_only(seeded):
    client, store, _, ids = seeded
    store.append_samples([make_sample(patient_id=ids["patient_id"], ts_ms=NOW_MS - 1000)])
    for method, template, access in ENDPOINT_MATRIX:
        if access != "patient_only":
            continue
        response = call(client, method, template, ids, token=ids["doctor_token"])
        assert response.status_code == 403, (method, template, response.text)
    dashboard = call(
        client, "GET", "/api/patients/{patient_id}/dashboard", ids, token=ids["doctor_token"]
    )
    assert dashboard.status_code == 200
