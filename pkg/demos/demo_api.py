"""Walks the ten platform tasks end to end over real HTTP.

Boots the API on a local port, seeds telemetry through the ingest path,
then exercises: registration, logout, monthly sleep view, weekly
pressure + note on the highest value, daily graph after a measurement,
doctor add/remove, device rename/add, and a health-profile edit.

Run:  python demos/demo_api.py
"""

import json
import socket
import tempfile
import threading
import time
from pathlib import Path

import requests
import uvicorn

from telemon.api import ApiConfig, create_app
from telemon.bus import InProcessBroker
from telemon.crypto import FieldCipher, generate_key
from telemon.ingest import IngestService, alert_hook
from telemon.model import ParameterKind, Source, VitalSample, now_ms
from telemon.store import Store

DAY_MS = 86_400_000
PASSWORD = "a-long-demo-password"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def seed_history(store: Store, patient_id: str) -> None:
    now = now_ms()
    samples = []
    # a month of nightly sleep stages
    for night in range(30):
        end = now - night * DAY_MS
        for offset, stage, minutes in ((7, "deep", 95.0), (5, "light", 210.0), (2, "rem", 85.0)):
            samples.append(VitalSample(
                patient_id=patient_id, kind=ParameterKind.SLEEP_STAGE_DURATION,
                ts_ms=end - offset * 3_600_000, value=minutes,
                source=Source.connector("acct-demo", stage),
            ))
    # a week of twice-daily pressure readings
    for half_day in range(14):
        samples.append(VitalSample(
            patient_id=patient_id, kind=ParameterKind.BLOOD_PRESSURE_SYSTOLIC,
            ts_ms=now - half_day * DAY_MS // 2, value=112.0 + (half_day * 7) % 31,
            source=Source.manual(),
        ))
    store.append_samples(samples)


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="telemon-demo-"))
    store = Store(workdir / "api.db", FieldCipher.from_config(generate_key()))
    app = create_app(store, ApiConfig())
    port = free_port()
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning"))
    threading.Thread(target=server.run, daemon=True).start()

    base = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            requests.get(f"{base}/api/doctors", timeout=1)
            break
        except requests.RequestException:
            time.sleep(0.05)

    print("== task 1: register in the platform ==")
    requests.post(f"{base}/api/doctors", json={
        "name": "Dr. Bianchi", "email": "bianchi@clinic.example", "specialization": "cardiology",
        "password": PASSWORD,
    })
    doctor_id = requests.get(f"{base}/api/doctors").json()[0]["doctor_id"]
    patient_id = requests.post(f"{base}/api/patients", json={
        "name": "Mario Rossi", "ssn": "RSSMRA85M01H501Z", "email": "mario@example.org",
        "password": PASSWORD, "device_ids": ["brc-001"], "doctor_id": doctor_id,
    }).json()["patient_id"]
    print(f"  patient {patient_id} registered with device brc-001 and doctor {doctor_id}")

    token = requests.post(f"{base}/api/session", json={
        "email": "mario@example.org", "password": PASSWORD,
    }).json()["token"]
    headers = {"Authorization": f"Bearer {token}"}

    print("== task 2: disconnect from the portal (and sign back in) ==")
    requests.delete(f"{base}/api/session", headers=headers)
    rejected = requests.get(f"{base}/api/patients/{patient_id}/devices", headers=headers)
    print(f"  after logout the old token is refused: HTTP {rejected.status_code}")
    token = requests.post(f"{base}/api/session", json={
        "email": "mario@example.org", "password": PASSWORD,
    }).json()["token"]
    headers = {"Authorization": f"Bearer {token}"}

    seed_history(store, patient_id)
    now = now_ms()

    print("== task 3: sleep values for the last month ==")
    dashboard = requests.get(
        f"{base}/api/patients/{patient_id}/dashboard",
        params={"from_ms": now - 30 * DAY_MS, "to_ms": now, "granularity": "day"},
        headers=headers,
    ).json()
    sleep_card = next(c for c in dashboard["cards"] if c["kind"] == "sleep_stage_duration")
    print(f"  sleep card shows {len(sleep_card['series'])} daily buckets ({sleep_card['unit']})")

    print("== task 4: last week's pressure, note on the highest value ==")
    week = requests.get(
        f"{base}/api/patients/{patient_id}/dashboard",
        params={"from_ms": now - 7 * DAY_MS, "to_ms": now, "granularity": "day"},
        headers=headers,
    ).json()
    pressure_card = next(c for c in week["cards"] if c["kind"] == "blood_pressure_systolic")
    peak = max(
        store.query_window(patient_id, ParameterKind.BLOOD_PRESSURE_SYSTOLIC, now - 7 * DAY_MS, now),
        key=lambda s: s.value,
    )
    note = requests.post(f"{base}/api/patients/{patient_id}/notes", json={
        "kind": "blood_pressure_systolic", "ts_ms": peak.ts_ms,
        "text": f"peak of the week: {peak.value}",
    }, headers=headers).json()
    print(f"  noted {note['note_id']} on the {peak.value} reading")

    print("== task 5: measure pressure via the sensor path, view the daily graph ==")
    broker = InProcessBroker()
    ingest = IngestService(broker, store, on_sample=alert_hook(store)).start()
    # pressure has no bracelet sensor; the fresh measurement arrives as a manual sample
    store.append_samples([VitalSample(
        patient_id=patient_id, kind=ParameterKind.BLOOD_PRESSURE_SYSTOLIC,
        ts_ms=now - 1000, value=127.0, source=Source.manual(),
    )])
    broker.connect("cuff").publish(
        "vitals/brc-001/heart_rate",
        json.dumps({"ts": now - 1000, "value": 78, "unit": "bpm", "seq": 0}).encode(),
    )
    daily = requests.get(
        f"{base}/api/patients/{patient_id}/dashboard",
        params={"from_ms": now - DAY_MS, "to_ms": now, "granularity": "hour"},
        headers=headers,
    ).json()
    print(f"  daily graph now has cards: {[c['kind'] for c in daily['cards']]}")
    ingest.stop()

    print("== tasks 6-7: add a second doctor, then remove one ==")
    requests.post(f"{base}/api/doctors", json={
        "name": "Dr. Verdi", "email": "verdi@clinic.example", "specialization": "geriatrics",
        "password": PASSWORD,
    })
    second = next(d for d in requests.get(f"{base}/api/doctors").json() if d["doctor_id"] != doctor_id)
    added = requests.post(f"{base}/api/patients/{patient_id}/doctors",
                          json={"doctor_id": second["doctor_id"]}, headers=headers).json()
    print(f"  doctors now: {[d['name'] for d in added]}")
    remaining = requests.delete(
        f"{base}/api/patients/{patient_id}/doctors/{doctor_id}", headers=headers
    ).json()
    print(f"  after removal: {[d['name'] for d in remaining]}")

    print("== tasks 8-9: rename the device, add a new one ==")
    renamed = requests.patch(f"{base}/api/patients/{patient_id}/devices/brc-001",
                             json={"label": "wrist band (left)"}, headers=headers).json()
    listing = requests.post(f"{base}/api/patients/{patient_id}/devices",
                            json={"device_id": "brc-002", "label": "chest strap"},
                            headers=headers).json()
    print(f"  devices: {[(d['device_id'], d['label']) for d in listing]}")

    print("== task 10: edit a health-profile field ==")
    profile = requests.patch(f"{base}/api/patients/{patient_id}/profile",
                             json={"height_cm": 178}, headers=headers).json()
    print(f"  profile now {profile['profile']}")

    server.should_exit = True
    store.close()
    print("all ten tasks completed")


if __name__ == "__main__":
    main()
