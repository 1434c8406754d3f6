"""Device-to-dashboard pipeline walkthrough.

A simulated smart bracelet publishes heart rate, skin conductance,
temperature, and movement on vitals/<device>/<sensor>; the ingest loop
validates, stores, and counts everything; storage dedupes replays.

Run:  python demos/demo_pipeline.py
"""

import tempfile
from pathlib import Path

from telemon.bus import InProcessBroker
from telemon.crypto import FieldCipher, generate_key
from telemon.ingest import IngestService, alert_hook
from telemon.model import ParameterKind, now_ms
from telemon.simulator import ScenarioEvent, SimProfile, run_sim
from telemon.store import Store


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="telemon-demo-"))
    store = Store(workdir / "pipeline.db", FieldCipher.from_config(generate_key()))
    broker = InProcessBroker()

    print("== registering the bracelet and an alert rule ==")
    store.add_device("brc-001", "pat-1", "Mario's bracelet", now_ms())
    store.upsert_alert_rule("hr-rule", "pat-1", ParameterKind.HEART_RATE, 50, 120)

    service = IngestService(broker, store, on_sample=alert_hook(store)).start()

    print("== 60 seconds of telemetry, with a heart-rate spike at t=20s ==")
    profile = SimProfile(
        device_id="brc-001",
        seed=11,
        scenario=(ScenarioEvent(at_offset_s=20, sensor="heart_rate",
                                override_value=155.0, duration_s=10),),
    )
    start = now_ms() - 60_000  # timestamps in the immediate past
    report = run_sim(profile, broker.connect("sim"), duration_s=60, start_ms=start)
    print(f"simulator published {report.total} messages: {report.published}")
    print(f"ingest counters:    {service.stats()}")

    print("== replaying the same traffic: storage dedupes it all ==")
    run_sim(profile, broker.connect("sim"), duration_s=60, start_ms=start)
    stats = service.stats()
    print(f"after replay: stored={stats['stored']} duplicates={stats['duplicates']}")

    window = store.query_window("pat-1", ParameterKind.HEART_RATE, start, start + 60_000)
    print(f"heart-rate series has {len(window)} samples, "
          f"min {min(s.value for s in window)}, max {max(s.value for s in window)}")

    alerts = store.alerts_for("pat-1")
    print(f"the spike fired {len(alerts)} alerts "
          f"({sum(1 for a in alerts if a['severity'] == 'alarm')} alarms)")

    service.stop()
    store.close()


if __name__ == "__main__":
    main()
