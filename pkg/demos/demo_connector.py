"""Fitness-cloud sync walkthrough against the bundled fixture server.

Shows the whole token lifecycle (code exchange, near-expiry refresh,
revocation) and incremental, replay-safe data sync.

Run:  python demos/demo_connector.py
"""

import tempfile
from pathlib import Path

from telemon.connector import ConnectorConfig, FitClient, FitConnector
from telemon.crypto import FieldCipher, generate_key
from telemon.errors import RefreshRejectedError
from telemon.fitserver import FitFixtureServer, FixtureDataset
from telemon.model import ParameterKind, now_ms
from telemon.store import Store


def main() -> None:
    now = now_ms()
    dataset = FixtureDataset(
        auth_codes={"fix-code-1": "acct-1"},
        datapoints={
            "com.google.heart_rate.bpm": [
                {"start_ms": now - (10 - i) * 60_000, "end_ms": now - (10 - i) * 60_000,
                 "value": 68.0 + i} for i in range(10)
            ],
            "com.google.sleep.segment.deep": [
                {"start_ms": now - 8 * 3_600_000, "end_ms": now - 6 * 3_600_000, "value": 120.0}
            ],
        },
    )
    server = FitFixtureServer(dataset, token_ttl_s=3600).start()
    print(f"fixture server listening on {server.base_url}")

    workdir = Path(tempfile.mkdtemp(prefix="telemon-demo-"))
    store = Store(workdir / "connector.db", FieldCipher.from_config(generate_key()))

    class SkewableClock:
        offset_ms = 0

        def __call__(self) -> int:
            return now_ms() + self.offset_ms

    clock = SkewableClock()
    connector = FitConnector(
        store, store.cipher, FitClient(ConnectorConfig(base_url=server.base_url)),
        clock=clock,
    )

    print("== linking the hospital-provisioned account ==")
    record = connector.link_account("acct-1", "pat-1", "fix-code-1")
    print(f"linked; tokens stored encrypted, expiry in {(record.expiry_ms - now) // 1000}s")

    print("== first sync pulls everything after the cursor ==")
    report = connector.sync_account("acct-1")
    for kind, result in report.per_kind.items():
        if result.fetched:
            print(f"  {kind}: fetched={result.fetched} stored={result.stored}")

    print("== second sync is a no-op (monotone cursor) ==")
    again = connector.sync_account("acct-1")
    print(f"  fetched={again.fetched} stored={again.stored}")

    print("== 59m50s later the token has <60s left, so the next use refreshes it ==")
    clock.offset_ms += (3600 - 10) * 1000
    token = connector.ensure_fresh("acct-1")
    print(f"  rotated to {token}")

    print("== the user revokes access at the source ==")
    server.revoke("acct-1")
    clock.offset_ms += 3600 * 1000
    try:
        connector.ensure_fresh("acct-1")
    except RefreshRejectedError:
        status = store.get_external_account("acct-1").status
        print(f"  refresh rejected; account marked {status}")

    deep_sleep = store.query_window("pat-1", ParameterKind.SLEEP_STAGE_DURATION, 0, 2**62)
    print(f"sleep samples stored: {[(s.value, s.source.detail) for s in deep_sleep]}")

    server.stop()
    store.close()


if __name__ == "__main__":
    main()
