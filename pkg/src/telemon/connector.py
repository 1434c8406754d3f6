"""Pull-based synchronization from a fitness-cloud REST source.

Handles the token lifecycle (code exchange, refresh inside the 60-second
expiry horizon, revocation -> needs_relink) and per-kind incremental
sync: fetch remote datapoints in (last_sync[kind], now], map them to
catalog kinds through the committed table ``data/remote_types.csv``,
convert interval points to samples (timestamp = interval end), and
append through storage. Replays are absorbed by the storage idempotence
key, so syncing twice equals syncing once.

Tokens are persisted only encrypted; plaintext never reaches logs or the
database image.
"""

from __future__ import annotations

import csv
import logging
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import requests

from .crypto import FieldCipher
from .errors import InvalidCodeError, RefreshRejectedError, ServerUnreachableError
from .model import ParameterKind, Source, ValidationStatus, VitalSample, now_ms, validate_sample
from .store import ExternalAccountRecord, Store

log = logging.getLogger("telemon.connector")

REFRESH_HORIZON_MS = 60_000
STATUS_LINKED = "linked"
STATUS_NEEDS_RELINK = "needs_relink"


@dataclass(frozen=True)
class RemoteTypeMapping:
    remote_type: str
    kind: ParameterKind
    detail: str = ""


@lru_cache(maxsize=1)
def remote_type_table() -> dict[str, RemoteTypeMapping]:
    table = {}
    with resources.files("telemon").joinpath("data/remote_types.csv").open(
        encoding="utf-8"
    ) as fh:
        for row in csv.DictReader(fh):
            mapping = RemoteTypeMapping(
                remote_type=row["remote_type"],
                kind=ParameterKind(row["kind"]),
                detail=row.get("detail") or "",
            )
            table[mapping.remote_type] = mapping
    return table


@dataclass(frozen=True)
class ConnectorConfig:
    base_url: str
    client_id: str = "telemon"
    client_secret: str = "secret"
    redirect_uris: tuple[str, ...] = ("http://localhost/callback",)
    poll_interval_s: float = 300.0
    timeout_s: float = 5.0
    retries: int = 2
    # Remote types to poll each sync; defaults to the committed mapping table.
    remote_types: tuple[str, ...] = ()

    def polled_types(self) -> tuple[str, ...]:
        return self.remote_types or tuple(remote_type_table())


@dataclass(frozen=True)
class TokenResponse:
    access_token: str
    refresh_token: str
    expires_in_s: int


@dataclass
class KindSyncResult:
    fetched: int = 0
    stored: int = 0
    duplicates: int = 0
    flagged: int = 0


@dataclass
class SyncReport:
    per_kind: dict[str, KindSyncResult] = field(default_factory=dict)
    unmapped: int = 0
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def fetched(self) -> int:
        return sum(r.fetched for r in self.per_kind.values())

    @property
    def stored(self) -> int:
        return sum(r.stored for r in self.per_kind.values())

    @property
    def duplicates(self) -> int:
        return sum(r.duplicates for r in self.per_kind.values())


class FitClient:
    """HTTP client for the fitness REST dialect (fixture or real)."""

    def __init__(self, config: ConnectorConfig, session: requests.Session | None = None):
        self.config = config
        self._http = session or requests.Session()

    def _post_token(self, form: dict) -> TokenResponse | None:
        """None means the grant was rejected; unreachable raises."""
        form = dict(form, client_id=self.config.client_id, client_secret=self.config.client_secret)
        url = f"{self.config.base_url}/oauth/token"
        last_error: Exception | None = None
        for _ in range(self.config.retries + 1):
            try:
                response = self._http.post(url, data=form, timeout=self.config.timeout_s)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code == 400:
                return None
            response.raise_for_status()
            doc = response.json()
            return TokenResponse(
                access_token=doc["access_token"],
                refresh_token=doc["refresh_token"],
                expires_in_s=int(doc["expires_in"]),
            )
        raise ServerUnreachableError(f"token endpoint unreachable: {last_error}")

    def exchange_code(self, auth_code: str) -> TokenResponse:
        tokens = self._post_token({"grant_type": "authorization_code", "code": auth_code})
        if tokens is None:
            raise InvalidCodeError("authorization code rejected")
        return tokens

    def refresh(self, refresh_token: str) -> TokenResponse | None:
        return self._post_token(
            {"grant_type": "refresh_token", "refresh_token": refresh_token}
        )

    def fetch_datapoints(
        self, remote_type: str, start_ms: int, end_ms: int, access_token: str
    ) -> list[dict]:
        url = f"{self.config.base_url}/data/{remote_type}"
        last_error: Exception | None = None
        for _ in range(self.config.retries + 1):
            try:
                response = self._http.get(
                    url,
                    params={"start": start_ms, "end": end_ms},
                    headers={"Authorization": f"Bearer {access_token}"},
                    timeout=self.config.timeout_s,
                )
                response.raise_for_status()
                return response.json()
            except requests.RequestException as exc:
                last_error = exc
        raise ServerUnreachableError(f"data endpoint unreachable: {last_error}")


class FitConnector:
    """Links external accounts and keeps their series synchronized."""

    def __init__(
        self,
        store: Store,
        cipher: FieldCipher,
        client: FitClient,
        clock=now_ms,
    ):
        self._store = store
        self._cipher = cipher
        self._client = client
        self._clock = clock
        self._account_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- linking ------------------------------------------------------------

    def link_account(self, account_id: str, patient_id: str, auth_code: str) -> ExternalAccountRecord:
        """Exchange the code and persist the (encrypted) token pair."""
        tokens = self._client.exchange_code(auth_code)
        record = ExternalAccountRecord(
            account_id=account_id,
            patient_id=patient_id,
            access_token=self._cipher.protect_text(tokens.access_token),
            refresh_token=self._cipher.protect_text(tokens.refresh_token),
            expiry_ms=self._clock() + tokens.expires_in_s * 1000,
            last_sync={},
            status=STATUS_LINKED,
        )
        self._store.save_external_account(record)
        return record

    # -- token lifecycle -------------------------------------------------------

    def ensure_fresh(self, account_id: str) -> str:
        """Return a usable access token, refreshing when expiry is near."""
        record = self._store.get_external_account(account_id)
        if record is None:
            raise RefreshRejectedError(f"no linked account {account_id}")
        if record.expiry_ms - self._clock() >= REFRESH_HORIZON_MS:
            return self._cipher.unprotect_text(record.access_token)

        refresh_token = self._cipher.unprotect_text(record.refresh_token)
        tokens = self._client.refresh(refresh_token)
        if tokens is None:
            self._store.set_account_status(account_id, STATUS_NEEDS_RELINK)
            raise RefreshRejectedError(f"refresh rejected for {account_id}")
        updated = ExternalAccountRecord(
            account_id=record.account_id,
            patient_id=record.patient_id,
            access_token=self._cipher.protect_text(tokens.access_token),
            refresh_token=self._cipher.protect_text(tokens.refresh_token),
            expiry_ms=self._clock() + tokens.expires_in_s * 1000,
            last_sync=record.last_sync,
            status=STATUS_LINKED,
        )
        self._store.save_external_account(updated)
        return tokens.access_token

    # -- sync ---------------------------------------------------------------

    def sync_account(
        self,
        account_id: str,
        kinds: set[ParameterKind] | None = None,
    ) -> SyncReport:
        """Incremental fetch-and-store for one account.

        At most one sync runs per account; a trigger that arrives while
        one is in flight coalesces into a no-op report.
        """
        lock = self._lock_for(account_id)
        if not lock.acquire(blocking=False):
            log.info("sync for %s already in flight; coalescing", account_id)
            return SyncReport()
        try:
            return self._sync_locked(account_id, kinds)
        finally:
            lock.release()

    def _sync_locked(
        self, account_id: str, kinds: set[ParameterKind] | None
    ) -> SyncReport:
        token = self.ensure_fresh(account_id)
        record = self._store.get_external_account(account_id)
        assert record is not None
        table = remote_type_table()
        report = SyncReport()
        now = self._clock()

        for remote_type in self._client.config.polled_types():
            mapping = table.get(remote_type)
            if mapping is not None and kinds is not None and mapping.kind not in kinds:
                continue
            cursor = (
                record.last_sync.get(mapping.kind.value, 0) if mapping is not None else 0
            )
            try:
                points = self._client.fetch_datapoints(remote_type, cursor, now, token)
            except ServerUnreachableError as exc:
                report.errors[remote_type] = str(exc)
                continue
            if mapping is None:
                report.unmapped += len(points)
                if points:
                    log.warning(
                        "skipped %d points of unmapped type %s", len(points), remote_type
                    )
                continue
            self._ingest_points(record, mapping, points, report, now)

        return report

    def _ingest_points(
        self,
        record: ExternalAccountRecord,
        mapping: RemoteTypeMapping,
        points: list[dict],
        report: SyncReport,
        now: int,
    ) -> None:
        result = report.per_kind.setdefault(mapping.kind.value, KindSyncResult())
        samples = []
        max_end = 0
        for point in points:
            result.fetched += 1
            sample = VitalSample(
                patient_id=record.patient_id,
                kind=mapping.kind,
                ts_ms=int(point["end_ms"]),
                value=float(point["value"]),
                source=Source.connector(record.account_id, mapping.detail),
            )
            verdict = validate_sample(sample, now=now)
            if verdict.status is ValidationStatus.REJECTED:
                log.warning("dropped invalid remote point: %s", verdict.reason)
                continue
            samples.append(sample)
            max_end = max(max_end, sample.ts_ms)
        if samples:
            append = self._store.append_samples(samples)
            result.stored += append.stored
            result.duplicates += append.duplicates
            result.flagged += append.flagged
            self._store.advance_last_sync(record.account_id, mapping.kind, max_end)

    def _lock_for(self, account_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._account_locks.setdefault(account_id, threading.Lock())


class SyncScheduler:
    """Periodic polling of every linked account (default every 5 minutes)."""

    def __init__(self, connector: FitConnector, account_ids, interval_s: float = 300.0):
        self._connector = connector
        self._account_ids = account_ids
        self._interval_s = interval_s
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> "SyncScheduler":
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return self

    def _run(self) -> None:
        while not self._stop.wait(self._interval_s):
            for account_id in list(self._account_ids):
                try:
                    self._connector.sync_account(account_id)
                except Exception as exc:
                    log.warning("scheduled sync failed for %s: %s", account_id, exc)

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
