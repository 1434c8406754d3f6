"""Durable, encrypted persistence with windowed time-series queries.

SQLite-backed (embedded, zero external services); a single connection
guarded by a re-entrant lock serializes writers, so readers always see a
consistent snapshot and appends to one series are applied in order.

Sensitive fields (social security numbers, note text, connector tokens)
are stored only through ``FieldCipher``: the raw database image never
contains their plaintext.

Idempotence: the sample key is (patient_id, kind, ts_ms, source key).
Re-appending an identical sample counts as a duplicate and never changes
the stored value, so connector replays and QoS-1 redeliveries are
harmless.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from .crypto import EncryptedField, FieldCipher
from .errors import (
    InvalidSampleError,
    InvalidWindowError,
    TargetNotFoundError,
    TelemonError,
)
from .model import (
    ParameterKind,
    Source,
    StoredSample,
    ValidationStatus,
    VitalSample,
    validate_sample,
)

MAX_NOTE_CHARS = 2000

_SCHEMA = """
CREATE TABLE IF NOT EXISTS samples (
    patient_id TEXT NOT NULL,
    kind       TEXT NOT NULL,
    ts_ms      INTEGER NOT NULL,
    source     TEXT NOT NULL,
    value      REAL NOT NULL,
    seq        INTEGER,
    flagged    INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (patient_id, kind, ts_ms, source)
);
CREATE INDEX IF NOT EXISTS idx_samples_window ON samples (patient_id, kind, ts_ms);

CREATE TABLE IF NOT EXISTS patients (
    patient_id  TEXT PRIMARY KEY,
    name        TEXT NOT NULL,
    email       TEXT NOT NULL UNIQUE,
    password    TEXT NOT NULL,
    ssn_blob    BLOB NOT NULL,
    profile     TEXT NOT NULL DEFAULT '{}',
    profile_updated_ms INTEGER,
    created_ms  INTEGER NOT NULL
);

CREATE TABLE IF NOT EXISTS doctors (
    doctor_id      TEXT PRIMARY KEY,
    name           TEXT NOT NULL,
    email          TEXT NOT NULL UNIQUE,
    specialization TEXT NOT NULL,
    password       TEXT NOT NULL,
    created_ms     INTEGER NOT NULL
);

CREATE TABLE IF NOT EXISTS associations (
    patient_id TEXT NOT NULL,
    doctor_id  TEXT NOT NULL,
    PRIMARY KEY (patient_id, doctor_id)
);

CREATE TABLE IF NOT EXISTS devices (
    device_id  TEXT PRIMARY KEY,
    patient_id TEXT NOT NULL,
    label      TEXT NOT NULL,
    created_ms INTEGER NOT NULL
);

CREATE TABLE IF NOT EXISTS notes (
    note_id    TEXT PRIMARY KEY,
    patient_id TEXT NOT NULL,
    author     TEXT NOT NULL,
    kind       TEXT NOT NULL,
    ts_ms      INTEGER NOT NULL,
    text_blob  BLOB NOT NULL,
    created_ms INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_notes_target ON notes (patient_id, kind, ts_ms);

CREATE TABLE IF NOT EXISTS alert_rules (
    rule_id    TEXT PRIMARY KEY,
    patient_id TEXT NOT NULL,
    kind       TEXT NOT NULL,
    low        REAL NOT NULL,
    high       REAL NOT NULL,
    enabled    INTEGER NOT NULL DEFAULT 1
);

CREATE TABLE IF NOT EXISTS alerts (
    alert_id     TEXT PRIMARY KEY,
    rule_id      TEXT NOT NULL,
    patient_id   TEXT NOT NULL,
    kind         TEXT NOT NULL,
    ts_ms        INTEGER NOT NULL,
    value        REAL NOT NULL,
    source       TEXT NOT NULL,
    severity     TEXT NOT NULL,
    created_ms   INTEGER NOT NULL,
    acknowledged INTEGER NOT NULL DEFAULT 0
);
CREATE INDEX IF NOT EXISTS idx_alerts_patient ON alerts (patient_id, acknowledged);

CREATE TABLE IF NOT EXISTS external_accounts (
    account_id   TEXT PRIMARY KEY,
    patient_id   TEXT NOT NULL UNIQUE,
    access_blob  BLOB NOT NULL,
    refresh_blob BLOB NOT NULL,
    expiry_ms    INTEGER NOT NULL,
    last_sync    TEXT NOT NULL DEFAULT '{}',
    status       TEXT NOT NULL DEFAULT 'linked'
);

CREATE TABLE IF NOT EXISTS sessions (
    token          TEXT PRIMARY KEY,
    principal_type TEXT NOT NULL,
    principal_id   TEXT NOT NULL,
    expires_ms     INTEGER NOT NULL
);

CREATE TABLE IF NOT EXISTS login_failures (
    email  TEXT PRIMARY KEY,
    count  INTEGER NOT NULL DEFAULT 0,
    locked INTEGER NOT NULL DEFAULT 0
);
"""


class StorageUnavailableError(TelemonError):
    """Backing database cannot be opened or written."""


@dataclass(frozen=True)
class AppendReport:
    stored: int = 0
    duplicates: int = 0
    flagged: int = 0


@dataclass(frozen=True)
class Note:
    note_id: str
    patient_id: str
    author: str  # "patient" or "doctor:<doctor_id>"
    kind: ParameterKind
    ts_ms: int
    text: str
    created_ms: int


@dataclass(frozen=True)
class DeviceRecord:
    device_id: str
    patient_id: str
    label: str


@dataclass(frozen=True)
class ExternalAccountRecord:
    account_id: str
    patient_id: str
    access_token: EncryptedField
    refresh_token: EncryptedField
    expiry_ms: int
    last_sync: dict[str, int] = field(default_factory=dict)
    status: str = "linked"


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class Store:
    """All platform state behind one embedded database."""

    def __init__(self, path: str | Path, cipher: FieldCipher):
        self._path = str(path)
        self._cipher = cipher
        self._lock = threading.RLock()
        try:
            self._conn = sqlite3.connect(
                self._path, check_same_thread=False, isolation_level=None
            )
        except sqlite3.Error as exc:
            raise StorageUnavailableError(f"cannot open {self._path}: {exc}") from exc
        self._conn.executescript(_SCHEMA)

    @property
    def cipher(self) -> FieldCipher:
        return self._cipher

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    @contextmanager
    def _tx(self):
        with self._lock:
            self._conn.execute("BEGIN IMMEDIATE")
            try:
                yield self._conn
            except Exception:
                self._conn.execute("ROLLBACK")
                raise
            self._conn.execute("COMMIT")

    def _read(self, sql: str, params: tuple = ()) -> list[sqlite3.Row | tuple]:
        with self._lock:
            return self._conn.execute(sql, params).fetchall()

    # -- time series ---------------------------------------------------

    def append_samples(self, samples: list[VitalSample]) -> AppendReport:
        stored = duplicates = flagged = 0
        with self._tx() as conn:
            for sample in samples:
                verdict = validate_sample(sample, now=sample.ts_ms)
                if verdict.status is ValidationStatus.REJECTED:
                    raise InvalidSampleError(
                        f"rejected sample reached storage: {verdict.reason}"
                    )
                is_flagged = verdict.status is ValidationStatus.FLAGGED_OUT_OF_RANGE
                cur = conn.execute(
                    "INSERT OR IGNORE INTO samples"
                    " (patient_id, kind, ts_ms, source, value, seq, flagged)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (
                        sample.patient_id,
                        sample.kind.value,
                        sample.ts_ms,
                        sample.source.key(),
                        float(sample.value),
                        sample.seq,
                        int(is_flagged),
                    ),
                )
                if cur.rowcount == 1:
                    stored += 1
                    if is_flagged:
                        flagged += 1
                else:
                    duplicates += 1
        return AppendReport(stored=stored, duplicates=duplicates, flagged=flagged)

    def query_window(
        self,
        patient_id: str,
        kind: ParameterKind,
        start_ms: int,
        end_ms: int,
    ) -> list[StoredSample]:
        """Samples with start_ms <= ts < end_ms, ordered by (ts, source, seq)."""
        if start_ms >= end_ms:
            raise InvalidWindowError(f"start {start_ms} >= end {end_ms}")
        rows = self._read(
            "SELECT patient_id, kind, ts_ms, source, value, seq, flagged"
            " FROM samples WHERE patient_id = ? AND kind = ?"
            " AND ts_ms >= ? AND ts_ms < ?"
            " ORDER BY ts_ms, source, COALESCE(seq, -1)",
            (patient_id, kind.value, start_ms, end_ms),
        )
        return [
            StoredSample(
                patient_id=r[0],
                kind=ParameterKind(r[1]),
                ts_ms=r[2],
                source=Source.parse(r[3]),
                value=r[4],
                seq=r[5],
                flagged=bool(r[6]),
            )
            for r in rows
        ]

    def sample_exists(self, patient_id: str, kind: ParameterKind, ts_ms: int) -> bool:
        rows = self._read(
            "SELECT 1 FROM samples WHERE patient_id = ? AND kind = ? AND ts_ms = ? LIMIT 1",
            (patient_id, kind.value, ts_ms),
        )
        return bool(rows)

    def kinds_with_data(
        self, patient_id: str, start_ms: int, end_ms: int
    ) -> list[ParameterKind]:
        rows = self._read(
            "SELECT DISTINCT kind FROM samples"
            " WHERE patient_id = ? AND ts_ms >= ? AND ts_ms < ?",
            (patient_id, start_ms, end_ms),
        )
        return [ParameterKind(r[0]) for r in rows]

    # -- notes ----------------------------------------------------------

    def upsert_note(self, note: Note) -> str:
        if len(note.text) > MAX_NOTE_CHARS:
            raise TelemonError(f"note text exceeds {MAX_NOTE_CHARS} chars")
        if not self.sample_exists(note.patient_id, note.kind, note.ts_ms):
            raise TargetNotFoundError(
                f"no sample at ({note.patient_id}, {note.kind.value}, {note.ts_ms})"
            )
        blob = self._cipher.protect_text(note.text).pack()
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO notes (note_id, patient_id, author, kind, ts_ms, text_blob, created_ms)"
                " VALUES (?, ?, ?, ?, ?, ?, ?)"
                " ON CONFLICT(note_id) DO UPDATE SET text_blob = excluded.text_blob,"
                " created_ms = excluded.created_ms",
                (
                    note.note_id,
                    note.patient_id,
                    note.author,
                    note.kind.value,
                    note.ts_ms,
                    blob,
                    note.created_ms,
                ),
            )
        return note.note_id

    def notes_for(
        self,
        patient_id: str,
        kind: ParameterKind | None = None,
        window: tuple[int, int] | None = None,
    ) -> list[Note]:
        sql = (
            "SELECT note_id, patient_id, author, kind, ts_ms, text_blob, created_ms"
            " FROM notes WHERE patient_id = ?"
        )
        params: list = [patient_id]
        if kind is not None:
            sql += " AND kind = ?"
            params.append(kind.value)
        if window is not None:
            sql += " AND ts_ms >= ? AND ts_ms < ?"
            params.extend(window)
        sql += " ORDER BY created_ms, note_id"
        return [
            Note(
                note_id=r[0],
                patient_id=r[1],
                author=r[2],
                kind=ParameterKind(r[3]),
                ts_ms=r[4],
                text=self._cipher.unprotect_text(EncryptedField.unpack(r[5])),
                created_ms=r[6],
            )
            for r in self._read(sql, tuple(params))
        ]

    # -- accounts --------------------------------------------------------

    def email_taken(self, email: str) -> bool:
        taken = self._read("SELECT 1 FROM patients WHERE email = ?", (email,))
        return bool(taken) or bool(
            self._read("SELECT 1 FROM doctors WHERE email = ?", (email,))
        )

    def create_doctor(
        self,
        doctor_id: str,
        name: str,
        email: str,
        specialization: str,
        password_hash: str,
        created_ms: int,
    ) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO doctors VALUES (?, ?, ?, ?, ?, ?)",
                (doctor_id, name, email, specialization, password_hash, created_ms),
            )

    def create_patient(
        self,
        patient_id: str,
        name: str,
        email: str,
        password_hash: str,
        ssn: str,
        device_ids: list[str],
        doctor_id: str,
        created_ms: int,
    ) -> None:
        """Create the patient plus device bindings and the doctor link atomically."""
        ssn_blob = self._cipher.protect_text(ssn).pack()
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO patients"
                " (patient_id, name, email, password, ssn_blob, profile, profile_updated_ms, created_ms)"
                " VALUES (?, ?, ?, ?, ?, '{}', NULL, ?)",
                (patient_id, name, email, password_hash, ssn_blob, created_ms),
            )
            for device_id in device_ids:
                conn.execute(
                    "INSERT INTO devices VALUES (?, ?, ?, ?)",
                    (device_id, patient_id, device_id, created_ms),
                )
            conn.execute(
                "INSERT INTO associations VALUES (?, ?)", (patient_id, doctor_id)
            )

    def get_patient(self, patient_id: str) -> dict | None:
        rows = self._read(
            "SELECT patient_id, name, email, password, profile, profile_updated_ms"
            " FROM patients WHERE patient_id = ?",
            (patient_id,),
        )
        if not rows:
            return None
        r = rows[0]
        return {
            "patient_id": r[0],
            "name": r[1],
            "email": r[2],
            "password_hash": r[3],
            "profile": json.loads(r[4]),
            "profile_updated_ms": r[5],
        }

    def get_patient_ssn(self, patient_id: str) -> str:
        rows = self._read(
            "SELECT ssn_blob FROM patients WHERE patient_id = ?", (patient_id,)
        )
        if not rows:
            raise TelemonError(f"no patient {patient_id}")
        return self._cipher.unprotect_text(EncryptedField.unpack(rows[0][0]))

    def get_doctor(self, doctor_id: str) -> dict | None:
        rows = self._read(
            "SELECT doctor_id, name, email, specialization, password FROM doctors"
            " WHERE doctor_id = ?",
            (doctor_id,),
        )
        if not rows:
            return None
        r = rows[0]
        return {
            "doctor_id": r[0],
            "name": r[1],
            "email": r[2],
            "specialization": r[3],
            "password_hash": r[4],
        }

    def list_doctors(self) -> list[dict]:
        return [
            {"doctor_id": r[0], "name": r[1], "specialization": r[2]}
            for r in self._read(
                "SELECT doctor_id, name, specialization FROM doctors ORDER BY created_ms, doctor_id"
            )
        ]

    def find_account_by_email(self, email: str) -> tuple[str, str, str] | None:
        """(principal_type, id, password_hash) for either account table."""
        rows = self._read(
            "SELECT patient_id, password FROM patients WHERE email = ?", (email,)
        )
        if rows:
            return ("patient", rows[0][0], rows[0][1])
        rows = self._read(
            "SELECT doctor_id, password FROM doctors WHERE email = ?", (email,)
        )
        if rows:
            return ("doctor", rows[0][0], rows[0][1])
        return None

    def update_profile(self, patient_id: str, profile: dict, updated_ms: int) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE patients SET profile = ?, profile_updated_ms = ? WHERE patient_id = ?",
                (json.dumps(profile), updated_ms, patient_id),
            )

    # -- associations ----------------------------------------------------

    def associate(self, patient_id: str, doctor_id: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO associations VALUES (?, ?)",
                (patient_id, doctor_id),
            )

    def dissociate(self, patient_id: str, doctor_id: str) -> bool:
        with self._tx() as conn:
            cur = conn.execute(
                "DELETE FROM associations WHERE patient_id = ? AND doctor_id = ?",
                (patient_id, doctor_id),
            )
            return cur.rowcount > 0

    def doctors_for(self, patient_id: str) -> list[str]:
        return [
            r[0]
            for r in self._read(
                "SELECT doctor_id FROM associations WHERE patient_id = ? ORDER BY doctor_id",
                (patient_id,),
            )
        ]

    def patients_for_doctor(self, doctor_id: str) -> list[str]:
        return [
            r[0]
            for r in self._read(
                "SELECT patient_id FROM associations WHERE doctor_id = ? ORDER BY patient_id",
                (doctor_id,),
            )
        ]

    def is_associated(self, patient_id: str, doctor_id: str) -> bool:
        return bool(
            self._read(
                "SELECT 1 FROM associations WHERE patient_id = ? AND doctor_id = ?",
                (patient_id, doctor_id),
            )
        )

    # -- devices -----------------------------------------------------------

    def add_device(self, device_id: str, patient_id: str, label: str | None, now: int) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO devices VALUES (?, ?, ?, ?)",
                (device_id, patient_id, label or device_id, now),
            )

    def remove_device(self, device_id: str) -> bool:
        with self._tx() as conn:
            cur = conn.execute("DELETE FROM devices WHERE device_id = ?", (device_id,))
            return cur.rowcount > 0

    def rename_device(self, device_id: str, label: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE devices SET label = ? WHERE device_id = ?", (label, device_id)
            )

    def device_owner(self, device_id: str) -> str | None:
        rows = self._read(
            "SELECT patient_id FROM devices WHERE device_id = ?", (device_id,)
        )
        return rows[0][0] if rows else None

    def devices_for(self, patient_id: str) -> list[DeviceRecord]:
        return [
            DeviceRecord(device_id=r[0], patient_id=r[1], label=r[2])
            for r in self._read(
                "SELECT device_id, patient_id, label FROM devices"
                " WHERE patient_id = ? ORDER BY created_ms, device_id",
                (patient_id,),
            )
        ]

    # -- alert rules and alerts ---------------------------------------------

    def upsert_alert_rule(
        self,
        rule_id: str,
        patient_id: str,
        kind: ParameterKind,
        low: float,
        high: float,
        enabled: bool = True,
    ) -> None:
        if not low < high:
            raise TelemonError(f"alert rule must have low < high, got [{low}, {high}]")
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO alert_rules VALUES (?, ?, ?, ?, ?, ?)"
                " ON CONFLICT(rule_id) DO UPDATE SET"
                " low = excluded.low, high = excluded.high, enabled = excluded.enabled",
                (rule_id, patient_id, kind.value, low, high, int(enabled)),
            )

    def rules_for(self, patient_id: str, kind: ParameterKind | None = None) -> list[dict]:
        sql = "SELECT rule_id, patient_id, kind, low, high, enabled FROM alert_rules WHERE patient_id = ?"
        params: list = [patient_id]
        if kind is not None:
            sql += " AND kind = ?"
            params.append(kind.value)
        return [
            {
                "rule_id": r[0],
                "patient_id": r[1],
                "kind": ParameterKind(r[2]),
                "low": r[3],
                "high": r[4],
                "enabled": bool(r[5]),
            }
            for r in self._read(sql, tuple(params))
        ]

    def record_alert(
        self,
        alert_id: str,
        rule_id: str,
        sample: VitalSample,
        severity: str,
        created_ms: int,
    ) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO alerts"
                " (alert_id, rule_id, patient_id, kind, ts_ms, value, source, severity, created_ms, acknowledged)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, 0)",
                (
                    alert_id,
                    rule_id,
                    sample.patient_id,
                    sample.kind.value,
                    sample.ts_ms,
                    sample.value,
                    sample.source.key(),
                    severity,
                    created_ms,
                ),
            )

    def alerts_for(
        self, patient_id: str, unacknowledged_only: bool = False
    ) -> list[dict]:
        sql = (
            "SELECT alert_id, rule_id, patient_id, kind, ts_ms, value, severity, created_ms, acknowledged"
            " FROM alerts WHERE patient_id = ?"
        )
        if unacknowledged_only:
            sql += " AND acknowledged = 0"
        sql += " ORDER BY created_ms, alert_id"
        return [
            {
                "alert_id": r[0],
                "rule_id": r[1],
                "patient_id": r[2],
                "kind": ParameterKind(r[3]),
                "ts_ms": r[4],
                "value": r[5],
                "severity": r[6],
                "created_ms": r[7],
                "acknowledged": bool(r[8]),
            }
            for r in self._read(sql, (patient_id,))
        ]

    def get_alert(self, alert_id: str) -> dict | None:
        rows = self._read(
            "SELECT alert_id, patient_id, acknowledged FROM alerts WHERE alert_id = ?",
            (alert_id,),
        )
        if not rows:
            return None
        return {
            "alert_id": rows[0][0],
            "patient_id": rows[0][1],
            "acknowledged": bool(rows[0][2]),
        }

    def ack_alert(self, alert_id: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE alerts SET acknowledged = 1 WHERE alert_id = ?", (alert_id,)
            )

    # -- external accounts ----------------------------------------------------

    def save_external_account(self, record: ExternalAccountRecord) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO external_accounts VALUES (?, ?, ?, ?, ?, ?, ?)"
                " ON CONFLICT(account_id) DO UPDATE SET"
                " access_blob = excluded.access_blob,"
                " refresh_blob = excluded.refresh_blob,"
                " expiry_ms = excluded.expiry_ms,"
                " last_sync = excluded.last_sync,"
                " status = excluded.status",
                (
                    record.account_id,
                    record.patient_id,
                    record.access_token.pack(),
                    record.refresh_token.pack(),
                    record.expiry_ms,
                    json.dumps(record.last_sync),
                    record.status,
                ),
            )

    def get_external_account(self, account_id: str) -> ExternalAccountRecord | None:
        rows = self._read(
            "SELECT account_id, patient_id, access_blob, refresh_blob, expiry_ms, last_sync, status"
            " FROM external_accounts WHERE account_id = ?",
            (account_id,),
        )
        if not rows:
            return None
        r = rows[0]
        return ExternalAccountRecord(
            account_id=r[0],
            patient_id=r[1],
            access_token=EncryptedField.unpack(r[2]),
            refresh_token=EncryptedField.unpack(r[3]),
            expiry_ms=r[4],
            last_sync=json.loads(r[5]),
            status=r[6],
        )

    def external_account_for_patient(self, patient_id: str) -> ExternalAccountRecord | None:
        rows = self._read(
            "SELECT account_id FROM external_accounts WHERE patient_id = ?",
            (patient_id,),
        )
        return self.get_external_account(rows[0][0]) if rows else None

    def advance_last_sync(self, account_id: str, kind: ParameterKind, end_ms: int) -> None:
        """Move the per-kind cursor forward; never backward."""
        with self._tx() as conn:
            row = conn.execute(
                "SELECT last_sync FROM external_accounts WHERE account_id = ?",
                (account_id,),
            ).fetchone()
            if row is None:
                raise TelemonError(f"no external account {account_id}")
            cursors = json.loads(row[0])
            if end_ms > cursors.get(kind.value, 0):
                cursors[kind.value] = end_ms
                conn.execute(
                    "UPDATE external_accounts SET last_sync = ? WHERE account_id = ?",
                    (json.dumps(cursors), account_id),
                )

    def set_account_status(self, account_id: str, status: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE external_accounts SET status = ? WHERE account_id = ?",
                (status, account_id),
            )

    # -- sessions ---------------------------------------------------------

    def create_session(
        self, token: str, principal_type: str, principal_id: str, expires_ms: int
    ) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO sessions VALUES (?, ?, ?, ?)",
                (token, principal_type, principal_id, expires_ms),
            )

    def get_session(self, token: str) -> tuple[str, str, int] | None:
        rows = self._read(
            "SELECT principal_type, principal_id, expires_ms FROM sessions WHERE token = ?",
            (token,),
        )
        return (rows[0][0], rows[0][1], rows[0][2]) if rows else None

    def touch_session(self, token: str, expires_ms: int) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE sessions SET expires_ms = ? WHERE token = ?",
                (expires_ms, token),
            )

    def delete_session(self, token: str) -> None:
        with self._tx() as conn:
            conn.execute("DELETE FROM sessions WHERE token = ?", (token,))

    # -- login failure tracking --------------------------------------------

    def record_login_failure(self, email: str, lock_threshold: int) -> bool:
        """Increment the consecutive-failure count; returns True when locked."""
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO login_failures (email, count, locked) VALUES (?, 0, 0)"
                " ON CONFLICT(email) DO NOTHING",
                (email,),
            )
            conn.execute(
                "UPDATE login_failures SET count = count + 1 WHERE email = ?", (email,)
            )
            row = conn.execute(
                "SELECT count FROM login_failures WHERE email = ?", (email,)
            ).fetchone()
            locked = row[0] >= lock_threshold
            if locked:
                conn.execute(
                    "UPDATE login_failures SET locked = 1 WHERE email = ?", (email,)
                )
            return locked

    def reset_login_failures(self, email: str) -> None:
        with self._tx() as conn:
            conn.execute("DELETE FROM login_failures WHERE email = ?", (email,))

    def is_locked(self, email: str) -> bool:
        rows = self._read(
            "SELECT locked FROM login_failures WHERE email = ?", (email,)
        )
        return bool(rows and rows[0][0])

    # -- raw image -----------------------------------------------------------

    def raw_image(self) -> bytes:
        """Raw persisted bytes, for at-rest encryption property checks."""
        with self._lock:
            if self._path != ":memory:":
                return Path(self._path).read_bytes()
            return "\n".join(self._conn.iterdump()).encode("utf-8")
