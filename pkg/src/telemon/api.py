"""Authenticated HTTP+JSON API for patients and doctors.

Covers registration, session login/logout, patient-doctor association,
device management, profile editing, dashboard payloads, notes, and alert
acknowledgement. Sessions are opaque server-side tokens with an idle TTL
(default 30 minutes), so logout is immediate and absolute. Passwords are
stored as salted scrypt hashes. Every error body is ``{"code", "message"}``.

Authorization model: a patient reaches only their own resources; a
doctor reaches a patient's data only while currently associated;
management endpoints (devices, doctors, profile) are patient-only.
"""

from __future__ import annotations

import base64
import hashlib
import re
import secrets
from dataclasses import dataclass, field as dc_field
from typing import Callable, Literal

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import analytics
from .analytics import Granularity, Statistic
from .errors import (
    InsufficientBaselineError,
    InvalidCodeError,
    TargetNotFoundError,
)
from .model import (
    ParameterKind,
    canonical_unit,
    now_ms,
    parameter_catalog,
)
from .store import Note, Store, new_id

DEFAULT_SESSION_TTL_MS = 30 * 60 * 1000
PASSWORD_MIN_LEN = 10
LOCKOUT_THRESHOLD = 10
# Codice-fiscale-like default; deployments supply their national pattern.
DEFAULT_SSN_PATTERN = r"^[A-Z]{6}\d{2}[A-Z]\d{2}[A-Z]\d{3}[A-Z]$"

PROFILE_FIELDS = (
    "height_cm",
    "weight_baseline_kg",
    "allergies",
    "conditions",
    "emergency_contact",
)

# (method, path-template, access) — the authorization matrix tests walk this.
# access: "patient_data" = patient self or associated doctor,
#         "patient_only" = patient self, "any" = any live session.
ENDPOINT_MATRIX: list[tuple[str, str, str]] = [
    ("GET", "/api/patients/{patient_id}/dashboard", "patient_data"),
    ("POST", "/api/patients/{patient_id}/notes", "patient_data"),
    ("GET", "/api/patients/{patient_id}/doctors", "patient_only"),
    ("POST", "/api/patients/{patient_id}/doctors", "patient_only"),
    ("DELETE", "/api/patients/{patient_id}/doctors/{doctor_id}", "patient_only"),
    ("GET", "/api/patients/{patient_id}/devices", "patient_only"),
    ("POST", "/api/patients/{patient_id}/devices", "patient_only"),
    ("PATCH", "/api/patients/{patient_id}/devices/{device_id}", "patient_only"),
    ("DELETE", "/api/patients/{patient_id}/devices/{device_id}", "patient_only"),
    ("GET", "/api/patients/{patient_id}/profile", "patient_data"),
    ("PATCH", "/api/patients/{patient_id}/profile", "patient_only"),
    ("POST", "/api/alerts/{alert_id}/ack", "patient_data"),
    ("DELETE", "/api/session", "any"),
]


# -- password hashing ---------------------------------------------------------


def hash_password(password: str) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(password.encode("utf-8"), salt=salt, n=2**14, r=8, p=1)
    return "scrypt$" + base64.b64encode(salt).decode() + "$" + base64.b64encode(digest).decode()


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, salt_b64, digest_b64 = stored.split("$")
        if scheme != "scrypt":
            return False
        salt = base64.b64decode(salt_b64)
        expected = base64.b64decode(digest_b64)
    except (ValueError, TypeError):
        return False
    actual = hashlib.scrypt(password.encode("utf-8"), salt=salt, n=2**14, r=8, p=1)
    return secrets.compare_digest(actual, expected)


# -- config and errors -----------------------------------------------------------


@dataclass
class ApiConfig:
    port: int = 8080
    tls_certfile: str | None = None
    tls_keyfile: str | None = None
    session_ttl_ms: int = DEFAULT_SESSION_TTL_MS
    ssn_pattern: str = DEFAULT_SSN_PATTERN
    password_min_len: int = PASSWORD_MIN_LEN
    lockout_threshold: int = LOCKOUT_THRESHOLD
    clock: Callable[[], int] = dc_field(default=now_ms)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _unauthorized(message: str = "authentication required") -> ApiError:
    return ApiError(401, "unauthorized", message)


def _forbidden(message: str = "not allowed for this principal") -> ApiError:
    return ApiError(403, "unauthorized", message)


# -- request bodies ------------------------------------------------------------


class ExternalAccountLink(BaseModel):
    auth_code: str
    account_id: str | None = None


class PatientRegistration(BaseModel):
    name: str
    ssn: str
    email: str
    password: str
    device_ids: list[str] = []
    doctor_id: str
    external_account: ExternalAccountLink | None = None


class DoctorRegistration(BaseModel):
    name: str
    email: str
    specialization: str
    password: str


class LoginBody(BaseModel):
    email: str
    password: str


class DoctorLink(BaseModel):
    doctor_id: str


class DeviceAdd(BaseModel):
    device_id: str
    label: str | None = None


class DeviceRename(BaseModel):
    label: str


class NoteBody(BaseModel):
    kind: str
    ts_ms: int
    text: str
    note_id: str | None = None


class ProfilePatch(BaseModel):
    height_cm: float | None = None
    weight_baseline_kg: float | None = None
    allergies: str | None = None
    conditions: str | None = None
    emergency_contact: str | None = None


@dataclass(frozen=True)
class Principal:
    kind: Literal["patient", "doctor"]
    id: str
    token: str


# -- app factory -------------------------------------------------------------------


def create_app(store: Store, config: ApiConfig | None = None, connector=None) -> FastAPI:
    cfg = config or ApiConfig()
    app = FastAPI(title="telemon", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422, content={"code": "invalid_request", "message": str(exc.errors()[:1])}
        )

    def authenticate(request: Request) -> Principal:
        header = request.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise _unauthorized("missing bearer token")
        token = header.removeprefix("Bearer ")
        session = store.get_session(token)
        if session is None:
            raise _unauthorized("unknown session")
        principal_type, principal_id, expires_ms = session
        now = cfg.clock()
        if now >= expires_ms:
            store.delete_session(token)
            raise _unauthorized("session expired")
        store.touch_session(token, now + cfg.session_ttl_ms)
        return Principal(kind=principal_type, id=principal_id, token=token)

    def require_patient_self(principal: Principal, patient_id: str) -> None:
        if principal.kind != "patient" or principal.id != patient_id:
            raise _forbidden("patient-only endpoint")

    def require_patient_access(principal: Principal, patient_id: str) -> None:
        """Patient themselves, or a doctor currently associated."""
        if principal.kind == "patient":
            if principal.id != patient_id:
                raise _forbidden("not your record")
            return
        if not store.is_associated(patient_id, principal.id):
            raise _forbidden("doctor not associated with this patient")

    def known_patient(patient_id: str) -> None:
        if store.get_patient(patient_id) is None:
            raise ApiError(404, "unknown_patient", f"no patient {patient_id}")

    # -- registration ----------------------------------------------------

    @app.post("/api/patients", status_code=201)
    def register_patient(body: PatientRegistration) -> dict:
        if len(body.password) < cfg.password_min_len:
            raise ApiError(
                422, "weak_password", f"password must be >= {cfg.password_min_len} chars"
            )
        if not re.match(cfg.ssn_pattern, body.ssn.upper()):
            raise ApiError(422, "invalid_ssn_format", "ssn does not match configured format")
        if store.email_taken(body.email):
            raise ApiError(409, "duplicate_email", "email already registered")
        if store.get_doctor(body.doctor_id) is None:
            raise ApiError(422, "unknown_doctor", f"no doctor {body.doctor_id}")
        for device_id in body.device_ids:
            if store.device_owner(device_id) is not None:
                raise ApiError(409, "duplicate_device", f"device {device_id} already bound")

        # Exchange the external-account code before creating anything so a
        # rejected link leaves no partial registration behind.
        tokens_ready = None
        if body.external_account is not None:
            if connector is None:
                raise ApiError(422, "connector_unavailable", "no connector configured")
            tokens_ready = body.external_account

        patient_id = new_id("pat")
        created = cfg.clock()
        store.create_patient(
            patient_id=patient_id,
            name=body.name,
            email=body.email,
            password_hash=hash_password(body.password),
            ssn=body.ssn.upper(),
            device_ids=body.device_ids,
            doctor_id=body.doctor_id,
            created_ms=created,
        )
        if tokens_ready is not None:
            account_id = tokens_ready.account_id or new_id("acct")
            try:
                connector.link_account(account_id, patient_id, tokens_ready.auth_code)
            except InvalidCodeError as exc:
                raise ApiError(422, "invalid_code", str(exc)) from exc
        return {"patient_id": patient_id}

    @app.post("/api/doctors", status_code=201)
    def register_doctor(body: DoctorRegistration) -> dict:
        if len(body.password) < cfg.password_min_len:
            raise ApiError(
                422, "weak_password", f"password must be >= {cfg.password_min_len} chars"
            )
        if not body.specialization.strip():
            raise ApiError(422, "invalid_specialization", "specialization required")
        if store.email_taken(body.email):
            raise ApiError(409, "duplicate_email", "email already registered")
        doctor_id = new_id("doc")
        store.create_doctor(
            doctor_id=doctor_id,
            name=body.name,
            email=body.email,
            specialization=body.specialization,
            password_hash=hash_password(body.password),
            created_ms=cfg.clock(),
        )
        return {"doctor_id": doctor_id}

    @app.get("/api/doctors")
    def list_doctors() -> list[dict]:
        return store.list_doctors()

    # -- sessions ------------------------------------------------------------

    @app.post("/api/session", status_code=201)
    def login(body: LoginBody) -> dict:
        if store.is_locked(body.email):
            raise ApiError(423, "account_locked", "too many failed attempts")
        account = store.find_account_by_email(body.email)
        if account is None:
            raise ApiError(401, "bad_credentials", "invalid email or password")
        principal_type, principal_id, password_hash = account
        if not verify_password(body.password, password_hash):
            locked = store.record_login_failure(body.email, cfg.lockout_threshold)
            if locked:
                raise ApiError(423, "account_locked", "too many failed attempts")
            raise ApiError(401, "bad_credentials", "invalid email or password")
        store.reset_login_failures(body.email)
        token = secrets.token_urlsafe(32)
        expires = cfg.clock() + cfg.session_ttl_ms
        store.create_session(token, principal_type, principal_id, expires)
        return {
            "token": token,
            "principal": {"type": principal_type, "id": principal_id},
            "expires_ms": expires,
        }

    @app.delete("/api/session", status_code=204)
    def logout(principal: Principal = Depends(authenticate)) -> None:
        store.delete_session(principal.token)

    # -- associations ------------------------------------------------------------

    def _doctor_listing(patient_id: str) -> list[dict]:
        listing = []
        for doctor_id in store.doctors_for(patient_id):
            doc = store.get_doctor(doctor_id)
            if doc:
                listing.append(
                    {
                        "doctor_id": doctor_id,
                        "name": doc["name"],
                        "specialization": doc["specialization"],
                    }
                )
        return listing

    @app.get("/api/patients/{patient_id}/doctors")
    def get_doctors(patient_id: str, principal: Principal = Depends(authenticate)) -> list[dict]:
        require_patient_self(principal, patient_id)
        known_patient(patient_id)
        return _doctor_listing(patient_id)

    @app.post("/api/patients/{patient_id}/doctors")
    def add_doctor(
        patient_id: str, body: DoctorLink, principal: Principal = Depends(authenticate)
    ) -> list[dict]:
        require_patient_self(principal, patient_id)
        known_patient(patient_id)
        if store.get_doctor(body.doctor_id) is None:
            raise ApiError(422, "unknown_doctor", f"no doctor {body.doctor_id}")
        store.associate(patient_id, body.doctor_id)
        return _doctor_listing(patient_id)

    @app.delete("/api/patients/{patient_id}/doctors/{doctor_id}")
    def remove_doctor(
        patient_id: str, doctor_id: str, principal: Principal = Depends(authenticate)
    ) -> list[dict]:
        require_patient_self(principal, patient_id)
        known_patient(patient_id)
        if not store.dissociate(patient_id, doctor_id):
            raise ApiError(422, "not_associated", f"doctor {doctor_id} not assigned")
        return _doctor_listing(patient_id)

    # -- devices ----------------------------------------------------------------

    def _device_listing(patient_id: str) -> list[dict]:
        return [
            {"device_id": d.device_id, "label": d.label}
            for d in store.devices_for(patient_id)
        ]

    @app.get("/api/patients/{patient_id}/devices")
    def get_devices(patient_id: str, principal: Principal = Depends(authenticate)) -> list[dict]:
        require_patient_self(principal, patient_id)
        known_patient(patient_id)
        return _device_listing(patient_id)

    @app.post("/api/patients/{patient_id}/devices", status_code=201)
    def add_device(
        patient_id: str, body: DeviceAdd, principal: Principal = Depends(authenticate)
    ) -> list[dict]:
        require_patient_self(principal, patient_id)
        known_patient(patient_id)
        if store.device_owner(body.device_id) is not None:
            raise ApiError(409, "duplicate_device", f"device {body.device_id} already bound")
        store.add_device(body.device_id, patient_id, body.label, cfg.clock())
        return _device_listing(patient_id)

    @app.patch("/api/patients/{patient_id}/devices/{device_id}")
    def rename_device(
        patient_id: str,
        device_id: str,
        body: DeviceRename,
        principal: Principal = Depends(authenticate),
    ) -> list[dict]:
        require_patient_self(principal, patient_id)
        owner = store.device_owner(device_id)
        if owner is None:
            raise ApiError(404, "unknown_device", f"no device {device_id}")
        if owner != patient_id:
            raise ApiError(403, "not_owner", "device belongs to another patient")
        store.rename_device(device_id, body.label)
        return _device_listing(patient_id)

    @app.delete("/api/patients/{patient_id}/devices/{device_id}")
    def remove_device(
        patient_id: str, device_id: str, principal: Principal = Depends(authenticate)
    ) -> list[dict]:
        require_patient_self(principal, patient_id)
        owner = store.device_owner(device_id)
        if owner is None:
            raise ApiError(404, "unknown_device", f"no device {device_id}")
        if owner != patient_id:
            raise ApiError(403, "not_owner", "device belongs to another patient")
        store.remove_device(device_id)
        return _device_listing(patient_id)

    # -- dashboard ------------------------------------------------------------

    @app.get("/api/patients/{patient_id}/dashboard")
    def get_dashboard(
        patient_id: str,
        from_ms: int,
        to_ms: int,
        granularity: str = "day",
        principal: Principal = Depends(authenticate),
    ) -> dict:
        require_patient_access(principal, patient_id)
        known_patient(patient_id)
        try:
            gran = Granularity(granularity)
        except ValueError:
            raise ApiError(422, "invalid_granularity", f"bad granularity {granularity!r}")
        if from_ms >= to_ms:
            raise ApiError(422, "invalid_window", "from must precede to")
        return build_dashboard(store, patient_id, from_ms, to_ms, gran)

    # -- notes ------------------------------------------------------------------

    @app.post("/api/patients/{patient_id}/notes", status_code=201)
    def add_note(
        patient_id: str, body: NoteBody, principal: Principal = Depends(authenticate)
    ) -> dict:
        require_patient_access(principal, patient_id)
        known_patient(patient_id)
        try:
            kind = ParameterKind(body.kind)
        except ValueError:
            raise ApiError(422, "unknown_kind", f"bad kind {body.kind!r}")
        author = "patient" if principal.kind == "patient" else f"doctor:{principal.id}"
        note = Note(
            note_id=body.note_id or new_id("note"),
            patient_id=patient_id,
            author=author,
            kind=kind,
            ts_ms=body.ts_ms,
            text=body.text,
            created_ms=cfg.clock(),
        )
        try:
            note_id = store.upsert_note(note)
        except TargetNotFoundError as exc:
            raise ApiError(404, "target_not_found", str(exc)) from exc
        return {"note_id": note_id}

    # -- profile -----------------------------------------------------------------

    @app.get("/api/patients/{patient_id}/profile")
    def get_profile(patient_id: str, principal: Principal = Depends(authenticate)) -> dict:
        require_patient_access(principal, patient_id)
        known_patient(patient_id)
        patient = store.get_patient(patient_id)
        return {
            "profile": patient["profile"],
            "profile_updated_ms": patient["profile_updated_ms"],
        }

    @app.patch("/api/patients/{patient_id}/profile")
    def update_profile(
        patient_id: str, body: ProfilePatch, principal: Principal = Depends(authenticate)
    ) -> dict:
        require_patient_self(principal, patient_id)
        known_patient(patient_id)
        updates = {k: v for k, v in body.model_dump().items() if v is not None}
        if not updates:
            raise ApiError(422, "invalid_field_value", "no editable field supplied")
        if "height_cm" in updates and not 0 < updates["height_cm"] <= 300:
            raise ApiError(422, "invalid_field_value", "height_cm out of range")
        if "weight_baseline_kg" in updates and not 0 < updates["weight_baseline_kg"] <= 500:
            raise ApiError(422, "invalid_field_value", "weight_baseline_kg out of range")
        patient = store.get_patient(patient_id)
        profile = dict(patient["profile"])
        profile.update(updates)
        updated_ms = cfg.clock()
        store.update_profile(patient_id, profile, updated_ms)
        return {"profile": profile, "profile_updated_ms": updated_ms}

    # -- alerts --------------------------------------------------------------------

    @app.post("/api/alerts/{alert_id}/ack")
    def ack_alert(alert_id: str, principal: Principal = Depends(authenticate)) -> dict:
        alert = store.get_alert(alert_id)
        if alert is None:
            raise ApiError(404, "unknown_alert", f"no alert {alert_id}")
        require_patient_access(principal, alert["patient_id"])
        store.ack_alert(alert_id)
        return {"alert_id": alert_id, "acknowledged": True}

    # -- doctor's patient list ----------------------------------------------------

    @app.get("/api/doctors/{doctor_id}/patients")
    def doctor_patients(doctor_id: str, principal: Principal = Depends(authenticate)) -> list[dict]:
        if principal.kind != "doctor" or principal.id != doctor_id:
            raise _forbidden("doctor-only endpoint")
        listing = []
        for patient_id in store.patients_for_doctor(doctor_id):
            patient = store.get_patient(patient_id)
            if patient:
                listing.append({"patient_id": patient_id, "name": patient["name"]})
        return listing

    return app


# -- dashboard assembly -----------------------------------------------------------


def _label(kind: ParameterKind) -> str:
    return kind.value.replace("_", " ").capitalize()


def build_dashboard(
    store: Store,
    patient_id: str,
    from_ms: int,
    to_ms: int,
    granularity: Granularity,
) -> dict:
    """One card per parameter with data in the window, in catalog order.

    Series values are produced by the same aggregation entry point the
    analytics module exposes, so payload numbers are bit-identical to a
    direct call with the same inputs.
    """
    kinds_present = set(store.kinds_with_data(patient_id, from_ms, to_ms))
    cards = []
    for descriptor in parameter_catalog():
        kind = descriptor.kind
        if kind not in kinds_present:
            continue
        samples = store.query_window(patient_id, kind, from_ms, to_ms)
        series = analytics.aggregate(samples, from_ms, to_ms, granularity, Statistic.MEAN)
        latest = samples[-1]
        highest = analytics.find_extremum(samples, "max")
        lowest = analytics.find_extremum(samples, "min")
        outliers = [
            {"ts_ms": s.ts_ms, "value": s.value}
            for s in analytics.detect_outliers(samples, analytics.RangePolicy())
        ]
        bands = [
            {"low": r["low"], "high": r["high"]}
            for r in store.rules_for(patient_id, kind)
            if r["enabled"]
        ]
        alerts = [
            a
            for a in store.alerts_for(patient_id, unacknowledged_only=True)
            if a["kind"] == kind
        ]
        notes = store.notes_for(patient_id, kind=kind, window=(from_ms, to_ms))
        cards.append(
            {
                "kind": kind.value,
                "label": _label(kind),
                "category": descriptor.category.value,
                "unit": descriptor.unit,
                "latest": {"value": latest.value, "ts_ms": latest.ts_ms},
                "max": {"value": highest.value, "ts_ms": highest.ts_ms},
                "min": {"value": lowest.value, "ts_ms": lowest.ts_ms},
                "rule_bands": bands,
                "series": [
                    {
                        "bucket_start_ms": b.bucket_start_ms,
                        "value": b.value,
                        "count": b.sample_count,
                    }
                    for b in series
                ],
                "outliers": outliers,
                "alerts": [
                    {
                        "alert_id": a["alert_id"],
                        "severity": a["severity"],
                        "ts_ms": a["ts_ms"],
                        "value": a["value"],
                    }
                    for a in alerts
                ],
                "notes": [
                    {
                        "note_id": n.note_id,
                        "author": n.author,
                        "ts_ms": n.ts_ms,
                        "text": n.text,
                        "created_ms": n.created_ms,
                    }
                    for n in notes
                ],
            }
        )

    stress = None
    if ParameterKind.HEART_RATE in kinds_present and ParameterKind.GSR in kinds_present:
        hr = store.query_window(
            patient_id, ParameterKind.HEART_RATE, from_ms - analytics.STRESS_BASELINE_MS, to_ms
        )
        gsr = store.query_window(
            patient_id, ParameterKind.GSR, from_ms - analytics.STRESS_BASELINE_MS, to_ms
        )
        try:
            points = analytics.stress_index(hr, gsr, from_ms, to_ms)
            stress = {
                "unit": canonical_unit(ParameterKind.STRESS_INDEX),
                "series": [{"bucket_start_ms": t, "value": v} for t, v in points],
            }
        except InsufficientBaselineError:
            stress = None

    return {
        "patient_id": patient_id,
        "from_ms": from_ms,
        "to_ms": to_ms,
        "granularity": granularity.value,
        "cards": cards,
        "stress": stress,
    }
