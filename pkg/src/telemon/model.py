"""Canonical domain types and the parameter taxonomy.

Every other module builds on the types here: the parameter catalog (kind,
category, canonical unit, plausible range) is loaded from the committed
table ``data/parameters.csv`` and is the single authority for units and
ranges platform-wide. Out-of-range values are flagged, never dropped:
extreme readings are exactly what a physician needs to see.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from .errors import UnknownKindError

DEFAULT_FUTURE_SKEW_MS = 5 * 60 * 1000


class Category(str, Enum):
    ACTIVITY = "activity"
    BODY_MEASUREMENTS = "body_measurements"
    VITAL_PARAMETERS = "vital_parameters"
    NUTRITION = "nutrition"
    SLEEP = "sleep"
    CYCLE_MONITORING = "cycle_monitoring"


class ParameterKind(str, Enum):
    HEART_RATE = "heart_rate"
    RESTING_HEART_RATE = "resting_heart_rate"
    BLOOD_PRESSURE_SYSTOLIC = "blood_pressure_systolic"
    BLOOD_PRESSURE_DIASTOLIC = "blood_pressure_diastolic"
    OXYGEN_SATURATION = "oxygen_saturation"
    BODY_TEMPERATURE = "body_temperature"
    RESPIRATORY_RATE = "respiratory_rate"
    BLOOD_GLUCOSE = "blood_glucose"
    WEIGHT = "weight"
    HEIGHT = "height"
    BODY_FAT = "body_fat"
    STEPS = "steps"
    DISTANCE = "distance"
    CALORIES = "calories"
    SPEED = "speed"
    HEART_POINTS = "heart_points"
    WHEEL_SPEED = "wheel_speed"
    ACTIVITY_MAGNITUDE = "activity_magnitude"
    SLEEP_STAGE_DURATION = "sleep_stage_duration"
    HYDRATION = "hydration"
    CALORIE_INTAKE = "calorie_intake"
    MENSTRUAL_CYCLE = "menstrual_cycle"
    GSR = "gsr"
    STRESS_INDEX = "stress_index"


@dataclass(frozen=True)
class ParameterDescriptor:
    """Catalog entry: one monitored parameter and its plausible bounds."""

    kind: ParameterKind
    category: Category
    unit: str
    low: float
    high: float

    def in_range(self, value: float) -> bool:
        return self.low <= value <= self.high


class SourceChannel(str, Enum):
    CUSTOM_DEVICE = "custom_device"
    CONNECTOR = "connector"
    MANUAL = "manual"


@dataclass(frozen=True)
class Source:
    """Attribution of a sample: which channel produced it.

    ``ref`` is the device id or external account id; ``detail`` carries
    channel metadata such as the sleep stage label. The serialized key is
    part of the storage idempotence key, so equal sources dedupe and
    distinct stages of one night do not collide.
    """

    channel: SourceChannel
    ref: str = ""
    detail: str = ""

    def key(self) -> str:
        return f"{self.channel.value}:{self.ref}:{self.detail}"

    @classmethod
    def parse(cls, key: str) -> "Source":
        channel, _, rest = key.partition(":")
        ref, _, detail = rest.partition(":")
        return cls(SourceChannel(channel), ref, detail)

    @classmethod
    def custom_device(cls, device_id: str) -> "Source":
        return cls(SourceChannel.CUSTOM_DEVICE, device_id)

    @classmethod
    def connector(cls, account_id: str, detail: str = "") -> "Source":
        return cls(SourceChannel.CONNECTOR, account_id, detail)

    @classmethod
    def manual(cls) -> "Source":
        return cls(SourceChannel.MANUAL)


@dataclass(frozen=True)
class VitalSample:
    """One timestamped measurement of one parameter for one patient.

    ``ts_ms`` is a UTC instant in epoch milliseconds; ``value`` is in the
    catalog's canonical unit for ``kind``.
    """

    patient_id: str
    kind: ParameterKind
    ts_ms: int
    value: float
    source: Source
    seq: int | None = None


@dataclass(frozen=True)
class StoredSample(VitalSample):
    """A persisted sample; ``flagged`` marks an out-of-plausible-range value."""

    flagged: bool = False


class ValidationStatus(Enum):
    OK = "ok"
    FLAGGED_OUT_OF_RANGE = "flagged_out_of_range"
    REJECTED = "rejected"


class RejectReason(str, Enum):
    NON_FINITE = "non_finite"
    UNKNOWN_KIND = "unknown_kind"
    FUTURE_TIMESTAMP = "future_timestamp"


@dataclass(frozen=True)
class ValidationResult:
    status: ValidationStatus
    reason: RejectReason | None = None

    @property
    def ok(self) -> bool:
        return self.status is ValidationStatus.OK

    @property
    def flagged(self) -> bool:
        return self.status is ValidationStatus.FLAGGED_OUT_OF_RANGE

    @property
    def rejected(self) -> bool:
        return self.status is ValidationStatus.REJECTED

    @property
    def storable(self) -> bool:
        return not self.rejected


def _load_table() -> tuple[ParameterDescriptor, ...]:
    rows = []
    with resources.files(__package__).joinpath("data/parameters.csv").open(
        encoding="utf-8"
    ) as fh:
        for row in csv.DictReader(fh):
            descriptor = ParameterDescriptor(
                kind=ParameterKind(row["kind"]),
                category=Category(row["category"]),
                unit=row["unit"],
                low=float(row["low"]),
                high=float(row["high"]),
            )
            if not descriptor.unit:
                raise ValueError(f"empty unit for {descriptor.kind.value}")
            if not descriptor.low < descriptor.high:
                raise ValueError(f"bad range for {descriptor.kind.value}")
            rows.append(descriptor)
    kinds = [d.kind for d in rows]
    if len(set(kinds)) != len(kinds):
        raise ValueError("duplicate kind in parameter table")
    if set(kinds) != set(ParameterKind):
        missing = {k.value for k in ParameterKind} - {k.value for k in kinds}
        raise ValueError(f"parameter table incomplete: missing {sorted(missing)}")
    return tuple(rows)


@lru_cache(maxsize=1)
def parameter_catalog() -> tuple[ParameterDescriptor, ...]:
    """The complete fixed catalog, in table order. Same tuple on every call."""
    return _load_table()


@lru_cache(maxsize=1)
def _by_kind() -> dict[ParameterKind, ParameterDescriptor]:
    return {d.kind: d for d in parameter_catalog()}


def descriptor_for(kind: ParameterKind | str) -> ParameterDescriptor:
    try:
        kind = ParameterKind(kind)
    except ValueError:
        raise UnknownKindError(f"unknown parameter kind: {kind!r}") from None
    return _by_kind()[kind]


def canonical_unit(kind: ParameterKind | str) -> str:
    """Unit string the catalog prescribes for ``kind``."""
    return descriptor_for(kind).unit


def catalog_order(kind: ParameterKind) -> int:
    """Stable position of ``kind`` in the catalog (dashboard card order)."""
    return [d.kind for d in parameter_catalog()].index(kind)


def now_ms() -> int:
    return int(time.time() * 1000)


def validate_sample(
    sample: VitalSample,
    now: int | None = None,
    future_skew_ms: int = DEFAULT_FUTURE_SKEW_MS,
) -> ValidationResult:
    """Classify a sample as ok, flagged (storable), or rejected.

    Pure given an explicit ``now``; callers on the ingest path pass the
    ingest-time clock. Out-of-range but finite values flag rather than
    reject.
    """
    if not isinstance(sample.value, (int, float)) or not math.isfinite(sample.value):
        return ValidationResult(ValidationStatus.REJECTED, RejectReason.NON_FINITE)
    try:
        descriptor = descriptor_for(sample.kind)
    except UnknownKindError:
        return ValidationResult(ValidationStatus.REJECTED, RejectReason.UNKNOWN_KIND)
    reference = now_ms() if now is None else now
    if sample.ts_ms > reference + future_skew_ms:
        return ValidationResult(ValidationStatus.REJECTED, RejectReason.FUTURE_TIMESTAMP)
    if not descriptor.in_range(sample.value):
        return ValidationResult(ValidationStatus.FLAGGED_OUT_OF_RANGE)
    return ValidationResult(ValidationStatus.OK)
