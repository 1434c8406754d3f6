from __future__ import annotations

import pytest

from telemon.crypto import FieldCipher, generate_key
from telemon.model import ParameterKind, Source, VitalSample
from telemon.store import Store

# Fixed "now" for deterministic tests: 2023-11-14T22:13:20Z.
NOW_MS = 1_700_000_000_000


class FakeClock:
    def __init__(self, start_ms: int = NOW_MS):
        self.t = start_ms

    def __call__(self) -> int:
        return self.t

    def advance_ms(self, delta: int) -> None:
        self.t += delta


@pytest.fixture
def cipher() -> FieldCipher:
    return FieldCipher.from_config(generate_key())


@pytest.fixture
def store(tmp_path, cipher) -> Store:
    s = Store(tmp_path / "telemon.db", cipher)
    yield s
    s.close()


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


def make_sample(
    patient_id: str = "pat-1",
    kind: ParameterKind = ParameterKind.HEART_RATE,
    ts_ms: int = NOW_MS,
    value: float = 72.0,
    source: Source | None = None,
    seq: int | None = None,
) -> VitalSample:
    return VitalSample(
        patient_id=patient_id,
        kind=kind,
        ts_ms=ts_ms,
        value=value,
        source=source or Source.manual(),
        seq=seq,
    )
