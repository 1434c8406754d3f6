import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from telemon.errors import UnknownKindError
from telemon.model import (
    Category,
    ParameterKind,
    RejectReason,
    Source,
    ValidationStatus,
    canonical_unit,
    descriptor_for,
    parameter_catalog,
    validate_sample,
)

from .conftest import NOW_MS, make_sample


def test_catalog_is_fixed_and_complete():
    first = parameter_catalog()
    second = parameter_catalog()
    assert first == second
    assert {d.category for d in first} == set(Category)
    kinds = [d.kind for d in first]
    assert len(kinds) == len(set(kinds))
    assert set(kinds) == set(ParameterKind)


def test_catalog_contains_heart_rate_as_vital_parameter():
    by_kind = {d.kind: d for d in parameter_catalog()}
    assert by_kind[ParameterKind.HEART_RATE].category is Category.VITAL_PARAMETERS


def test_catalog_contains_electrodermal_activity():
    by_kind = {d.kind: d for d in parameter_catalog()}
    assert ParameterKind.GSR in by_kind
    assert by_kind[ParameterKind.GSR].unit == "µS"


def test_catalog_ranges_are_ordered_and_units_nonempty():
    for descriptor in parameter_catalog():
        assert descriptor.low < descriptor.high
        assert descriptor.unit


def test_canonical_units_from_committed_table():
    assert canonical_unit(ParameterKind.HEART_RATE) == "bpm"
    assert canonical_unit(ParameterKind.OXYGEN_SATURATION) == "%"
    assert canonical_unit("body_temperature") == "°C"


def test_canonical_unit_unknown_kind():
    with pytest.raises(UnknownKindError):
        canonical_unit("cholesterol")


def test_canonical_unit_matches_descriptor_for_every_kind():
    for descriptor in parameter_catalog():
        assert canonical_unit(descriptor.kind) == descriptor.unit


def test_validate_heart_rate_72_is_ok():
    result = validate_sample(make_sample(value=72.0), now=NOW_MS)
    assert result.status is ValidationStatus.OK
    assert result.storable


def test_validate_nan_rejected():
    result = validate_sample(make_sample(value=math.nan), now=NOW_MS)
    assert result.rejected
    assert result.reason is RejectReason.NON_FINITE


def test_validate_infinity_rejected():
    result = validate_sample(make_sample(value=math.inf), now=NOW_MS)
    assert result.reason is RejectReason.NON_FINITE


def test_validate_body_temperature_55c_flagged_not_rejected():
    sample = make_sample(kind=ParameterKind.BODY_TEMPERATURE, value=55.0)
    result = validate_sample(sample, now=NOW_MS)
    assert result.status is ValidationStatus.FLAGGED_OUT_OF_RANGE
    assert result.storable


def test_validate_future_timestamp_rejected():
    sample = make_sample(ts_ms=NOW_MS + 6 * 60 * 1000)
    result = validate_sample(sample, now=NOW_MS)
    assert result.reason is RejectReason.FUTURE_TIMESTAMP


def test_validate_future_within_skew_accepted():
    sample = make_sample(ts_ms=NOW_MS + 4 * 60 * 1000)
    assert validate_sample(sample, now=NOW_MS).ok


@given(
    value=st.floats(allow_nan=True, allow_infinity=True),
    offset=st.integers(min_value=-10**9, max_value=10**9),
)
def test_validate_is_pure(value, offset):
    sample = make_sample(ts_ms=NOW_MS + offset, value=value)
    assert validate_sample(sample, now=NOW_MS) == validate_sample(sample, now=NOW_MS)


def test_source_key_roundtrip():
    for source in (
        Source.manual(),
        Source.custom_device("brc-001"),
        Source.connector("acct-1", "deep"),
    ):
        assert Source.parse(source.key()) == source
