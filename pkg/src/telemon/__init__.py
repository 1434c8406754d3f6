"""telemon: self-hostable health telemonitoring platform.

Acquires vital-sign data from custom devices (MQTT-style pub/sub) and a
fitness-cloud REST connector, validates and stores it encrypted at rest,
analyzes it (aggregation, outliers, stress index, threshold alerts), and
serves patients and physicians through an authenticated HTTP API.
"""

from .model import (
    Category,
    ParameterDescriptor,
    ParameterKind,
    Source,
    SourceChannel,
    StoredSample,
    ValidationResult,
    ValidationStatus,
    VitalSample,
    canonical_unit,
    parameter_catalog,
    validate_sample,
)

__version__ = "0.1.0"

__all__ = [
    "Category",
    "ParameterDescriptor",
    "ParameterKind",
    "Source",
    "SourceChannel",
    "StoredSample",
    "ValidationResult",
    "ValidationStatus",
    "VitalSample",
    "canonical_unit",
    "parameter_catalog",
    "validate_sample",
    "__version__",
]
