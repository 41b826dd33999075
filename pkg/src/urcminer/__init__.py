"""Mining update-request comments (URCs) on Stack Overflow answer posts."""

__version__ = "0.1.0"

from urcminer.errors import (
    DataError,
    DumpParseError,
    SchemaError,
    TrainingError,
    UndefinedMetricError,
    UrcError,
    ValidationError,
)

__all__ = [
    "__version__",
    "UrcError",
    "DataError",
    "DumpParseError",
    "SchemaError",
    "TrainingError",
    "UndefinedMetricError",
    "ValidationError",
]
