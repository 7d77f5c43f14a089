"""WESAD archive to CSV-corpus converter."""

from .convert import (
    CorruptArchive,
    MissingModality,
    WesadExportError,
    convert,
    find_archives,
)
from .validate import ValidationReport, validate

__version__ = "0.1.0"

__all__ = [
    "CorruptArchive",
    "MissingModality",
    "ValidationReport",
    "WesadExportError",
    "convert",
    "find_archives",
    "validate",
]
