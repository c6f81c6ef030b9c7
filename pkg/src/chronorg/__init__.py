"""Transcribe time-stamped metadata into Org-mode files and query them as an agenda."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ChronorgError,
    OrgTimestamp,
    SourceRecord,
    TimelineEntry,
    Weekday,
    derive_weekday,
    make_entry,
    make_entry_id,
    make_timestamp,
    sanitize_tag,
)
from .orgfile import (  # noqa: E402
    OrgOutputFile,
    SyncMode,
    make_error_entry,
    parse_file,
    serialize_entry,
    sync_append,
    write_overwrite,
)

__all__ = [
    "ChronorgError",
    "OrgOutputFile",
    "OrgTimestamp",
    "SourceRecord",
    "SyncMode",
    "TimelineEntry",
    "Weekday",
    "derive_weekday",
    "make_entry",
    "make_entry_id",
    "make_error_entry",
    "make_timestamp",
    "parse_file",
    "sanitize_tag",
    "serialize_entry",
    "sync_append",
    "write_overwrite",
]
