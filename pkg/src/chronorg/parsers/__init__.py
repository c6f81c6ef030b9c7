"""Source readers. Each module turns one format into records plus per-record errors."""
from .base import Draft, ParseResult, RecordError, SourceUnreadable

__all__ = ["Draft", "ParseResult", "RecordError", "SourceUnreadable"]
