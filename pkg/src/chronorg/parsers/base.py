from __future__ import annotations

import datetime as dt
import urllib.parse
from dataclasses import dataclass, field
from typing import Generic, TypeVar

from ..model import ChronorgError, OrgTimestamp

T = TypeVar("T")


class SourceUnreadable(ChronorgError):
    """The whole source failed; nothing may be written for this run."""


@dataclass(frozen=True)
class RecordError:
    """A per-record problem. ``record_failed`` is False for warnings attached
    to a record that was still emitted (e.g. an undecodable subject)."""

    kind: str
    message: str
    origin: str
    record_failed: bool = True

    def __str__(self):
        return f"{self.kind} at {self.origin}: {self.message}"


@dataclass(frozen=True)
class Draft:
    """An entry precursor: everything but the connector's extra tags and the id."""

    timestamp: OrgTimestamp
    summary: str
    origin: str
    tags: tuple[str, ...] = ()
    link: str | None = None
    properties: tuple[tuple[str, str], ...] = ()


@dataclass
class ParseResult(Generic[T]):
    records: list[T] = field(default_factory=list)
    errors: list[RecordError] = field(default_factory=list)


def to_local(instant: dt.datetime) -> dt.datetime:
    """Aware instants become naive host-local time; naive ones pass through."""
    if instant.tzinfo is None or instant.utcoffset() is None:
        return instant.replace(tzinfo=None)
    return instant.astimezone().replace(tzinfo=None)


def created(instant: dt.datetime) -> tuple[str, str]:
    return ("CREATED", instant.replace(microsecond=0).isoformat(timespec="seconds"))


def link_target(path_or_uri: str) -> str:
    """Percent-encode the characters Org link syntax cannot carry."""
    return urllib.parse.quote(path_or_uri.strip(), safe="/:@!$&'()*+,;=?#~%-._ ")
