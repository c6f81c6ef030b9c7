"""Timeline data model shared by connectors, the Org writer and the agenda.

Every value here is immutable; construction validates and normalizes.
"""
from __future__ import annotations

import datetime as dt
import enum
import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

FIELD_SEP = "\x1f"
TAG_RE = re.compile(r"[A-Za-z0-9_@]+")
PROPERTY_KEY_RE = re.compile(r"[A-Za-z0-9_-]+")
_RESERVED_KEYS = {"ID", "PROPERTIES", "END"}
_CONTROL_RE = re.compile(r"[\x00-\x1f\x7f]")
# heading text that the Org reader would split into summary + tags
_TRAILING_TAGS_RE = re.compile(r"\s:(?:[A-Za-z0-9_@]+:)+$")
_LINK_SHAPE_RE = re.compile(r"^\[\[[^\[\]]+\]\[.*\]\]$")


class ChronorgError(Exception):
    """Base class for every error raised by this package."""


class TimestampError(ChronorgError, ValueError):
    pass


class InvalidDate(TimestampError):
    pass


class InvertedRange(TimestampError):
    pass


class EmptyTag(ChronorgError, ValueError):
    pass


class InvalidEntry(ChronorgError, ValueError):
    pass


class Weekday(enum.IntEnum):
    MONDAY = 0
    TUESDAY = 1
    WEDNESDAY = 2
    THURSDAY = 3
    FRIDAY = 4
    SATURDAY = 5
    SUNDAY = 6

    @property
    def abbr(self) -> str:
        return _ABBR[self]

    @property
    def long(self) -> str:
        return _LONG[self]


_LONG = tuple(d.name.title() for d in Weekday)
_ABBR = tuple(name[:3] for name in _LONG)
_BY_INDEX = tuple(Weekday)


def derive_weekday(day: dt.date) -> Weekday:
    return _BY_INDEX[day.weekday()]


def _coerce_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    try:
        if isinstance(value, str):
            y, m, d = (int(p) for p in value.split("-"))
        else:
            y, m, d = value
        return dt.date(y, m, d)
    except (TypeError, ValueError) as exc:
        raise InvalidDate(f"invalid date: {value!r}") from exc


def _coerce_time(value) -> dt.time | None:
    if value is None:
        return None
    if isinstance(value, dt.datetime):
        value = value.time()
    if isinstance(value, dt.time):
        return dt.time(value.hour, value.minute)
    try:
        parts = [int(p) for p in str(value).split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(value)
        # seconds validated, then dropped
        return dt.time(*parts).replace(second=0)
    except (TypeError, ValueError) as exc:
        raise TimestampError(f"invalid clock time: {value!r}") from exc


@dataclass(frozen=True)
class OrgTimestamp:
    """A calendar date with optional minute-precision time and end.

    ``end`` is either a same-day :class:`datetime.time` or another
    ``OrgTimestamp`` on a later date. Build through :func:`make_timestamp`.
    """

    date: dt.date
    time: dt.time | None = None
    end: Union[dt.time, "OrgTimestamp", None] = None

    @property
    def weekday(self) -> Weekday:
        return derive_weekday(self.date)

    @property
    def start(self) -> dt.datetime:
        return dt.datetime.combine(self.date, self.time or dt.time(0, 0))

    @property
    def end_date(self) -> dt.date:
        if isinstance(self.end, OrgTimestamp):
            return self.end.date
        return self.date

    @property
    def end_time(self) -> dt.time | None:
        if isinstance(self.end, OrgTimestamp):
            return self.end.time
        return self.end

    def is_cross_day(self) -> bool:
        return isinstance(self.end, OrgTimestamp)

    def render(self) -> str:
        text = f"<{self.date.isoformat()} {self.weekday.abbr}"
        if self.time is not None:
            text += f" {self.time:%H:%M}"
            if isinstance(self.end, dt.time):
                text += f"-{self.end:%H:%M}"
        text += ">"
        if isinstance(self.end, OrgTimestamp):
            text += "--" + self.end.render()
        return text

    __str__ = render


def make_timestamp(date, time=None, end=None) -> OrgTimestamp:
    """Validate and normalize a stamp.

    ``date`` accepts a date, ``"YYYY-MM-DD"`` or a ``(y, m, d)`` triple;
    ``time`` a time or ``"HH:MM[:SS]"``; seconds are truncated. ``end`` may be
    a same-day time, a datetime, a date (date-only ranges) or an OrgTimestamp.
    """
    day = _coerce_date(date)
    clock = _coerce_time(time)
    if end is None:
        return OrgTimestamp(day, clock)

    if isinstance(end, OrgTimestamp):
        end_day, end_clock = end.date, end.time
    elif isinstance(end, dt.datetime):
        end_day, end_clock = end.date(), _coerce_time(end)
    elif isinstance(end, dt.date):
        end_day, end_clock = end, None
    else:
        end_day, end_clock = day, _coerce_time(end)

    if (clock is None) != (end_clock is None):
        raise TimestampError("start and end must both carry a clock time or neither")
    if (end_day, end_clock or dt.time(0)) < (day, clock or dt.time(0)):
        raise InvertedRange(f"end {end_day} {end_clock} precedes start {day} {clock}")

    if end_day == day:
        # same-day range collapses to the HH:MM-HH:MM form
        return OrgTimestamp(day, clock, end_clock)
    return OrgTimestamp(day, clock, OrgTimestamp(end_day, end_clock))


def stamp_from_datetime(start: dt.datetime, end: dt.datetime | None = None) -> OrgTimestamp:
    return make_timestamp(start.date(), start.time(), end)


_STAMP_PART = r"<(\d{4})-(\d{2})-(\d{2}) ([A-Z][a-z]{2})(?: (\d{2}):(\d{2})(?:-(\d{2}):(\d{2}))?)?>"
STAMP_RE = re.compile(_STAMP_PART + r"(?:--" + _STAMP_PART + r")?")


def parse_timestamp(text: str) -> OrgTimestamp:
    """Inverse of :meth:`OrgTimestamp.render`; rejects mismatched weekdays."""
    m = STAMP_RE.fullmatch(text)
    if not m:
        raise TimestampError(f"not an Org timestamp: {text!r}")
    g = m.groups()
    start = _stamp_from_groups(g[:8])
    if g[8] is None:
        return start
    if start.end is not None:
        raise TimestampError(f"range stamp cannot also carry a clock range: {text!r}")
    end = _stamp_from_groups(g[8:])
    if end.end is not None:
        raise TimestampError(f"nested range in {text!r}")
    return make_timestamp(start.date, start.time, end)


def _stamp_from_groups(g) -> OrgTimestamp:
    y, mo, d, wd, hh, mm, eh, em = g
    day = _coerce_date((int(y), int(mo), int(d)))
    if derive_weekday(day).abbr != wd:
        raise TimestampError(f"weekday {wd} does not match {day.isoformat()}")
    clock = _coerce_time(f"{hh}:{mm}") if hh is not None else None
    end = _coerce_time(f"{eh}:{em}") if eh is not None else None
    return make_timestamp(day, clock, end)


def sanitize_tag(raw: str) -> str:
    """Map free text onto the Org tag alphabet ``[A-Za-z0-9_@]``.

    Invalid characters at either edge are dropped; inner runs become one ``_``.

    >>> sanitize_tag("my tag!")
    'my_tag'
    """
    text = raw.strip()
    text = re.sub(r"^[^A-Za-z0-9_@]+|[^A-Za-z0-9_@]+$", "", text)
    text = re.sub(r"[^A-Za-z0-9_@]+", "_", text)
    if not text:
        raise EmptyTag(f"tag {raw!r} reduces to nothing")
    return text


def clean_summary(text: str) -> str:
    """Fold arbitrary source text into a summary the Org reader round-trips."""
    text = " ".join(_CONTROL_RE.sub(" ", text).split())
    while _TRAILING_TAGS_RE.search(text):
        head, _, tail = text.rpartition(" ")
        text = head + tail
    if _LINK_SHAPE_RE.match(text):
        text = "[ " + text[1:]
    return text


@dataclass(frozen=True)
class TimelineEntry:
    timestamp: OrgTimestamp
    summary: str
    tags: tuple[str, ...] = ()
    link: str | None = None
    properties: tuple[tuple[str, str], ...] = ()
    id: str = field(default="")

    def __post_init__(self):
        _validate_entry(self)
        if not self.id:
            object.__setattr__(self, "id", make_entry_id(self))
        elif not re.fullmatch(r"[0-9a-f]{40}", self.id):
            raise InvalidEntry(f"malformed id {self.id!r}")

    @property
    def props(self) -> dict[str, str]:
        return dict(self.properties)

    def content_matches_id(self) -> bool:
        return make_entry_id(self) == self.id


def _validate_entry(entry: TimelineEntry) -> None:
    s = entry.summary
    if not s.strip() or s != s.strip() or _CONTROL_RE.search(s):
        raise InvalidEntry(f"summary must be non-empty single-line trimmed text: {s!r}")
    if entry.link is None:
        if _TRAILING_TAGS_RE.search(s) or _LINK_SHAPE_RE.match(s):
            raise InvalidEntry(f"summary is ambiguous in Org syntax (use clean_summary): {s!r}")
    else:
        link = entry.link
        if not link or link != link.strip() or _CONTROL_RE.search(link) or "[" in link or "]" in link:
            raise InvalidEntry(f"link must be non-empty, trimmed, bracket-free: {link!r}")
    seen = set()
    for tag in entry.tags:
        if not TAG_RE.fullmatch(tag):
            raise InvalidEntry(f"tag {tag!r} is not sanitized")
        if tag in seen:
            raise InvalidEntry(f"duplicate tag {tag!r}")
        seen.add(tag)
    keys = set()
    for key, value in entry.properties:
        if not PROPERTY_KEY_RE.fullmatch(key) or key.upper() in _RESERVED_KEYS:
            raise InvalidEntry(f"property key {key!r} not allowed")
        if key in keys:
            raise InvalidEntry(f"duplicate property {key!r}")
        keys.add(key)
        if value != value.strip() or _CONTROL_RE.search(value):
            raise InvalidEntry(f"property {key} value must be trimmed single-line text")


def canonical_string(entry: TimelineEntry) -> str:
    return FIELD_SEP.join(
        [
            entry.timestamp.render(),
            entry.summary,
            entry.link or "",
            ",".join(entry.tags),
            ",".join(f"{k}={v}" for k, v in entry.properties),
        ]
    )


def make_entry_id(entry: TimelineEntry) -> str:
    """SHA-1 hex digest of the entry's canonical content; the dedup key."""
    return hashlib.sha1(canonical_string(entry).encode("utf-8")).hexdigest()


def make_entry(
    timestamp: OrgTimestamp,
    summary: str,
    tags: Iterable[str] = (),
    link: str | None = None,
    properties: Mapping[str, str] | Iterable[tuple[str, str]] = (),
) -> TimelineEntry:
    """Build an entry, dropping duplicate tags and trimming property values."""
    ordered: list[str] = []
    for tag in tags:
        if tag not in ordered:
            ordered.append(tag)
    if isinstance(properties, Mapping):
        properties = properties.items()
    props = tuple((k, " ".join(str(v).split())) for k, v in properties)
    return TimelineEntry(timestamp, summary.strip(), tuple(ordered), link, props)


@dataclass(frozen=True)
class SourceRecord:
    """One raw unit parsed from a source, before normalization."""

    fields: Mapping[str, object]
    origin: str

    def __post_init__(self):
        if not self.origin:
            raise ValueError("SourceRecord.origin must be populated")
