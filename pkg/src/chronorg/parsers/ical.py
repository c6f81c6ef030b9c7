"""iCalendar (RFC 5545) VEVENT reader.

Recurrences are not expanded: a recurring event yields its first occurrence
and keeps the rule text in an ``RRULE`` property.
"""
from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass

from ..model import ChronorgError, clean_summary, make_timestamp
from .base import Draft, ParseResult, RecordError, created, to_local


class NotICalendar(ChronorgError):
    pass


@dataclass(frozen=True)
class VEventRecord:
    dtstart: dt.datetime | dt.date
    dtend: dt.datetime | dt.date | None
    summary: str
    origin: str
    location: str | None = None
    uid: str | None = None
    rrule: str | None = None


_DATE_RE = re.compile(r"(\d{4})(\d{2})(\d{2})")
_DATETIME_RE = re.compile(r"(\d{4})(\d{2})(\d{2})T(\d{2})(\d{2})(\d{2})(Z?)")


def unfold(text: str) -> list[tuple[int, str]]:
    """Join continuation lines; returns (first physical line number, logical line)."""
    out: list[tuple[int, str]] = []
    for lineno, raw in enumerate(re.split(r"\r\n|\n|\r", text), start=1):
        if raw[:1] in (" ", "\t") and out:
            first, prev = out[-1]
            out[-1] = (first, prev + raw[1:])
        elif raw:
            out.append((lineno, raw))
    return out


def split_content_line(line: str) -> tuple[str, dict[str, str], str]:
    """``NAME;PARAM=v;P2="q:v":value`` -> (NAME, params, value)."""
    i, n = 0, len(line)
    while i < n and line[i] not in ";:":
        i += 1
    name = line[:i].upper()
    params: dict[str, str] = {}
    while i < n and line[i] == ";":
        j = i + 1
        while j < n and line[j] not in "=;:":
            j += 1
        key = line[i + 1:j].upper()
        value = ""
        if j < n and line[j] == "=":
            j += 1
            if j < n and line[j] == '"':
                end = line.find('"', j + 1)
                if end < 0:
                    raise ValueError("unterminated quoted parameter")
                value = line[j + 1:end]
                j = end + 1
            else:
                k = j
                while k < n and line[k] not in ";:":
                    k += 1
                value = line[j:k]
                j = k
        params[key] = value
        i = j
    if i >= n or line[i] != ":" or not name:
        raise ValueError(f"not a content line: {line[:40]!r}")
    return name, params, line[i + 1:]


def unescape_text(value: str) -> str:
    return re.sub(
        r"\\([\\;,nN])", lambda m: "\n" if m.group(1) in "nN" else m.group(1), value
    )


def _parse_when(value: str, params: dict[str, str]) -> dt.datetime | dt.date:
    value = value.strip()
    if params.get("VALUE", "").upper() == "DATE" or _DATE_RE.fullmatch(value):
        m = _DATE_RE.fullmatch(value)
        if not m:
            raise ValueError(f"bad DATE value {value!r}")
        return dt.date(*map(int, m.groups()))
    m = _DATETIME_RE.fullmatch(value)
    if not m:
        raise ValueError(f"bad DATE-TIME value {value!r}")
    *parts, utc = m.groups()
    instant = dt.datetime(*map(int, parts))
    if utc:
        return to_local(instant.replace(tzinfo=dt.timezone.utc))
    # floating or TZID-qualified: no zone database, taken as local
    return instant


def parse_ical(stream: str, origin: str = "<ical>") -> ParseResult[VEventRecord]:
    lines = unfold(stream)
    if not lines or lines[0][1].strip().upper() != "BEGIN:VCALENDAR":
        raise NotICalendar(f"{origin}: does not start with BEGIN:VCALENDAR")

    result: ParseResult[VEventRecord] = ParseResult()
    event: dict[str, tuple[dict[str, str], str]] | None = None
    event_line = 0
    depth = 0  # components nested inside the current VEVENT (VALARM ...)
    for lineno, line in lines:
        try:
            name, params, value = split_content_line(line)
        except ValueError as exc:
            if event is not None:
                result.errors.append(RecordError("BadContentLine", str(exc), f"{origin}:{lineno}"))
                event = None
            continue
        upper = value.strip().upper()
        if name == "BEGIN" and upper == "VEVENT" and event is None:
            event, event_line, depth = {}, lineno, 0
        elif event is None:
            continue
        elif name == "BEGIN":
            depth += 1
        elif name == "END" and depth:
            depth -= 1
        elif name == "END" and upper == "VEVENT":
            _finish_event(event, f"{origin}:{event_line}", result)
            event = None
        elif depth == 0 and name not in event:
            event[name] = (params, value)
    if event is not None:
        result.errors.append(
            RecordError("UnterminatedEvent", "VEVENT lacks END:VEVENT", f"{origin}:{event_line}")
        )
    return result


def _finish_event(props, where: str, result: ParseResult[VEventRecord]) -> None:
    if "DTSTART" not in props:
        result.errors.append(RecordError("MissingDtstart", "VEVENT has no DTSTART", where))
        return
    try:
        start = _parse_when(props["DTSTART"][1], props["DTSTART"][0])
        end = _parse_when(props["DTEND"][1], props["DTEND"][0]) if "DTEND" in props else None
    except ValueError as exc:
        result.errors.append(RecordError("BadDate", str(exc), where))
        return
    if end is not None and isinstance(start, dt.datetime) != isinstance(end, dt.datetime):
        result.errors.append(RecordError("BadDate", "DTSTART and DTEND differ in value type", where))
        return
    if end is not None and end < start:
        result.errors.append(RecordError("InvertedRange", "DTEND precedes DTSTART", where))
        return

    def text(key):
        return unescape_text(props[key][1]) if key in props else None

    result.records.append(
        VEventRecord(
            dtstart=start,
            dtend=end,
            summary=text("SUMMARY") or "",
            origin=where,
            location=text("LOCATION"),
            uid=props["UID"][1].strip() if "UID" in props else None,
            rrule=props["RRULE"][1].strip() if "RRULE" in props else None,
        )
    )


def to_draft(rec: VEventRecord) -> Draft:
    if isinstance(rec.dtstart, dt.datetime):
        stamp = make_timestamp(rec.dtstart.date(), rec.dtstart.time(), rec.dtend)
        props = [created(rec.dtstart)]
    else:
        end = None
        if rec.dtend is not None:
            # DTEND of an all-day event is exclusive
            last = rec.dtend - dt.timedelta(days=1)
            end = last if last > rec.dtstart else None
        stamp = make_timestamp(rec.dtstart, None, end)
        props = []
    if rec.location and clean_summary(rec.location):
        props.append(("LOCATION", clean_summary(rec.location)))
    if rec.rrule:
        props.append(("RRULE", rec.rrule))
    if rec.uid:
        props.append(("UID", rec.uid))
    return Draft(stamp, clean_summary(rec.summary) or "(untitled event)", rec.origin, properties=tuple(props))
