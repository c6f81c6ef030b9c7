"""Text messages and call logs in the common Android XML backup layout.

``<smses><sms date="<epoch ms>" address=".." type="1|2" body=".."/></smses>``
``<calls><call date="<epoch ms>" number=".." duration="<s>" type="1|2|3"/></calls>``
"""
from __future__ import annotations

import datetime as dt
import xml.etree.ElementTree as ET

from ..model import clean_summary, make_timestamp
from .base import Draft, ParseResult, RecordError, SourceUnreadable, created

SMS_BODY_CHARS = 80
_SMS_DIRECTION = {"1": "from", "2": "to"}
_CALL_KIND = {"1": "Call from", "2": "Call to", "3": "Missed call from"}


def epoch_ms_to_local(value: str) -> dt.datetime:
    ms = int(value.strip())
    seconds, millis = divmod(ms, 1000)
    return dt.datetime.fromtimestamp(seconds).replace(microsecond=millis * 1000)


def call_range(start: dt.datetime, duration: int) -> tuple[dt.datetime, dt.datetime]:
    """Minute-truncated start and an end exactly ``duration // 60`` minutes later."""
    first = start.replace(second=0, microsecond=0)
    return first, first + dt.timedelta(minutes=duration // 60)


def parse_sms_xml(stream, kind: str, origin: str = "<xml>") -> ParseResult[Draft]:
    if kind not in ("sms", "call"):
        raise ValueError(f"kind must be 'sms' or 'call', not {kind!r}")
    try:
        root = ET.fromstring(stream)
    except (ET.ParseError, ValueError, TypeError, LookupError) as exc:
        raise SourceUnreadable(f"{origin}: not well-formed XML: {exc}") from exc
    result: ParseResult[Draft] = ParseResult()
    for n, elem in enumerate(root.iter(kind), start=1):
        where = f"{origin}:{kind}[{n}]"
        try:
            when = epoch_ms_to_local(elem.get("date", ""))
        except (ValueError, OverflowError, OSError) as exc:
            result.errors.append(RecordError("BadEpoch", f"date={elem.get('date')!r}: {exc}", where))
            continue
        typ = elem.get("type", "").strip()
        if kind == "sms":
            draft = _sms(elem, typ, when, where)
        else:
            draft = _call(elem, typ, when, where)
        if isinstance(draft, RecordError):
            result.errors.append(draft)
        else:
            result.records.append(draft)
    return result


def _sms(elem, typ: str, when: dt.datetime, where: str) -> Draft | RecordError:
    if typ not in _SMS_DIRECTION:
        return RecordError("UnknownType", f"sms type {typ!r}", where)
    address = clean_summary(elem.get("address", "")) or "(unknown)"
    body = clean_summary(elem.get("body", ""))[:SMS_BODY_CHARS].rstrip()
    text = f"SMS {_SMS_DIRECTION[typ]} {address}"
    if body:
        text += f": {body}"
    return Draft(
        make_timestamp(when.date(), when.time()),
        clean_summary(text),
        where,
        properties=(created(when),),
    )


def _call(elem, typ: str, when: dt.datetime, where: str) -> Draft | RecordError:
    if typ not in _CALL_KIND:
        return RecordError("UnknownType", f"call type {typ!r}", where)
    try:
        duration = int(elem.get("duration", "0").strip() or 0)
        if duration < 0:
            raise ValueError("negative")
    except ValueError:
        return RecordError("BadDuration", f"duration {elem.get('duration')!r}", where)
    number = clean_summary(elem.get("number", "")) or "(unknown)"
    start, end = call_range(when, duration)
    return Draft(
        make_timestamp(start.date(), start.time(), end),
        clean_summary(f"{_CALL_KIND[typ]} {number} ({duration}s)"),
        where,
        properties=(created(when), ("DURATION", str(duration))),
    )
