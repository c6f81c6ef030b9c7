"""RSS 2.0 and Atom 1.0 item reader."""
from __future__ import annotations

import datetime as dt
import email.utils
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from ..model import ChronorgError, EmptyTag, clean_summary, make_timestamp, sanitize_tag
from .base import Draft, ParseResult, RecordError, created, link_target, to_local

ATOM_NS = "http://www.w3.org/2005/Atom"


class NotAFeed(ChronorgError):
    pass


@dataclass(frozen=True)
class FeedItemRecord:
    published: dt.datetime  # naive local
    title: str
    item_link: str | None
    item_tags: tuple[str, ...]
    origin: str


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_rfc822_date(text: str) -> dt.datetime:
    when = email.utils.parsedate_to_datetime(text.strip())
    if when is None:
        raise ValueError(f"unparseable date {text!r}")
    return to_local(when)


def parse_iso8601(text: str) -> dt.datetime:
    text = text.strip()
    if not re.fullmatch(r"\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?", text):
        raise ValueError(f"not an ISO 8601 date-time: {text!r}")
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    text = re.sub(r"([+-]\d{2})(\d{2})$", r"\1:\2", text)
    text = re.sub(r"(\.\d{6})\d+", r"\1", text)
    return to_local(dt.datetime.fromisoformat(text))


def _text(elem) -> str:
    return "".join(elem.itertext()) if elem is not None else ""


def parse_feed(stream, origin: str = "<feed>") -> ParseResult[FeedItemRecord]:
    try:
        root = ET.fromstring(stream)
    except (ET.ParseError, ValueError, TypeError, LookupError) as exc:
        raise NotAFeed(f"{origin}: not well-formed XML: {exc}") from exc
    result: ParseResult[FeedItemRecord] = ParseResult()
    kind = _local(root.tag)
    if kind == "rss":
        items = [e for e in root.iter() if _local(e.tag) == "item"]
        for n, item in enumerate(items, start=1):
            _rss_item(item, f"{origin}:item[{n}]", result)
    elif kind == "feed":
        entries = [e for e in root if _local(e.tag) == "entry"]
        for n, entry in enumerate(entries, start=1):
            _atom_entry(entry, f"{origin}:entry[{n}]", result)
    else:
        raise NotAFeed(f"{origin}: root element <{kind}> is neither rss nor feed")
    return result


def _children(elem, name: str):
    return [c for c in elem if _local(c.tag) == name]


def _rss_item(item, where: str, result: ParseResult[FeedItemRecord]) -> None:
    dates = _children(item, "pubDate")
    if not dates or not _text(dates[0]).strip():
        result.errors.append(RecordError("MissingDate", "item has no pubDate", where))
        return
    try:
        when = parse_rfc822_date(_text(dates[0]))
    except (TypeError, ValueError, IndexError, OverflowError) as exc:
        result.errors.append(RecordError("BadDate", str(exc), where))
        return
    links = _children(item, "link")
    link = _text(links[0]).strip() if links else ""
    title = _text(_children(item, "title")[0]) if _children(item, "title") else ""
    tags = tuple(_text(c) for c in _children(item, "category"))
    result.records.append(FeedItemRecord(when, title, link or None, tags, where))


def _atom_entry(entry, where: str, result: ParseResult[FeedItemRecord]) -> None:
    updated = _children(entry, "updated")
    if not updated or not _text(updated[0]).strip():
        result.errors.append(RecordError("MissingDate", "entry has no updated", where))
        return
    try:
        when = parse_iso8601(_text(updated[0]))
    except (ValueError, OverflowError) as exc:
        result.errors.append(RecordError("BadDate", str(exc), where))
        return
    link = None
    for candidate in _children(entry, "link"):
        if candidate.get("rel", "alternate") == "alternate" and candidate.get("href"):
            link = candidate.get("href").strip()
            break
    title = _text(_children(entry, "title")[0]) if _children(entry, "title") else ""
    tags = tuple(c.get("term", "") for c in _children(entry, "category"))
    result.records.append(FeedItemRecord(when, title, link or None, tags, where))


def to_draft(rec: FeedItemRecord) -> Draft:
    tags = []
    for raw in rec.item_tags:
        try:
            tags.append(sanitize_tag(raw))
        except EmptyTag:
            continue
    summary = clean_summary(rec.title) or clean_summary(rec.item_link or "") or "(untitled item)"
    link = link_target(rec.item_link) if rec.item_link and clean_summary(rec.item_link) else None
    return Draft(
        make_timestamp(rec.published.date(), rec.published.time()),
        summary,
        rec.origin,
        tags=tuple(tags),
        link=link,
        properties=(created(rec.published),),
    )
