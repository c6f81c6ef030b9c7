"""Agenda views and sparse-tree search over generated Org files."""
from __future__ import annotations

import datetime as dt
import glob
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import TAG_RE, ChronorgError, TimelineEntry, derive_weekday
from .orgfile import OrgOutputFile, parse_file

MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)
TAG_COLUMN_END = 100


class NoFilesMatched(ChronorgError):
    pass


class BadTagExpression(ChronorgError, ValueError):
    pass


@dataclass(frozen=True)
class TagExpr:
    """Conjunction of required and forbidden tags: ``a & b & -c``."""

    required: tuple[str, ...] = ()
    forbidden: tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "TagExpr":
        required, forbidden = [], []
        for term in text.split("&"):
            term = term.strip()
            negated = term.startswith("-")
            name = term[1:].strip() if negated else term
            if not TAG_RE.fullmatch(name):
                raise BadTagExpression(f"bad tag term {term!r} in {text!r}")
            (forbidden if negated else required).append(name)
        return cls(tuple(required), tuple(forbidden))

    def matches(self, tags: Iterable[str]) -> bool:
        tags = set(tags)
        return all(t in tags for t in self.required) and not any(t in tags for t in self.forbidden)


@dataclass(frozen=True)
class AgendaQuery:
    file_set: tuple[str, ...]
    start: dt.date
    end: dt.date
    tag_filter: TagExpr | None = None
    text_filter: str | None = None

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"range end {self.end} precedes start {self.start}")
        if isinstance(self.tag_filter, str):
            object.__setattr__(self, "tag_filter", TagExpr.parse(self.tag_filter))
        object.__setattr__(self, "file_set", tuple(self.file_set))


@dataclass(frozen=True)
class AgendaItem:
    entry: TimelineEntry
    source_tag: str
    path: str
    line: int
    # shown on a later day than it started, so its clock time does not apply
    continued: bool = False

    @property
    def inherited_tags(self) -> tuple[str, ...]:
        return ("Memacs", self.source_tag) + self.entry.tags


def sort_key(item: AgendaItem):
    clock = None if item.continued else item.entry.timestamp.time
    # date-only (and continued) entries first, then clock time, then summary
    return (
        clock is not None,
        clock or dt.time(0),
        item.entry.summary,
        item.path,
        item.line,
    )


@dataclass
class AgendaView:
    start: dt.date
    end: dt.date
    buckets: dict[dt.date, list[AgendaItem]]
    errors: list[ChronorgError] = field(default_factory=list)

    def items(self) -> list[AgendaItem]:
        return [item for day in sorted(self.buckets) for item in self.buckets[day]]


def expand_files(file_set: Iterable[str]) -> list[str]:
    paths: list[str] = []
    for spec in file_set:
        if glob.has_magic(spec):
            paths.extend(sorted(glob.glob(os.path.expanduser(spec))))
        else:
            paths.append(os.path.expanduser(spec))
    unique = list(dict.fromkeys(paths))
    if not unique:
        raise NoFilesMatched(f"no files match {list(file_set)!r}")
    return unique


def load_files(
    file_set: Iterable[str], window: tuple[dt.date, dt.date] | None = None
) -> tuple[list[tuple[str, OrgOutputFile]], list[ChronorgError]]:
    loaded, errors = [], []
    for path in expand_files(file_set):
        try:
            loaded.append((path, parse_file(path, window)))
        except ChronorgError as exc:
            errors.append(exc)
    return loaded, errors


def _text_hit(needle: str | None, haystack: str) -> bool:
    return needle is None or needle.casefold() in haystack.casefold()


def collect(query: AgendaQuery) -> AgendaView:
    loaded, errors = load_files(query.file_set, (query.start, query.end))
    days = (query.end - query.start).days + 1
    buckets = {query.start + dt.timedelta(days=i): [] for i in range(days)}
    for path, org in loaded:
        for entry, line in zip(org.entries, org.lines):
            stamp = entry.timestamp
            if stamp.end_date < query.start or stamp.date > query.end:
                continue
            continued = stamp.date < query.start
            item = AgendaItem(entry, org.source_tag, path, line, continued)
            if query.tag_filter and not query.tag_filter.matches(item.inherited_tags):
                continue
            if not _text_hit(query.text_filter, entry.summary):
                continue
            # spans that began before the range are shown on its first day
            buckets[max(stamp.date, query.start)].append(item)
    for bucket in buckets.values():
        bucket.sort(key=sort_key)
    return AgendaView(query.start, query.end, buckets, errors)


def day_header(day: dt.date) -> str:
    """``Monday     15 September 2008``; English names regardless of locale."""
    return f"{derive_weekday(day).long:<10} {day.day:2d} {MONTHS[day.month - 1]} {day.year}"


def _time_field(item: AgendaItem) -> str:
    stamp = item.entry.timestamp
    if stamp.time is None or item.continued:
        return " " * 6
    if isinstance(stamp.end, dt.time):
        return f"{stamp.time:%H:%M}-{stamp.end:%H:%M} "
    return f"{stamp.time:%H:%M} "


def render_item(item: AgendaItem) -> str:
    line = f"  {_time_field(item)}[{item.source_tag}] {item.entry.summary}"
    if not item.entry.tags:
        return line
    block = ":" + ":".join(item.entry.tags) + ":"
    if len(line) + 1 + len(block) <= TAG_COLUMN_END:
        return line.ljust(TAG_COLUMN_END - len(block)) + block
    return f"{line} {block}"


def render(view: AgendaView) -> str:
    out = []
    for day in sorted(view.buckets):
        out.append(day_header(day))
        items = view.buckets[day]
        if items:
            out.extend(render_item(item) for item in items)
        else:
            out.append("  (no entries)")
        out.append("")
    return "\n".join(out) + "\n" if out else ""


@dataclass(frozen=True)
class SparseMatch:
    path: str
    line: int
    entry: TimelineEntry
    source_tag: str


def sparse_match(
    files: Sequence[str],
    text: str | None = None,
    tags: TagExpr | str | None = None,
    errors: list[ChronorgError] | None = None,
) -> list[SparseMatch]:
    """Every entry matching ``text`` (summary or link) and ``tags``, in file order.

    Unlike :func:`collect` there is no date range. Per-file parse errors are
    appended to ``errors`` when given, otherwise the first one is raised.
    """
    if isinstance(tags, str):
        tags = TagExpr.parse(tags)
    loaded, failures = load_files(files)
    if failures:
        if errors is None:
            raise failures[0]
        errors.extend(failures)
    matches = []
    for path, org in loaded:
        for entry, line in zip(org.entries, org.lines):
            if tags and not tags.matches(("Memacs", org.source_tag) + entry.tags):
                continue
            if text is not None and not (
                _text_hit(text, entry.summary) or _text_hit(text, entry.link or "")
            ):
                continue
            matches.append(SparseMatch(path, line, entry, org.source_tag))
    return matches


def render_sparse(matches: Sequence[SparseMatch]) -> str:
    return "".join(
        f"{m.path}:{m.line}: {m.entry.timestamp.render()} [{m.source_tag}] {m.entry.summary}\n"
        for m in matches
    )
