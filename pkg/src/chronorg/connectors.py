"""Connector lifecycle: read a source, normalize records, sync the Org file.

Bad records never abort a run; each one becomes an error entry in the same
output file so it shows up on the agenda of the run day.
"""
from __future__ import annotations

import datetime as dt
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .model import ChronorgError, InvalidEntry, TimelineEntry, make_entry, sanitize_tag
from .orgfile import (
    OrgOutputFile,
    SyncMode,
    dedup_entries,
    make_error_entry,
    sync_append,
    write_overwrite,
)
from .parsers import android, csvsource, exif, feeds, filenames, gitlog, ical, mail
from .parsers.base import Draft, RecordError, SourceUnreadable

log = logging.getLogger(__name__)

Reader = Callable[[Sequence[str], Mapping[str, object]], Iterable["Draft | RecordError"]]


class UnsupportedMode(ChronorgError, ValueError):
    pass


@dataclass(frozen=True)
class ConnectorSpec:
    name: str
    default_tag: str
    supported_modes: frozenset
    default_mode: SyncMode
    read: Reader

    def __post_init__(self):
        if not self.supported_modes:
            raise ValueError("a connector must support at least one mode")
        if self.default_mode not in self.supported_modes:
            raise ValueError(f"{self.name}: default mode {self.default_mode} is not supported")
        sanitize_tag(self.default_tag)


@dataclass(frozen=True)
class RunReport:
    connector: str
    output: str
    mode: SyncMode
    records_seen: int
    entries_emitted: int
    errors: int
    added: int
    skipped: int
    duration: float

    def summary(self) -> str:
        return (
            f"{self.connector}: {self.records_seen} records, {self.entries_emitted} entries "
            f"({self.errors} errors), {self.added} added, {self.skipped} skipped, "
            f"{self.mode} -> {self.output} in {self.duration:.3f}s"
        )


def select_mode(spec: ConnectorSpec, requested: SyncMode | str | None = None) -> SyncMode:
    if requested is None:
        return spec.default_mode
    try:
        mode = SyncMode(requested) if isinstance(requested, str) else requested
    except ValueError:
        mode = None
    if mode not in spec.supported_modes:
        supported = ", ".join(sorted(m.value for m in spec.supported_modes))
        raise UnsupportedMode(f"{spec.name} does not support mode {requested!r} (supported: {supported})")
    return mode


def _read_bytes(source: str) -> bytes:
    try:
        if source == "-":
            return sys.stdin.buffer.read()
        return Path(source).read_bytes()
    except OSError as exc:
        raise SourceUnreadable(f"{source}: {exc.strerror or exc}") from exc


def _read_text(source: str) -> str:
    data = _read_bytes(source)
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise SourceUnreadable(f"{source}: not UTF-8 text ({exc})") from exc


def _records_to_drafts(parsed, to_draft) -> Iterator[Draft | RecordError]:
    for record in parsed.records:
        try:
            yield to_draft(record)
        except ChronorgError as exc:
            yield RecordError(type(exc).__name__, str(exc), record.origin)
    yield from parsed.errors


def _read_filenames(sources, options):
    ignore = options.get("ignore") or ()
    for root in sources:
        yield from _records_to_drafts(filenames.scan_tree(root, ignore), filenames.to_draft)


def _jpeg_paths(root: str, ignore) -> list[str]:
    if os.path.isfile(root):
        return [root]
    if not os.path.isdir(root):
        raise SourceUnreadable(f"{root}: no such file or directory")
    found = []
    for dirpath, dirnames, names in os.walk(root):
        dirnames.sort()
        for name in names:
            if name.lower().endswith((".jpg", ".jpeg")) and not filenames.is_ignored(
                os.path.relpath(os.path.join(dirpath, name), root), name, ignore
            ):
                found.append(os.path.join(dirpath, name))
    return sorted(found)


def _read_exif(sources, options):
    ignore = options.get("ignore") or ()
    for root in sources:
        for path in _jpeg_paths(root, ignore):
            try:
                yield exif.to_draft(exif.parse_exif_datetime(path))
            except exif.ExifError as exc:
                yield RecordError(type(exc).__name__, str(exc), path)


def _read_csv(sources, options):
    mapping = options.get("mapping")
    if not isinstance(mapping, csvsource.CsvMapping):
        raise SourceUnreadable("csv connector needs a column mapping")
    for source in sources:
        parsed = csvsource.parse_csv(_read_text(source), mapping, source)
        yield from parsed.records
        yield from parsed.errors


def _read_ical(sources, options):
    for source in sources:
        yield from _records_to_drafts(ical.parse_ical(_read_text(source), source), ical.to_draft)


def _read_mail(sources, options):
    for source in sources:
        yield from _records_to_drafts(mail.parse_messages(source), mail.to_draft)


def _read_rss(sources, options):
    for source in sources:
        yield from _records_to_drafts(feeds.parse_feed(_read_bytes(source), source), feeds.to_draft)


def _read_gitlog(sources, options):
    for source in sources:
        yield from _records_to_drafts(gitlog.parse_git_log(_read_text(source), source), gitlog.to_draft)


def _android_reader(kind: str) -> Reader:
    def read(sources, options):
        for source in sources:
            parsed = android.parse_sms_xml(_read_bytes(source), kind, source)
            yield from parsed.records
            yield from parsed.errors

    return read


BOTH = frozenset({SyncMode.OVERWRITE, SyncMode.APPEND})
OVERWRITE_ONLY = frozenset({SyncMode.OVERWRITE})

CONNECTORS: dict[str, ConnectorSpec] = {
    spec.name: spec
    for spec in [
        ConnectorSpec("filenames", "filedatestamps", OVERWRITE_ONLY, SyncMode.OVERWRITE, _read_filenames),
        ConnectorSpec("csv", "csv", BOTH, SyncMode.OVERWRITE, _read_csv),
        ConnectorSpec("ical", "calendar", BOTH, SyncMode.OVERWRITE, _read_ical),
        ConnectorSpec("mail", "email", BOTH, SyncMode.OVERWRITE, _read_mail),
        ConnectorSpec("rss", "rss", BOTH, SyncMode.APPEND, _read_rss),
        ConnectorSpec("gitlog", "git", BOTH, SyncMode.OVERWRITE, _read_gitlog),
        ConnectorSpec("exif", "exif", BOTH, SyncMode.OVERWRITE, _read_exif),
        ConnectorSpec("sms", "sms", BOTH, SyncMode.OVERWRITE, _android_reader("sms")),
        ConnectorSpec("calls", "phonecalls", BOTH, SyncMode.OVERWRITE, _android_reader("call")),
    ]
}


def run_connector(
    spec: ConnectorSpec,
    source: str | Sequence[str],
    mode: SyncMode | str | None,
    output,
    extra_tags: Iterable[str] = (),
    options: Mapping[str, object] | None = None,
    now: dt.datetime | None = None,
) -> RunReport:
    """Run one connector end to end and sync its output file."""
    started = time.perf_counter()
    mode = select_mode(spec, mode)
    sources = [source] if isinstance(source, (str, os.PathLike)) else list(source)
    sources = [str(s) for s in sources]
    if not sources:
        raise SourceUnreadable(f"{spec.name}: no source given")
    extra = [sanitize_tag(t) for t in extra_tags]
    now = now or dt.datetime.now()

    try:
        items = list(spec.read(sources, options or {}))
    except SourceUnreadable:
        raise
    except (ChronorgError, OSError) as exc:
        raise SourceUnreadable(f"{spec.name}: {exc}") from exc

    entries: list[TimelineEntry] = []
    seen = errors = 0
    for item in items:
        if isinstance(item, RecordError):
            errors += 1
            seen += item.record_failed
            log.warning("%s: %s", spec.name, item)
            entries.append(make_error_entry(f"{item.kind}: {item.message}", item.origin, now))
            continue
        seen += 1
        tags = list(item.tags) + [t for t in extra if t not in item.tags]
        try:
            entries.append(make_entry(item.timestamp, item.summary, tags, item.link, item.properties))
        except InvalidEntry as exc:
            errors += 1
            log.warning("%s: invalid entry at %s: %s", spec.name, item.origin, exc)
            entries.append(make_error_entry(f"InvalidEntry: {exc}", item.origin, now))

    if mode is SyncMode.APPEND:
        report = sync_append(output, entries, spec.name, spec.default_tag)
        added, skipped = report.added, report.skipped
    else:
        unique = dedup_entries(entries)
        write_overwrite(output, OrgOutputFile(spec.name, spec.default_tag, tuple(unique)))
        added, skipped = len(unique), len(entries) - len(unique)

    return RunReport(
        spec.name, str(output), mode, seen, len(entries), errors, added, skipped,
        time.perf_counter() - started,
    )
