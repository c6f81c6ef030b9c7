"""Writer and reader for the Org files this tool generates.

Only the generated subset is understood: two preamble comments, a single
level-1 source heading and level-2 entries, each with a property drawer.
"""
from __future__ import annotations

import datetime as dt
import enum
import os
import re
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from filelock import FileLock, Timeout

from . import __version__
from .model import (
    STAMP_RE,
    ChronorgError,
    TimelineEntry,
    TimestampError,
    clean_summary,
    make_entry,
    make_timestamp,
    parse_timestamp,
    sanitize_tag,
)

PREAMBLE = (
    "## -*- coding: utf-8 mode: org -*-\n"
    "## this file is generated by chronorg — changes will be overwritten\n"
)
TAG_COLUMN = 60
DRAWER_INDENT = "   "
LOCK_TIMEOUT = 60.0

_L1_RE = re.compile(r"\* Memacs for (.+?)\s+:Memacs:([A-Za-z0-9_@]+):")
_L2_RE = re.compile(
    r"\*\* (" + STAMP_RE.pattern + r") (.*?)(?:\s+(:(?:[A-Za-z0-9_@]+:)+))?"
)
_LINK_RE = re.compile(r"\[\[([^\[\]]+)\]\[(.*)\]\]")
_PROP_RE = re.compile(r"   :([A-Za-z0-9_-]+):(?: (.*))?")


class SyncMode(enum.Enum):
    OVERWRITE = "overwrite"
    APPEND = "append"

    def __str__(self):
        return self.value


class IoError(ChronorgError, OSError):
    def __init__(self, path, cause: BaseException | str):
        super().__init__(f"{path}: {cause}")
        self.path = str(path)


class OrgParseError(ChronorgError, ValueError):
    def __init__(self, message: str, line: int, path: str | None = None):
        where = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.path = path


class MalformedStamp(OrgParseError):
    pass


class MalformedDrawer(OrgParseError):
    pass


class MalformedHeading(OrgParseError):
    pass


class DuplicateId(OrgParseError):
    pass


class MalformedExisting(ChronorgError):
    def __init__(self, path, cause: OrgParseError | str):
        super().__init__(f"refusing to append to {path}: {cause}")
        self.path = str(path)
        self.cause = cause


@dataclass(frozen=True)
class OrgOutputFile:
    source_name: str
    source_tag: str
    entries: tuple[TimelineEntry, ...] = ()
    generated_by: str = field(default=f"chronorg {__version__}", compare=False)
    # 1-based heading line of each entry; filled by parse_file only
    lines: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if sanitize_tag(self.source_tag) != self.source_tag:
            raise ValueError(f"source tag {self.source_tag!r} is not sanitized")
        if not self.source_name.strip() or "\n" in self.source_name:
            raise ValueError("source name must be single-line text")
        ids = [e.id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("entries must not share an id")


@dataclass(frozen=True)
class WriteReport:
    path: str
    entries: int
    bytes: int


@dataclass(frozen=True)
class AppendReport:
    added: int
    skipped: int


def _with_tags(text: str, tags: Iterable[str]) -> str:
    tags = list(tags)
    if not tags:
        return text
    block = ":" + ":".join(tags) + ":"
    if len(text) < TAG_COLUMN:
        return text.ljust(TAG_COLUMN) + block
    return text + " " + block


def serialize_heading(source_name: str, source_tag: str) -> str:
    return _with_tags(f"* Memacs for {source_name}", ["Memacs", source_tag]) + "\n"


def serialize_entry(entry: TimelineEntry) -> str:
    text = entry.summary
    if entry.link is not None:
        text = f"[[{entry.link}][{entry.summary}]]"
    lines = [
        _with_tags(f"** {entry.timestamp.render()} {text}", entry.tags),
        f"{DRAWER_INDENT}:PROPERTIES:",
    ]
    for key, value in entry.properties:
        lines.append(f"{DRAWER_INDENT}:{key}: {value}" if value else f"{DRAWER_INDENT}:{key}:")
    lines.append(f"{DRAWER_INDENT}:ID: {entry.id}")
    lines.append(f"{DRAWER_INDENT}:END:")
    return "\n".join(lines) + "\n"


def serialize_file(org: OrgOutputFile) -> str:
    parts = [PREAMBLE, serialize_heading(org.source_name, org.source_tag)]
    parts.extend(serialize_entry(e) for e in org.entries)
    return "".join(parts)


def parse_text(
    text: str, path: str | None = None, window: tuple[dt.date, dt.date] | None = None
) -> OrgOutputFile:
    """Parse a generated file.

    With ``window=(first, last)`` only entries touching that date range are
    returned; the rest are checked for structure (stamp, drawer, unique ID)
    but not validated as entries.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    source_name = source_tag = None
    generated_by = ""
    entries: list[TimelineEntry] = []
    heading_lines: list[int] = []
    seen: dict[str, int] = {}

    i = 0
    while i < len(lines):
        line = lines[i].rstrip("\r")
        lineno = i + 1
        if line.startswith("* "):
            if source_name is not None:
                raise MalformedHeading("second level-1 heading", lineno, path)
            m = _L1_RE.fullmatch(line)
            if not m:
                raise MalformedHeading(f"not a source heading: {line!r}", lineno, path)
            source_name, source_tag = m.group(1), m.group(2)
            i += 1
        elif line.startswith("** "):
            if source_name is None:
                raise MalformedHeading("entry before the source heading", lineno, path)
            entry_id, entry, i = _parse_entry(lines, i, path, window)
            if entry_id in seen:
                raise DuplicateId(
                    f"id {entry_id} already used at line {seen[entry_id]}", lineno, path
                )
            seen[entry_id] = lineno
            if entry is not None:
                entries.append(entry)
                heading_lines.append(lineno)
        else:
            if source_name is None and line.startswith("## this file is generated by "):
                generated_by = line[len("## this file is generated by "):].split(" ")[0]
            # preamble, blank lines and foreign body text are ignored
            i += 1

    if source_name is None:
        return OrgOutputFile("unknown", "unknown", (), generated_by, ())
    return OrgOutputFile(
        source_name, source_tag, tuple(entries), generated_by, tuple(heading_lines)
    )


def _parse_entry(
    lines: list[str], i: int, path: str | None, window=None
) -> tuple[str, TimelineEntry | None, int]:
    head = lines[i].rstrip("\r")
    lineno = i + 1
    m = _L2_RE.fullmatch(head)
    if not m or not STAMP_RE.fullmatch(m.group(1)):
        raise MalformedStamp(f"cannot read entry heading {head!r}", lineno, path)
    try:
        stamp = parse_timestamp(m.group(1))
    except TimestampError as exc:
        raise MalformedStamp(str(exc), lineno, path) from exc
    ngroups = STAMP_RE.groups
    text = m.group(2 + ngroups)
    tag_block = m.group(3 + ngroups)
    tags = tag_block.strip(":").split(":") if tag_block else []
    link = None
    lm = _LINK_RE.fullmatch(text)
    if lm:
        link, text = lm.group(1), lm.group(2)

    i += 1
    if i >= len(lines) or lines[i].rstrip("\r") != f"{DRAWER_INDENT}:PROPERTIES:":
        raise MalformedDrawer("entry lacks a property drawer", i + 1, path)
    i += 1
    props: list[tuple[str, str]] = []
    entry_id = None
    while True:
        if i >= len(lines):
            raise MalformedDrawer("unterminated property drawer", i, path)
        line = lines[i].rstrip("\r")
        if line == f"{DRAWER_INDENT}:END:":
            i += 1
            break
        pm = _PROP_RE.fullmatch(line)
        if not pm:
            raise MalformedDrawer(f"bad drawer line {line!r}", i + 1, path)
        key, value = pm.group(1), pm.group(2) or ""
        if key == "ID":
            if entry_id is not None or not re.fullmatch(r"[0-9a-f]{40}", value):
                raise MalformedDrawer(f"bad ID line {line!r}", i + 1, path)
            entry_id = value
        else:
            props.append((key, value))
        i += 1
    if entry_id is None:
        raise MalformedDrawer("property drawer has no ID", i, path)
    if window is not None and (stamp.end_date < window[0] or stamp.date > window[1]):
        return entry_id, None, i
    try:
        entry = TimelineEntry(stamp, text, tuple(tags), link, tuple(props), entry_id)
    except ValueError as exc:
        raise MalformedHeading(f"invalid entry: {exc}", lineno, path) from exc
    return entry_id, entry, i


def parse_file(path, window: tuple[dt.date, dt.date] | None = None) -> OrgOutputFile:
    """Read a generated Org file. Empty or preamble-less files hold no entries."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(path, exc) from exc
    return parse_text(text, str(path), window)


def _lock(path: Path) -> FileLock:
    return FileLock(str(path) + ".lock", timeout=LOCK_TIMEOUT)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.parent / f".{path.name}.{os.getpid()}.{uuid.uuid4().hex}.tmp"
    # O_EXCL + 0o666 leaves the final mode to the umask, unlike mkstemp
    fd = os.open(tmp, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o666)
    try:
        with os.fdopen(fd, "wb") as fh:
            if path.exists():
                os.chmod(tmp, path.stat().st_mode & 0o7777)
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_overwrite(path, org: OrgOutputFile) -> WriteReport:
    """Regenerate ``path`` completely; readers see either old or new content."""
    path = Path(path)
    data = serialize_file(org).encode("utf-8")
    try:
        with _lock(path):
            _atomic_write(path, data)
    except Timeout as exc:
        raise IoError(path, f"output is locked by another run ({exc.lock_file})") from exc
    except OSError as exc:
        raise IoError(path, exc) from exc
    return WriteReport(str(path), len(org.entries), len(data))


def sync_append(
    path, new_entries: Iterable[TimelineEntry], source_name: str = "", source_tag: str = ""
) -> AppendReport:
    """Append entries whose id is not yet in ``path``; existing bytes stay put.

    ``source_name``/``source_tag`` are only used to create a missing file.
    """
    path = Path(path)
    new_entries = list(new_entries)
    try:
        with _lock(path):
            existing = path.read_bytes() if path.exists() else b""
            if not existing:
                fresh = dedup_entries(new_entries, set())
                org = OrgOutputFile(
                    source_name or "unknown", source_tag or "unknown", tuple(fresh)
                )
                _atomic_write(path, serialize_file(org).encode("utf-8"))
                return AppendReport(len(fresh), len(new_entries) - len(fresh))
            try:
                parsed = parse_text(existing.decode("utf-8"), str(path))
            except UnicodeDecodeError as exc:
                raise MalformedExisting(path, str(exc)) from exc
            except OrgParseError as exc:
                raise MalformedExisting(path, exc) from exc
            if not existing.endswith(b"\n"):
                raise MalformedExisting(path, "file does not end with a newline")
            if not any(_L1_RE.fullmatch(ln) for ln in existing.decode("utf-8").split("\n")):
                raise MalformedExisting(path, "no source heading")
            fresh = dedup_entries(new_entries, {e.id for e in parsed.entries})
            if fresh:
                with open(path, "ab") as fh:
                    fh.write("".join(serialize_entry(e) for e in fresh).encode("utf-8"))
                    fh.flush()
                    os.fsync(fh.fileno())
    except Timeout as exc:
        raise IoError(path, f"output is locked by another run ({exc.lock_file})") from exc
    except OSError as exc:
        raise IoError(path, exc) from exc
    return AppendReport(len(fresh), len(new_entries) - len(fresh))


def dedup_entries(entries: Iterable[TimelineEntry], known: Iterable[str] = ()) -> list[TimelineEntry]:
    """Keep the first entry per id, dropping ids already in ``known``."""
    known = set(known)
    fresh = []
    for entry in entries:
        if entry.id not in known:
            known.add(entry.id)
            fresh.append(entry)
    return fresh


def make_error_entry(message: str, origin: str, now: dt.datetime | None = None) -> TimelineEntry:
    """An entry that surfaces a per-record problem on the run day's agenda."""
    if not message.strip():
        raise ValueError("error message must not be empty")
    now = now or dt.datetime.now()
    return make_entry(
        make_timestamp(now.date(), now.time()),
        clean_summary(f"Memacs error: {message}"),
        tags=["Memacs", "error"],
        properties=[("ORIGIN", " ".join(origin.split()))],
    )
