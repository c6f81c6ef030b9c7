"""ISO 8601 date-stamps at the start of file names.

Accepted prefixes: ``YYYY-MM-DD``, ``YYYY-MM-DDTHH.MM`` and
``YYYY-MM-DDTHH.MM.SS``; the stamp must not be followed by another digit.
"""
from __future__ import annotations

import datetime as dt
import fnmatch
import os
import re
from dataclasses import dataclass
from pathlib import Path

from ..model import OrgTimestamp, clean_summary, make_timestamp
from .base import Draft, ParseResult, RecordError, SourceUnreadable, created, link_target

_DATE = re.compile(r"([0-9]{4})-([0-9]{2})-([0-9]{2})")
_TIME = re.compile(r"T([0-9]{2})\.([0-9]{2})(?:\.([0-9]{2}))?(?![0-9])")


@dataclass(frozen=True)
class FilenameStampRecord:
    path: str
    stamp: OrgTimestamp
    seconds: dt.datetime | None = None  # full instant when the name carries seconds

    @property
    def origin(self) -> str:
        return self.path


def _match(basename: str) -> tuple[OrgTimestamp, dt.datetime | None] | None:
    m = _DATE.match(basename)
    if not m:
        return None
    rest = basename[m.end():]
    hh = mm = ss = None
    if rest.startswith("T"):
        t = _TIME.match(rest)
        if not t:
            return None  # e.g. the colon form 15:29
        hh, mm, ss = t.groups()
    elif rest and rest[0] in "0123456789":
        return None
    try:
        day = dt.date(*map(int, m.groups()))
        if hh is None:
            return make_timestamp(day), None
        clock = dt.time(int(hh), int(mm), int(ss or 0))
    except ValueError:
        return None
    full = dt.datetime.combine(day, clock) if ss is not None else None
    return make_timestamp(day, clock), full


def extract_filename_stamp(basename: str) -> OrgTimestamp | None:
    found = _match(basename)
    return found[0] if found else None


def is_ignored(rel: str, name: str, patterns) -> bool:
    return any(fnmatch.fnmatchcase(name, p) or fnmatch.fnmatchcase(rel, p) for p in patterns)


def scan_tree(root, ignore_patterns=()) -> ParseResult[FilenameStampRecord]:
    """Walk ``root`` recursively; records come out sorted by path."""
    root = Path(root)
    if not root.is_dir():
        raise SourceUnreadable(f"{root}: not a readable directory")
    result: ParseResult[FilenameStampRecord] = ParseResult()

    def onerror(exc: OSError):
        result.errors.append(
            RecordError("PermissionDenied", exc.strerror or str(exc), exc.filename or str(root))
        )

    patterns = list(ignore_patterns)
    found = []
    for dirpath, dirnames, filenames in os.walk(root, onerror=onerror):
        if patterns:
            rel_dir = os.path.relpath(dirpath, root)
            dirnames[:] = [
                d for d in dirnames
                if not is_ignored(os.path.normpath(os.path.join(rel_dir, d)), d, patterns)
            ]
            filenames = [
                n for n in filenames
                if not is_ignored(os.path.normpath(os.path.join(rel_dir, n)), n, patterns)
            ]
        dirnames.sort()
        for name in filenames:
            hit = _match(name)
            if hit:
                found.append(FilenameStampRecord(os.path.join(dirpath, name), *hit))
    found.sort(key=lambda r: r.path)
    result.records = found
    result.errors.sort(key=lambda e: e.origin)
    return result


def to_draft(rec: FilenameStampRecord) -> Draft:
    name = os.path.basename(rec.path)
    props = (created(rec.seconds),) if rec.seconds else ()
    return Draft(
        rec.stamp,
        clean_summary(name),
        rec.path,
        link=link_target(os.path.abspath(rec.path)),
        properties=props,
    )
