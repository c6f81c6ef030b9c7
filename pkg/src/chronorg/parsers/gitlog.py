"""Reader for ``git log --pretty=format:%H%x1f%an%x1f%aI%x1f%s`` dumps."""
from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass

from ..model import clean_summary, make_timestamp
from .base import Draft, ParseResult, RecordError, created, to_local

PRETTY_FORMAT = "%H%x1f%an%x1f%aI%x1f%s"
_HASH = re.compile(r"[0-9a-f]{40}")


@dataclass(frozen=True)
class GitCommitRecord:
    hash: str
    author: str
    date: dt.datetime  # naive local
    subject: str
    origin: str


def parse_git_log(stream: str, origin: str = "<git>") -> ParseResult[GitCommitRecord]:
    result: ParseResult[GitCommitRecord] = ParseResult()
    for lineno, line in enumerate(stream.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{origin}:{lineno}"
        fields = line.split("\x1f")
        if len(fields) != 4:
            result.errors.append(RecordError("FieldCount", f"{len(fields)} fields, need 4", where))
            continue
        commit, author, when, subject = fields
        commit = commit.strip().lower()
        if not _HASH.fullmatch(commit):
            result.errors.append(RecordError("BadHash", f"{commit[:50]!r} is not a commit id", where))
            continue
        try:
            date = dt.datetime.fromisoformat(when.strip().replace("Z", "+00:00"))
        except ValueError as exc:
            result.errors.append(RecordError("BadDate", str(exc), where))
            continue
        result.records.append(GitCommitRecord(commit, author.strip(), to_local(date), subject, where))
    return result


def to_draft(rec: GitCommitRecord) -> Draft:
    author = clean_summary(rec.author) or "(unknown author)"
    subject = clean_summary(rec.subject) or "(no subject)"
    return Draft(
        make_timestamp(rec.date.date(), rec.date.time()),
        clean_summary(f"{author}: {subject}"),
        rec.origin,
        link=f"commit:{rec.hash}",
        properties=(("COMMIT", rec.hash), created(rec.date)),
    )
