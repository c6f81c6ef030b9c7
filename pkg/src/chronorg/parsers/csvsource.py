"""Generic delimited-text rows (bank statements and the like)."""
from __future__ import annotations

import csv
import datetime as dt
import io
import re
from dataclasses import dataclass

from ..model import EmptyTag, clean_summary, make_timestamp, sanitize_tag
from .base import Draft, ParseResult, RecordError, created, to_local

SUMMARY_JOIN = " — "
# strptime directives that carry a clock time
_TIME_DIRECTIVES = re.compile(r"%[HIMSpXcTRfz]")


@dataclass(frozen=True)
class CsvMapping:
    timestamp_column: int
    timestamp_format: str
    summary_columns: tuple[int, ...]
    tag_columns: tuple[int, ...] = ()
    delimiter: str = ","
    has_header: bool = False

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError("delimiter must be a single character")
        if not self.summary_columns:
            raise ValueError("at least one summary column is required")
        cols = [self.timestamp_column, *self.summary_columns, *self.tag_columns]
        if any(c < 0 for c in cols):
            raise ValueError("column indices must be non-negative")
        if len(cols) != len(set(cols)):
            raise ValueError("column indices must be distinct")
        if "%" not in self.timestamp_format:
            raise ValueError("timestamp_format needs at least one strptime directive")

    @property
    def width(self) -> int:
        return max(self.timestamp_column, *self.summary_columns, *self.tag_columns) + 1

    @property
    def timed(self) -> bool:
        return bool(_TIME_DIRECTIVES.search(self.timestamp_format))


def parse_csv(stream: str, mapping: CsvMapping, origin: str = "<csv>") -> ParseResult[Draft]:
    result: ParseResult[Draft] = ParseResult()
    reader = csv.reader(io.StringIO(stream, newline=""), delimiter=mapping.delimiter)
    header_pending = mapping.has_header
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            result.errors.append(RecordError("BadRow", str(exc), f"{origin}:{reader.line_num}"))
            continue
        if not row or all(not cell.strip() for cell in row):
            continue
        if header_pending:
            header_pending = False
            continue
        where = f"{origin}:{reader.line_num}"
        if len(row) < mapping.width:
            result.errors.append(
                RecordError("ShortRow", f"{len(row)} fields, need {mapping.width}", where)
            )
            continue
        raw = row[mapping.timestamp_column].strip()
        try:
            when = dt.datetime.strptime(raw, mapping.timestamp_format)
        except ValueError as exc:
            result.errors.append(RecordError("BadTimestamp", f"{raw!r}: {exc}", where))
            continue
        if not any(row[c].strip() for c in mapping.summary_columns):
            result.errors.append(RecordError("EmptySummary", "summary columns are empty", where))
            continue
        tags = []
        for c in mapping.tag_columns:
            try:
                tags.append(sanitize_tag(row[c]))
            except EmptyTag:
                pass
        if mapping.timed:
            when = to_local(when)
            stamp = make_timestamp(when.date(), when.time())
            props = (created(when),) if "%S" in mapping.timestamp_format else ()
        else:
            stamp, props = make_timestamp(when.date()), ()
        cells = (row[c].strip() for c in mapping.summary_columns)
        summary = clean_summary(SUMMARY_JOIN.join(c for c in cells if c))
        result.records.append(Draft(stamp, summary, where, tags=tuple(tags), properties=props))
    return result
