import datetime as dt
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronorg.parsers import android, filenames, gitlog
from chronorg.parsers.base import SourceUnreadable
from chronorg.parsers.csvsource import CsvMapping, parse_csv

from conftest import SCENARIO, FIXTURES


@pytest.mark.parametrize(
    "name, rendered",
    [
        ("2012-04-13_Document.txt", "<2012-04-13 Fri>"),
        ("2012-04-13T15.29_Image.jpeg", "<2012-04-13 Fri 15:29>"),
        ("2012-04-13T15.29.59 scan.pdf", "<2012-04-13 Fri 15:29>"),
        ("2008-09-15T14.34.jpg", "<2008-09-15 Mon 14:34>"),
        ("2012-04-13", "<2012-04-13 Fri>"),
        ("2012-04-13T15:29_Image.jpeg", None),
        ("2012-04-131_x", None),
        ("2012-02-30_x", None),
        ("2012-04-13T25.00_x", None),
        ("IMG0042.jpg", None),
        ("x_2012-04-13.txt", None),
        ("２０１２-04-13.txt", None),
    ],
)
def test_filename_stamps(name, rendered):
    stamp = filenames.extract_filename_stamp(name)
    assert (stamp.render() if stamp else None) == rendered


def test_scan_fixture_tree():
    result = filenames.scan_tree(FIXTURES / "tree")
    names = [os.path.basename(r.path) for r in result.records]
    assert names == ["2012-04-13T15.29_Image.jpeg", "2012-04-13_Document.txt"]
    drafts = [filenames.to_draft(r) for r in result.records]
    assert drafts[0].properties == ()
    assert drafts[0].link.endswith("2012-04-13T15.29_Image.jpeg")


def test_seconds_become_created(tmp_path):
    (tmp_path / "2012-04-13T15.29.07 x.txt").write_text("")
    (rec,) = filenames.scan_tree(tmp_path).records
    assert filenames.to_draft(rec).properties == (("CREATED", "2012-04-13T15:29:07"),)


def test_ignore_patterns(tmp_path):
    (tmp_path / "skip").mkdir()
    (tmp_path / "skip" / "2012-01-01 a.txt").write_text("")
    (tmp_path / "2012-01-02 b.txt").write_text("")
    (tmp_path / "2012-01-03 c.tmp").write_text("")
    result = filenames.scan_tree(tmp_path, ["skip", "*.tmp"])
    assert [os.path.basename(r.path) for r in result.records] == ["2012-01-02 b.txt"]


def test_scan_missing_root(tmp_path):
    with pytest.raises(SourceUnreadable):
        filenames.scan_tree(tmp_path / "nope")


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.dates(dt.date(2000, 1, 1), dt.date(2030, 12, 31)),
                          st.text("abc", max_size=4)), max_size=15))
def test_scan_is_stable(tmp_path_factory, files):
    root = tmp_path_factory.mktemp("tree")
    expected = set()
    for depth, day, tail in files:
        folder = root.joinpath(*[f"d{i}" for i in range(depth)])
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / f"{day.isoformat()}_{tail}.txt"
        path.write_text("")
        expected.add(str(path))
    first = filenames.scan_tree(root).records
    assert {r.path for r in first} == expected
    assert [r.path for r in first] == sorted(expected)
    assert filenames.scan_tree(root).records == first


BANK = CsvMapping(0, "%d.%m.%Y", (1, 2), tag_columns=(3,), delimiter=";", has_header=True)


def test_csv_rows():
    text = (
        "date;payee;memo;category\n"
        "15.09.2008;Book shop;tagging book;books & media\n"
        "\n"
        "16.09.2008;Cafe;;\n"
    )
    result = parse_csv(text, BANK, "bank.csv")
    assert result.errors == []
    assert [d.summary for d in result.records] == ["Book shop — tagging book", "Cafe"]
    assert result.records[0].tags == ("books_media",)
    assert result.records[0].timestamp.render() == "<2008-09-15 Mon>"
    assert result.records[1].origin == "bank.csv:4"


def test_csv_bad_rows():
    text = (
        "h;h;h;h\n"
        "15.09.2008;a;b;c\n"
        "15.09.2008;short\n"
        "31.02.2008;a;b;c\n"
        "15.09.2008;;;c\n"
    )
    result = parse_csv(text, BANK, "b.csv")
    assert len(result.records) == 1
    assert [(e.kind, e.origin) for e in result.errors] == [
        ("ShortRow", "b.csv:3"), ("BadTimestamp", "b.csv:4"), ("EmptySummary", "b.csv:5"),
    ]


def test_csv_timed_with_seconds():
    mapping = CsvMapping(0, "%Y-%m-%d %H:%M:%S", (1,))
    (draft,) = parse_csv("2008-09-15 14:34:56,photo\n", mapping).records
    assert draft.timestamp.render() == "<2008-09-15 Mon 14:34>"
    assert draft.properties == (("CREATED", "2008-09-15T14:34:56"),)
    assert mapping.timed and not BANK.timed


@pytest.mark.parametrize(
    "kwargs",
    [
        {"summary_columns": ()},
        {"summary_columns": (0,)},
        {"summary_columns": (1,), "delimiter": ";;"},
        {"summary_columns": (-1,)},
        {"summary_columns": (1,), "timestamp_format": "date"},
    ],
)
def test_csv_mapping_validation(kwargs):
    args = {"timestamp_column": 0, "timestamp_format": "%Y"} | kwargs
    with pytest.raises(ValueError):
        CsvMapping(**args)


def test_gitlog_fixture():
    result = gitlog.parse_git_log((SCENARIO / "gitlog.txt").read_text())
    assert result.errors == []
    draft = gitlog.to_draft(result.records[0])
    assert draft.summary == "John Smith: ideas about tagstore tag layer"
    assert draft.timestamp.render() == "<2008-09-15 Mon 17:38>"
    assert draft.link == "commit:4e1243bd22c66e76c2ba9eddc1f91394e57f9f83"
    assert gitlog.PRETTY_FORMAT == "%H%x1f%an%x1f%aI%x1f%s"


def test_gitlog_errors():
    good = "a" * 40
    text = "\n".join([
        f"{good}\x1fA\x1f2008-09-15T17:38:00Z\x1fok",
        "only\x1fthree\x1ffields",
        f"{'g' * 40}\x1fA\x1f2008-09-15T17:38:00Z\x1fbad hash",
        f"{good}\x1fA\x1fyesterday\x1fbad date",
    ])
    result = gitlog.parse_git_log(text, "log")
    assert [r.subject for r in result.records] == ["ok"]
    assert result.records[0].date == dt.datetime(2008, 9, 15, 19, 38)
    assert [e.kind for e in result.errors] == ["FieldCount", "BadHash", "BadDate"]


def test_sms_fixture():
    result = android.parse_sms_xml((SCENARIO / "sms.xml").read_bytes(), "sms")
    assert result.errors == []
    first = result.records[0]
    assert first.summary == "SMS to +436641234567: join the tagstore talk?"
    assert first.timestamp.render() == "<2008-09-15 Mon 13:35>"


def test_calls_fixture():
    result = android.parse_sms_xml((SCENARIO / "calls.xml").read_bytes(), "call")
    first = result.records[0]
    assert first.summary == "Call to +436641234567 (180s)"
    assert first.timestamp.render() == "<2008-09-15 Mon 17:35-17:38>"
    assert dict(first.properties)["DURATION"] == "180"


def test_android_record_errors():
    xml = (
        b'<calls><call number="1" duration="x" date="1221492900000" type="2"/>'
        b'<call number="1" duration="5" date="soon" type="2"/>'
        b'<call number="1" duration="5" date="1221492900000" type="9"/>'
        b'<call number="1" duration="5" date="1221492900000" type="3"/></calls>'
    )
    result = android.parse_sms_xml(xml, "call", "c.xml")
    assert [e.kind for e in result.errors] == ["BadDuration", "BadEpoch", "UnknownType"]
    assert result.records[0].summary == "Missed call from 1 (5s)"


def test_android_not_xml():
    with pytest.raises(SourceUnreadable):
        android.parse_sms_xml(b"<calls", "call")


def test_call_range_whole_day():
    start = dt.datetime(2008, 9, 15, 17, 35, 42)
    for duration in range(0, 86401):
        first, last = android.call_range(start, duration)
        # minute-of-day arithmetic as the independent route
        minutes = 17 * 60 + 35 + duration // 60
        day_offset, minute_of_day = divmod(minutes, 1440)
        assert first == dt.datetime(2008, 9, 15, 17, 35)
        assert (last.day - 15, last.hour, last.minute, last.second) == (
            day_offset, minute_of_day // 60, minute_of_day % 60, 0
        )


def test_android_unknown_encoding():
    with pytest.raises(SourceUnreadable):
        android.parse_sms_xml(b'<?xml version="1.0" encoding="UTF-0"?><smses/>', "sms")
