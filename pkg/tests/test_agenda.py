import datetime as dt
import re
import subprocess

import pytest

from chronorg.agenda import (
    AgendaQuery,
    BadTagExpression,
    NoFilesMatched,
    TagExpr,
    collect,
    day_header,
    render,
    render_sparse,
    sparse_match,
)
from chronorg.model import make_entry, make_timestamp
from chronorg.orgfile import OrgOutputFile, write_overwrite

from conftest import GOLDEN, SCENARIO_RUNS, run_scenario

DAY = dt.date(2008, 9, 15)


@pytest.fixture(scope="module")
def scenario(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario")
    run_scenario(out)
    return out


def _files(out, names=None):
    names = names or [o for _, _, o in SCENARIO_RUNS]
    return tuple(str(out / n) for n in names)


def test_golden_day(scenario):
    view = collect(AgendaQuery(_files(scenario), DAY, DAY))
    assert render(view) == (GOLDEN / "scenario_day.txt").read_text()
    assert view.errors == []


def test_metadata_only_is_eight(scenario):
    names = [o for _, _, o in SCENARIO_RUNS if o != "calendar.org"]
    view = collect(AgendaQuery(_files(scenario, names), DAY, DAY))
    times = [i.entry.timestamp.time.strftime("%H:%M") for i in view.items()]
    assert times == ["13:35", "14:34", "14:38", "15:08", "15:53", "16:17", "17:35", "17:38"]


def test_tag_filter(scenario):
    view = collect(AgendaQuery(_files(scenario), DAY, DAY, "software"))
    assert [i.entry.summary for i in view.items()] == [
        "tagstore - tag-based file management research prototype"
    ]
    view = collect(AgendaQuery(_files(scenario), DAY, DAY, "Memacs & -rss & -sms"))
    assert len(view.items()) == 6


def test_text_filter(scenario):
    view = collect(AgendaQuery(_files(scenario, ["calendar.org"]), DAY, DAY, text_filter="TAGSTORE"))
    assert [i.entry.summary for i in view.items()] == ["tagstore presentation"]


def test_empty_bucket_and_range(scenario):
    view = collect(AgendaQuery(_files(scenario), dt.date(2008, 9, 20), dt.date(2008, 9, 21)))
    assert render(view) == (
        "Saturday   20 September 2008\n  (no entries)\n\n"
        "Sunday     21 September 2008\n  (no entries)\n\n"
    )


def test_day_header_alignment():
    assert day_header(DAY) == "Monday     15 September 2008"
    assert day_header(dt.date(2008, 9, 3)) == "Wednesday   3 September 2008"


def test_range_validation():
    with pytest.raises(ValueError):
        AgendaQuery(("x",), DAY, DAY - dt.timedelta(days=1))


def test_tag_expressions():
    expr = TagExpr.parse("a & -b")
    assert expr.matches(["a"]) and not expr.matches(["a", "b"]) and not expr.matches([])
    for bad in ["", "a &", "a | b", "a & - "]:
        with pytest.raises(BadTagExpression):
            TagExpr.parse(bad)


def test_no_files(tmp_path):
    with pytest.raises(NoFilesMatched):
        collect(AgendaQuery((str(tmp_path / "*.org"),), DAY, DAY))


def test_sorting_and_spans(tmp_path):
    entries = [
        make_entry(make_timestamp(DAY, "09:00"), "b"),
        make_entry(make_timestamp(DAY, "09:00"), "a"),
        make_entry(make_timestamp(DAY), "all day"),
        make_entry(make_timestamp(DAY - dt.timedelta(days=2), "22:00", dt.datetime(2008, 9, 16, 1, 0)), "trip"),
        make_entry(make_timestamp(DAY, "08:00", "08:30"), "early", tags=["x"]),
    ]
    path = tmp_path / "f.org"
    write_overwrite(path, OrgOutputFile("t", "t", tuple(entries)))
    view = collect(AgendaQuery((str(path),), DAY, DAY + dt.timedelta(days=1)))
    assert [i.entry.summary for i in view.buckets[DAY]] == ["all day", "trip", "early", "a", "b"]
    assert view.buckets[DAY + dt.timedelta(days=1)] == []
    lines = render(view).splitlines()
    assert lines[2] == "        [t] trip"
    line = lines[3]
    assert line.startswith("  08:00-08:30 [t] early") and line.endswith(":x:") and len(line) == 100


def test_broken_file_reported_not_fatal(scenario, tmp_path):
    bad = tmp_path / "bad.org"
    bad.write_text("* Memacs for x                 :Memacs:x:\n** <2008-09-15 Tue> x\n")
    view = collect(AgendaQuery(_files(scenario) + (str(bad),), DAY, DAY))
    assert len(view.items()) == 9 and len(view.errors) == 1


def test_sparse_against_grep(scenario):
    matches = sparse_match(_files(scenario), "tagstore")
    assert len(matches) >= 5
    # grep route: heading lines containing the word, case-insensitively
    grep = subprocess.run(
        ["grep", "-n", "-i", "-H", r"^\*\* .*tagstore", *_files(scenario)],
        capture_output=True, text=True, check=True,
    ).stdout.splitlines()
    assert {(m.path, m.line) for m in matches} == {
        (g.split(":")[0], int(g.split(":")[1])) for g in grep
    }
    assert render_sparse(matches).count("\n") == len(matches)


def test_sparse_error_tag_empty(scenario):
    assert sparse_match(_files(scenario), tags="Memacs & error") == []


def test_render_sparse_line(scenario):
    (m,) = sparse_match(_files(scenario, ["git.org"]), "ideas")
    assert re.fullmatch(r".*git\.org:\d+: <2008-09-15 Mon 17:38> \[git\] John Smith: ideas about tagstore tag layer\n",
                        render_sparse([m]))
