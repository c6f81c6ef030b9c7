import os
import time
from pathlib import Path
from xml.sax.saxutils import escape

import pytest

# Central European rules, written out so the result does not depend on tzdata
TZ_RULE = "CET-1CEST,M3.5.0,M10.5.0/3"
os.environ["TZ"] = TZ_RULE
time.tzset()

FIXTURES = Path(__file__).parent / "fixtures"
SCENARIO = FIXTURES / "scenario"
IMAGES = FIXTURES / "images"
GOLDEN = Path(__file__).parent / "golden"

SCENARIO_DAY = "2008-09-15"

# (connector, sources, output name); 8 runs make up the scenario
SCENARIO_RUNS = [
    ("ical", [SCENARIO / "calendar.ics"], "calendar.org"),
    ("sms", [SCENARIO / "sms.xml"], "sms.org"),
    ("calls", [SCENARIO / "calls.xml"], "calls.org"),
    ("rss", [SCENARIO / "twitter.xml"], "twitter.org"),
    ("rss", [SCENARIO / "delicious.xml"], "delicious.org"),
    ("mail", [SCENARIO / "maildir"], "mail.org"),
    ("gitlog", [SCENARIO / "gitlog.txt"], "git.org"),
    ("filenames", [SCENARIO / "files"], "files.org"),
]


@pytest.fixture(autouse=True)
def _pinned_tz(monkeypatch):
    monkeypatch.setenv("TZ", TZ_RULE)
    time.tzset()
    yield
    time.tzset()


def run_scenario(outdir: Path, mode=None):
    """Run the 8 scenario connectors into ``outdir``; returns the reports."""
    from chronorg.connectors import CONNECTORS, run_connector

    reports = []
    for name, sources, out in SCENARIO_RUNS:
        reports.append(
            run_connector(CONNECTORS[name], [str(s) for s in sources], mode, outdir / out)
        )
    return reports


def scenario_cli_args(outdir: Path):
    """argv lists for the same 8 runs through the command line."""
    argvs = []
    for name, sources, out in SCENARIO_RUNS:
        flag = "--root" if name == "filenames" else "--input"
        argv = [name, "--output", str(outdir / out)]
        for s in sources:
            argv += [flag, str(s)]
        argvs.append(argv)
    return argvs


def rss_feed(items) -> bytes:
    """Build an RSS 2.0 document from ``(title, link, pubdate, categories)`` tuples."""
    parts = ['<?xml version="1.0" encoding="UTF-8"?>\n<rss version="2.0"><channel><title>t</title>']
    for title, link, pubdate, cats in items:
        parts.append("<item>")
        parts.append(f"<title>{escape(title)}</title>")
        if link:
            parts.append(f"<link>{escape(link)}</link>")
        parts.append(f"<pubDate>{pubdate}</pubDate>")
        for c in cats:
            parts.append(f"<category>{escape(c)}</category>")
        parts.append("</item>")
    parts.append("</channel></rss>\n")
    return "".join(parts).encode("utf-8")


def numbered_items(indices):
    """Deterministic feed items; item ``i`` is unique in title and time."""
    items = []
    for i in indices:
        day, minute = 1 + i // 1440 % 28, i % 1440
        items.append(
            (
                f"item number {i}",
                f"http://example.org/items/{i}",
                f"{day:02d} Sep 2008 {minute // 60:02d}:{minute % 60:02d}:00 +0000",
                ["feed"],
            )
        )
    return items


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
