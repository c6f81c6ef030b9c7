"""Command-line entry point: one subcommand per connector, plus agenda and check.

Exit status: 0 success, 1 finished with per-record (or per-file) problems,
2 usage error or whole-source failure.
"""
from __future__ import annotations

import argparse
import datetime as dt
import logging
import os
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

from . import __version__
from .agenda import AgendaQuery, NoFilesMatched, collect, expand_files, render, render_sparse, sparse_match
from .config import SOURCE_KEYS, AppConfig, ConfigError, allowed_keys, load_config
from .connectors import CONNECTORS, UnsupportedMode, run_connector
from .model import ChronorgError, EmptyTag
from .orgfile import PREAMBLE, IoError, MalformedExisting, OrgParseError, parse_file
from .parsers.base import SourceUnreadable
from .parsers.csvsource import CsvMapping

EXIT_OK, EXIT_RECORD_ERRORS, EXIT_FAILURE = 0, 1, 2
CONFIG_ENV = "CHRONORG_CONFIG"

log = logging.getLogger("chronorg")


class UsageError(ChronorgError):
    pass


def _split(value: str) -> list[str]:
    return [p.strip() for p in value.split(",") if p.strip()]


def _int(value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"expected an integer, got {value!r}") from None


def _intlist(value: str) -> list[int]:
    return [_int(p) for p in _split(value)]


def _bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {value!r}")


@dataclass(frozen=True)
class Option:
    key: str
    flag: str
    from_config: Callable[[str], object]
    from_flag: Callable[[object], object] = lambda v: v
    multiple: bool = False
    help: str = ""


OPTIONS: dict[str, Option] = {
    o.key: o
    for o in [
        Option("output", "--output", str, help="Org file to write"),
        Option("mode", "--mode", str, help="overwrite or append"),
        Option("tags", "--tag", _split, multiple=True, help="extra tag for every entry (repeatable)"),
        Option("root", "--root", _split, multiple=True, help="directory to scan (repeatable)"),
        Option("ignore", "--ignore", _split, multiple=True, help="shell glob to skip (repeatable)"),
        Option("input", "--input", _split, multiple=True, help="source file, maildir or '-' (repeatable)"),
        Option("delimiter", "--delimiter", str, help="CSV field delimiter"),
        Option("timestamp_column", "--timestamp-column", _int, _int, help="0-based column"),
        Option("timestamp_format", "--timestamp-format", str, help="strptime pattern"),
        Option("summary_columns", "--summary-columns", _intlist, _intlist, help="e.g. 1,2"),
        Option("tag_columns", "--tag-columns", _intlist, _intlist, help="e.g. 3"),
        Option("has_header", "--has-header", _bool, help="skip the first row"),
    ]
}


def resolve_options(connector: str, flags: dict[str, object], section: dict[str, str]) -> dict[str, object]:
    """Merge command-line flags over config values; a flag that was given always wins."""
    resolved: dict[str, object] = {}
    for key in allowed_keys(connector):
        option = OPTIONS[key]
        value = flags.get(key)
        if value is not None:
            resolved[key] = option.from_flag(value)
        elif key in section:
            resolved[key] = option.from_config(section[key])
    return resolved


def _csv_mapping(opts: dict[str, object]) -> CsvMapping:
    missing = [k for k in ("timestamp_column", "timestamp_format", "summary_columns") if k not in opts]
    if missing:
        raise UsageError("csv needs " + ", ".join("--" + k.replace("_", "-") for k in missing))
    delimiter = opts.get("delimiter", ",")
    if delimiter == "\\t":
        delimiter = "\t"
    try:
        return CsvMapping(
            timestamp_column=opts["timestamp_column"],
            timestamp_format=opts["timestamp_format"],
            summary_columns=tuple(opts["summary_columns"]),
            tag_columns=tuple(opts.get("tag_columns", ())),
            delimiter=delimiter,
            has_header=bool(opts.get("has_header", False)),
        )
    except ValueError as exc:
        raise UsageError(f"bad csv mapping: {exc}") from None


def _add_connector_parser(sub, name: str) -> None:
    p = sub.add_parser(name, help=f"transcribe {name} metadata into an Org file")
    p.add_argument("--config", default=argparse.SUPPRESS, help="configuration file")
    for key in allowed_keys(name):
        option = OPTIONS[key]
        if key == "has_header":
            p.add_argument(option.flag, dest=key, action=argparse.BooleanOptionalAction, default=None)
        elif key == "mode":
            p.add_argument(option.flag, dest=key, choices=["overwrite", "append"], help=option.help)
        elif option.multiple:
            p.add_argument(option.flag, dest=key, action="append", help=option.help)
        else:
            p.add_argument(option.flag, dest=key, help=option.help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chronorg",
        description="Transcribe time-stamped metadata into Org-mode files and view them as an agenda.",
    )
    parser.add_argument("--config", default=None, help=f"configuration file (default: ${CONFIG_ENV})")
    parser.add_argument("-q", "--quiet", action="store_true", help="only report failures")
    parser.add_argument("--version", action="version", version=f"chronorg {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in SOURCE_KEYS:
        _add_connector_parser(sub, name)

    ag = sub.add_parser("agenda", help="show a day or date range across Org files")
    ag.add_argument("--config", default=argparse.SUPPRESS)
    ag.add_argument("--files", action="append", help="Org file or glob (repeatable)")
    ag.add_argument("--day", help="YYYY-MM-DD")
    ag.add_argument("--from", dest="start", help="first day YYYY-MM-DD")
    ag.add_argument("--to", dest="end", help="last day YYYY-MM-DD")
    ag.add_argument("--tag", help="tag expression, e.g. 'software & -error'")
    ag.add_argument("--match", help="case-insensitive summary substring")
    ag.add_argument("--sparse", action="store_true", help="list every match regardless of date")

    ck = sub.add_parser("check", help="verify the integrity of generated Org files")
    ck.add_argument("--config", default=argparse.SUPPRESS)
    ck.add_argument("--files", action="append", help="Org file or glob (repeatable)")
    return parser


def _date(text: str, flag: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise UsageError(f"{flag} expects YYYY-MM-DD, got {text!r}") from None


def _load_config(args, config: AppConfig | None) -> AppConfig:
    if config is not None:
        return config
    path = args.config or os.environ.get(CONFIG_ENV)
    return load_config(path) if path else AppConfig()


def _run_connector_command(args, config: AppConfig) -> int:
    name = args.command
    flags = {key: getattr(args, key, None) for key in allowed_keys(name)}
    opts = resolve_options(name, flags, config.section(name))
    if not opts.get("output"):
        raise UsageError(f"{name} needs --output (or 'output' in [{name}])")
    source_key = "root" if "root" in SOURCE_KEYS[name] else "input"
    sources = opts.get(source_key)
    if not sources:
        raise UsageError(f"{name} needs --{source_key} (or '{source_key}' in [{name}])")
    options: dict[str, object] = {"ignore": opts.get("ignore", [])}
    if name == "csv":
        options["mapping"] = _csv_mapping(opts)
    try:
        tags = opts.get("tags", [])
        report = run_connector(
            CONNECTORS[name], sources, opts.get("mode"), opts["output"], tags, options
        )
    except EmptyTag as exc:
        raise UsageError(str(exc)) from None
    if not args.quiet:
        print(report.summary(), file=sys.stderr)
    return EXIT_RECORD_ERRORS if report.errors else EXIT_OK


def _files(args, config: AppConfig) -> list[str]:
    files = args.files or config.outputs()
    if not files:
        raise UsageError("no --files given and no outputs configured")
    return files


def _run_agenda(args, config: AppConfig) -> int:
    files = _files(args, config)
    if args.sparse:
        if args.match is None and args.tag is None:
            raise UsageError("--sparse needs --match and/or --tag")
        errors: list[ChronorgError] = []
        matches = sparse_match(files, args.match, args.tag, errors=errors)
        sys.stdout.write(render_sparse(matches))
    else:
        if args.day and (args.start or args.end):
            raise UsageError("--day cannot be combined with --from/--to")
        if args.day:
            start = end = _date(args.day, "--day")
        elif args.start or args.end:
            start = _date(args.start or args.end, "--from")
            end = _date(args.end or args.start, "--to")
        else:
            start = end = dt.date.today()
        try:
            query = AgendaQuery(tuple(files), start, end, args.tag, args.match)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        view = collect(query)
        errors = view.errors
        sys.stdout.write(render(view))
    for exc in errors:
        print(f"chronorg: {exc}", file=sys.stderr)
    return EXIT_RECORD_ERRORS if errors else EXIT_OK


def check_file(path: str) -> list[str]:
    """Integrity problems of one generated file; empty when it is sound."""
    problems = []
    try:
        org = parse_file(path)
    except (OrgParseError, IoError) as exc:
        return [str(exc)]
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(PREAMBLE.encode("utf-8")):
        problems.append(f"{path}: preamble missing or altered")
    if b"\r" in data:
        problems.append(f"{path}: contains CR line endings")
    if data and not data.endswith(b"\n"):
        problems.append(f"{path}: no trailing newline")
    for entry, line in zip(org.entries, org.lines):
        if not entry.content_matches_id():
            problems.append(f"{path}:{line}: ID does not match the entry content")
    return problems


def _run_check(args, config: AppConfig) -> int:
    problems = []
    paths = expand_files(_files(args, config))
    for path in paths:
        found = check_file(path)
        problems.extend(found)
        if not found and not args.quiet:
            print(f"{path}: ok ({len(parse_file(path).entries)} entries)", file=sys.stderr)
    for problem in problems:
        print(f"chronorg: {problem}", file=sys.stderr)
    return EXIT_RECORD_ERRORS if problems else EXIT_OK


def dispatch(argv: Sequence[str], config: AppConfig | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_FAILURE
    try:
        config = _load_config(args, config)
        if args.command == "agenda":
            return _run_agenda(args, config)
        if args.command == "check":
            return _run_check(args, config)
        return _run_connector_command(args, config)
    except (
        UsageError, ConfigError, UnsupportedMode, NoFilesMatched,
        SourceUnreadable, MalformedExisting, IoError,
    ) as exc:
        print(f"chronorg {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main(argv: Sequence[str] | None = None) -> None:
    logging.basicConfig(level=logging.WARNING, format="chronorg: %(message)s")
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))
