"""Minimal INI-like configuration: ``[connector]`` sections of ``key = value``.

Values are verbatim strings. Full-line ``#`` comments and blank lines are
skipped. Unknown sections or keys and duplicate keys are errors.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import ChronorgError


class ConfigError(ChronorgError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ConfigSyntaxError(ConfigError):
    pass


class UnknownSection(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class DuplicateKey(ConfigError):
    pass


COMMON_KEYS = ("output", "mode", "tags")
SOURCE_KEYS = {
    "filenames": ("root", "ignore"),
    "exif": ("root", "ignore"),
    "csv": (
        "input",
        "delimiter",
        "timestamp_column",
        "timestamp_format",
        "summary_columns",
        "tag_columns",
        "has_header",
    ),
    "ical": ("input",),
    "mail": ("input",),
    "rss": ("input",),
    "gitlog": ("input",),
    "sms": ("input",),
    "calls": ("input",),
}

_SECTION = re.compile(r"\[\s*([A-Za-z0-9_-]+)\s*\]")
_PAIR = re.compile(r"([A-Za-z0-9_]+)\s*=\s?(.*)")


def allowed_keys(section: str) -> tuple[str, ...]:
    return COMMON_KEYS + SOURCE_KEYS[section]


@dataclass
class AppConfig:
    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    def section(self, name: str) -> dict[str, str]:
        return self.sections.get(name, {})

    def outputs(self) -> list[str]:
        return [s["output"] for s in self.sections.values() if s.get("output")]


def parse_config(stream: str) -> AppConfig:
    config = AppConfig()
    current: dict[str, str] | None = None
    current_name = ""
    for lineno, raw in enumerate(stream.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION.fullmatch(line)
        if m:
            current_name = m.group(1)
            if current_name not in SOURCE_KEYS:
                raise UnknownSection(f"unknown section [{current_name}]", lineno)
            if current_name in config.sections:
                raise DuplicateKey(f"section [{current_name}] defined twice", lineno)
            current = config.sections.setdefault(current_name, {})
            continue
        m = _PAIR.fullmatch(line)
        if not m:
            raise ConfigSyntaxError(f"expected 'key = value' or '[section]', got {raw!r}", lineno)
        if current is None:
            raise ConfigSyntaxError("key outside of any section", lineno)
        key, value = m.group(1), m.group(2).strip()
        if key not in allowed_keys(current_name):
            raise UnknownKey(f"unknown key {key!r} in [{current_name}]", lineno)
        if key in current:
            raise DuplicateKey(f"duplicate key {key!r} in [{current_name}]", lineno)
        current[key] = value
    return config


def load_config(path) -> AppConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
