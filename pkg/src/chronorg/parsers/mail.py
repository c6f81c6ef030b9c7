"""Header-only reader for maildir directories and mbox files (RFC 5322).

Message bodies are never parsed. Newsgroup articles saved as files work the
same way as mail.
"""
from __future__ import annotations

import base64
import binascii
import datetime as dt
import email
import email.policy
import email.utils
import mailbox
import os
import re
from dataclasses import dataclass
from pathlib import Path

from ..model import ChronorgError, clean_summary, make_timestamp
from .base import Draft, ParseResult, RecordError, SourceUnreadable, created, link_target, to_local

SUPPORTED_CHARSETS = {
    "utf-8": "utf-8",
    "utf8": "utf-8",
    "iso-8859-1": "latin-1",
    "iso8859-1": "latin-1",
    "latin1": "latin-1",
    "latin-1": "latin-1",
    "us-ascii": "ascii",
}

_ENCODED_WORD = re.compile(r"=\?([^?\s]+)\?([QqBb])\?([^?\s]*)\?=")
_BETWEEN_WORDS = re.compile(r"(=\?[^?\s]+\?[QqBb]\?[^?\s]*\?=)(?:\r?\n)?[ \t]+(?==\?)")


class UndecodableSubject(ChronorgError, ValueError):
    pass


@dataclass(frozen=True)
class MessageRecord:
    date: dt.datetime  # naive local
    sender: str
    subject: str
    origin: str
    message_id: str | None = None


def decode_rfc2047(text: str) -> str:
    """Decode encoded-words in UTF-8 or ISO-8859-1 (Q or B encoding).

    Whitespace between adjacent encoded-words is dropped, as RFC 2047 requires.
    """
    text = _BETWEEN_WORDS.sub(r"\1", text)

    def word(m: re.Match) -> str:
        charset = m.group(1).split("*", 1)[0].lower()
        codec = SUPPORTED_CHARSETS.get(charset)
        if codec is None:
            raise UndecodableSubject(f"unsupported charset {charset!r}")
        payload = m.group(3)
        try:
            if m.group(2) in "Bb":
                raw = base64.b64decode(payload + "=" * (-len(payload) % 4), validate=True)
            else:
                raw = re.sub(
                    rb"=([0-9A-Fa-f]{2})",
                    lambda h: bytes([int(h.group(1), 16)]),
                    payload.replace("_", " ").encode("ascii"),
                )
            return raw.decode(codec)
        except (binascii.Error, ValueError, UnicodeError) as exc:
            raise UndecodableSubject(f"bad encoded-word {m.group(0)!r}: {exc}") from exc

    return _ENCODED_WORD.sub(word, text)


def _header(msg, name: str) -> str | None:
    value = msg.get(name)
    if value is None:
        return None
    value = str(value)
    if any("\udc80" <= c <= "\udcff" for c in value):
        value = value.encode("ascii", "surrogateescape").decode("utf-8", "replace")
    return re.sub(r"\r?\n[ \t]", " ", value).strip()


def _read_message(raw: bytes, origin: str, result: ParseResult[MessageRecord]) -> None:
    msg = email.message_from_bytes(raw, policy=email.policy.compat32)
    date_text = _header(msg, "Date")
    if not date_text:
        result.errors.append(RecordError("MissingDate", "message has no Date header", origin))
        return
    try:
        when = email.utils.parsedate_to_datetime(date_text)
    except (TypeError, ValueError, IndexError) as exc:
        result.errors.append(RecordError("MissingDate", f"unparseable Date {date_text!r}: {exc}", origin))
        return
    if when is None:
        result.errors.append(RecordError("MissingDate", f"unparseable Date {date_text!r}", origin))
        return
    raw_subject = _header(msg, "Subject") or ""
    try:
        subject = decode_rfc2047(raw_subject)
    except UndecodableSubject as exc:
        subject = raw_subject
        result.errors.append(RecordError("UndecodableSubject", str(exc), origin, record_failed=False))
    message_id = (_header(msg, "Message-ID") or "").strip().strip("<>").strip() or None
    result.records.append(
        MessageRecord(to_local(when), _header(msg, "From") or "", subject, origin, message_id)
    )


def parse_messages(store) -> ParseResult[MessageRecord]:
    """Read a maildir (``cur``/``new`` subdirectories) or an mbox file."""
    store = Path(store)
    result: ParseResult[MessageRecord] = ParseResult()
    if store.is_dir():
        if not (store / "cur").is_dir() and not (store / "new").is_dir():
            raise SourceUnreadable(f"{store}: neither a maildir nor an mbox file")
        for sub in ("cur", "new"):
            folder = store / sub
            if not folder.is_dir():
                continue
            for name in sorted(os.listdir(folder)):
                path = folder / name
                if name.startswith(".") or not path.is_file():
                    continue
                try:
                    raw = path.read_bytes()
                except OSError as exc:
                    result.errors.append(RecordError("Unreadable", str(exc), str(path)))
                    continue
                _read_message(raw, str(path), result)
    elif store.is_file():
        try:
            box = mailbox.mbox(str(store), create=False)
            keys = list(box.keys())
        except (OSError, mailbox.Error) as exc:
            raise SourceUnreadable(f"{store}: {exc}") from exc
        for index, key in enumerate(keys, start=1):
            try:
                raw = box.get_bytes(key)
            except (OSError, mailbox.Error) as exc:
                result.errors.append(RecordError("Unreadable", str(exc), f"{store}#{index}"))
                continue
            _read_message(raw, f"{store}#{index}", result)
        box.close()
    else:
        raise SourceUnreadable(f"{store}: no such maildir or mbox file")
    result.records.sort(key=lambda r: (r.date, r.origin))
    return result


def to_draft(rec: MessageRecord) -> Draft:
    sender = clean_summary(rec.sender) or "(unknown sender)"
    subject = clean_summary(rec.subject) or "(no subject)"
    link = link_target(f"message-id:{rec.message_id}") if rec.message_id else None
    return Draft(
        make_timestamp(rec.date.date(), rec.date.time()),
        clean_summary(f"{sender}: {subject}"),
        rec.origin,
        link=link,
        properties=(created(rec.date),),
    )
