import email.header
import mailbox

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chronorg.parsers.base import SourceUnreadable
from chronorg.parsers.mail import UndecodableSubject, decode_rfc2047, parse_messages, to_draft

from conftest import SCENARIO


def header_oracle(text: str) -> str:
    return str(email.header.make_header(email.header.decode_header(text)))


@pytest.mark.parametrize(
    "raw, decoded",
    [
        ("=?UTF-8?B?w4RwZmVs?=", "Äpfel"),
        ("=?iso-8859-1?Q?Gr=FC=DFe_aus_Graz?=", "Grüße aus Graz"),
        ("=?utf-8?q?a?= =?utf-8?q?b?=", "ab"),
        ("plain subject", "plain subject"),
        ("Re: =?UTF-8?Q?caf=C3=A9?= tonight", "Re: café tonight"),
    ],
)
def test_decode_examples_and_oracle(raw, decoded):
    assert decode_rfc2047(raw) == decoded
    assert header_oracle(raw) == decoded


header_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cc", "Cs")), min_size=1, max_size=40
)


@given(header_text, st.sampled_from(["utf-8", "iso-8859-1"]))
def test_decode_agrees_with_email_header(text, charset):
    # utf-8 comes out B-encoded and latin-1 Q-encoded
    try:
        encoded = email.header.Header(text, charset).encode()
    except UnicodeEncodeError:
        return
    assert decode_rfc2047(encoded) == header_oracle(encoded)


def test_unsupported_charset():
    with pytest.raises(UndecodableSubject):
        decode_rfc2047("=?koi8-r?B?8NLJ18XU?=")


def test_maildir_fixture():
    result = parse_messages(SCENARIO / "maildir")
    assert result.errors == []
    (rec,) = result.records
    draft = to_draft(rec)
    assert draft.timestamp.render() == "<2008-09-15 Mon 15:53>"
    assert draft.summary == "Anna Author <anna@example.org>: tagstore slides"
    assert draft.link.startswith("message-id:")


def test_empty_maildir(tmp_path):
    for sub in ("cur", "new", "tmp"):
        (tmp_path / sub).mkdir()
    result = parse_messages(tmp_path)
    assert result.records == [] and result.errors == []


def test_not_a_store(tmp_path):
    with pytest.raises(SourceUnreadable):
        parse_messages(tmp_path)
    with pytest.raises(SourceUnreadable):
        parse_messages(tmp_path / "missing")


def _mbox(path, messages):
    box = mailbox.mbox(str(path))
    for m in messages:
        box.add(m.encode("utf-8"))
    box.flush()
    box.close()


def test_mbox_with_bad_records(tmp_path):
    path = tmp_path / "box"
    _mbox(
        path,
        [
            "From: b@x\nSubject: second\nDate: Mon, 15 Sep 2008 16:00:00 +0200\n\nbody\n",
            "From: a@x\nSubject: no date here\n\nbody\n",
            "From: c@x\nSubject: =?koi8-r?B?8NLJ18XU?=\nDate: Mon, 15 Sep 2008 09:00:00 +0200\n\nbody\n",
        ],
    )
    result = parse_messages(path)
    assert [r.subject for r in result.records] == ["=?koi8-r?B?8NLJ18XU?=", "second"]
    kinds = [(e.kind, e.record_failed) for e in result.errors]
    assert kinds == [("MissingDate", True), ("UndecodableSubject", False)]
    assert result.errors[0].origin == f"{path}#2"
