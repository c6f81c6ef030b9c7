import datetime as dt

import pytest
from PIL import Image

from chronorg.parsers.exif import (
    NoDateTimeOriginal,
    NoExifSegment,
    NotJpeg,
    TruncatedTiff,
    parse_exif_datetime,
    read_datetime_original,
    to_draft,
)

from conftest import SCENARIO, IMAGES


def pillow_original(path) -> dt.datetime:
    exif = Image.open(path).getexif()
    value = exif.get_ifd(0x8769).get(0x9003) or exif.get(0x0132)
    return dt.datetime.strptime(value, "%Y:%m:%d %H:%M:%S")


@pytest.mark.parametrize("name", ["IMG0042.jpg", "IMG0042_bigendian.jpg", "datetime_only.jpg"])
def test_matches_pillow(name):
    path = IMAGES / name
    assert parse_exif_datetime(path).datetime_original == pillow_original(path)


def test_both_byte_orders():
    little = parse_exif_datetime(IMAGES / "IMG0042.jpg").datetime_original
    big = parse_exif_datetime(IMAGES / "IMG0042_bigendian.jpg").datetime_original
    assert little == big == dt.datetime(2008, 9, 15, 14, 34, 56)


def test_datetime_fallback():
    assert parse_exif_datetime(IMAGES / "datetime_only.jpg").datetime_original == dt.datetime(
        2008, 9, 15, 14, 35, 10
    )


def test_plain_jpeg_has_no_exif():
    with pytest.raises(NoExifSegment):
        parse_exif_datetime(IMAGES / "plain.jpg")


def test_exif_without_dates():
    with pytest.raises(NoDateTimeOriginal):
        parse_exif_datetime(IMAGES / "no_dates.jpg")


def test_not_jpeg():
    with pytest.raises(NotJpeg):
        read_datetime_original(b"GIF89a")


def test_truncations_are_typed():
    data = (IMAGES / "IMG0042.jpg").read_bytes()
    for cut in range(2, 400):
        try:
            read_datetime_original(data[:cut])
        except (NoExifSegment, TruncatedTiff, NoDateTimeOriginal):
            pass


def test_draft_for_scenario_photo():
    path = SCENARIO / "files" / "photos" / "2008-09-15T14.34_IMG0042.jpg"
    draft = to_draft(parse_exif_datetime(path))
    assert draft.timestamp.render() == "<2008-09-15 Mon 14:34>"
    assert draft.summary == "2008-09-15T14.34_IMG0042.jpg"
    assert dict(draft.properties)["CREATED"] == "2008-09-15T14:34:56"
    assert draft.link.startswith("/")
