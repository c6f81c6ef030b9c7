"""DateTimeOriginal extraction from JPEG APP1/TIFF, with explicit bounds checks."""
from __future__ import annotations

import datetime as dt
import re
import struct
from dataclasses import dataclass
from pathlib import Path

from ..model import ChronorgError, clean_summary, make_timestamp
from .base import Draft, created, link_target

TAG_EXIF_IFD = 0x8769
TAG_DATETIME_ORIGINAL = 0x9003
TAG_DATETIME = 0x0132
TYPE_ASCII = 2
_EXIF_STAMP = re.compile(r"(\d{4}):(\d{2}):(\d{2}) (\d{2}):(\d{2}):(\d{2})")


class ExifError(ChronorgError, ValueError):
    pass


class NotJpeg(ExifError):
    pass


class NoExifSegment(ExifError):
    pass


class TruncatedTiff(ExifError):
    pass


class NoDateTimeOriginal(ExifError):
    pass


class BadDateTime(ExifError):
    pass


@dataclass(frozen=True)
class ExifRecord:
    datetime_original: dt.datetime
    source_path: str


def find_exif_tiff(data: bytes) -> bytes:
    """Return the TIFF block of the first ``Exif\\0\\0`` APP1 segment."""
    if data[:2] != b"\xff\xd8":
        raise NotJpeg("missing JPEG SOI marker")
    pos, n = 2, len(data)
    while True:
        while pos < n and data[pos] == 0xFF and pos + 1 < n and data[pos + 1] == 0xFF:
            pos += 1  # fill bytes
        if pos + 2 > n:
            raise NoExifSegment("end of data before an Exif segment")
        if data[pos] != 0xFF:
            raise NoExifSegment(f"marker expected at offset {pos}")
        marker = data[pos + 1]
        if marker in (0xDA, 0xD9):
            raise NoExifSegment("image data reached without an Exif segment")
        if marker == 0x01 or 0xD0 <= marker <= 0xD7:
            pos += 2
            continue
        if pos + 4 > n:
            raise TruncatedTiff("segment length cut off")
        (length,) = struct.unpack_from(">H", data, pos + 2)
        if length < 2 or pos + 2 + length > n:
            raise TruncatedTiff(f"segment at {pos} declares {length} bytes past the end")
        payload = data[pos + 4:pos + 2 + length]
        if marker == 0xE1 and payload[:6] == b"Exif\x00\x00":
            return payload[6:]
        pos += 2 + length


class _Tiff:
    def __init__(self, block: bytes):
        if len(block) < 8:
            raise TruncatedTiff("TIFF header cut off")
        if block[:2] == b"II":
            self.order = "<"
        elif block[:2] == b"MM":
            self.order = ">"
        else:
            raise TruncatedTiff(f"unknown byte order {block[:2]!r}")
        self.data = block
        if self.u16(2) != 42:
            raise TruncatedTiff("bad TIFF magic")
        self.ifd0 = self.u32(4)

    def _check(self, offset: int, size: int) -> None:
        if offset < 0 or offset + size > len(self.data):
            raise TruncatedTiff(f"read of {size} bytes at {offset} exceeds {len(self.data)}")

    def u16(self, offset: int) -> int:
        self._check(offset, 2)
        return struct.unpack_from(self.order + "H", self.data, offset)[0]

    def u32(self, offset: int) -> int:
        self._check(offset, 4)
        return struct.unpack_from(self.order + "I", self.data, offset)[0]

    def entries(self, offset: int) -> dict[int, tuple[int, int, int]]:
        """tag -> (type, count, offset of the 4-byte value field)"""
        count = self.u16(offset)
        self._check(offset + 2, 12 * count)
        out = {}
        for i in range(count):
            at = offset + 2 + 12 * i
            tag, typ = self.u16(at), self.u16(at + 2)
            out.setdefault(tag, (typ, self.u32(at + 4), at + 8))
        return out

    def ascii(self, typ: int, count: int, field: int) -> str:
        if typ != TYPE_ASCII:
            raise BadDateTime(f"expected ASCII value, found type {typ}")
        start = field if count <= 4 else self.u32(field)
        self._check(start, count)
        return self.data[start:start + count].split(b"\x00", 1)[0].decode("ascii", "replace")


def read_datetime_original(data: bytes) -> dt.datetime:
    tiff = _Tiff(find_exif_tiff(data))
    ifd0 = tiff.entries(tiff.ifd0)
    value = None
    if TAG_EXIF_IFD in ifd0:
        _typ, _count, field = ifd0[TAG_EXIF_IFD]
        exif_ifd = tiff.entries(tiff.u32(field))
        if TAG_DATETIME_ORIGINAL in exif_ifd:
            value = tiff.ascii(*exif_ifd[TAG_DATETIME_ORIGINAL])
    if value is None and TAG_DATETIME in ifd0:
        value = tiff.ascii(*ifd0[TAG_DATETIME])
    if value is None:
        raise NoDateTimeOriginal("neither DateTimeOriginal nor DateTime present")
    m = _EXIF_STAMP.fullmatch(value.strip())
    if not m:
        raise BadDateTime(f"malformed EXIF date-time {value!r}")
    try:
        return dt.datetime(*map(int, m.groups()))
    except ValueError as exc:
        raise BadDateTime(f"impossible EXIF date-time {value!r}") from exc


def parse_exif_datetime(image) -> ExifRecord:
    path = Path(image)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ExifError(f"{path}: {exc}") from exc
    try:
        return ExifRecord(read_datetime_original(data), str(path))
    except ExifError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def to_draft(rec: ExifRecord) -> Draft:
    path = Path(rec.source_path)
    when = rec.datetime_original
    return Draft(
        make_timestamp(when.date(), when.time()),
        clean_summary(path.name) or "(unnamed image)",
        str(path),
        link=link_target(str(path.absolute())),
        properties=(created(when),),
    )
