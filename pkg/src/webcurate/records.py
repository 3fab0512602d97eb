"""Streaming WARC/1.0 and WET readers, plus a minimal reference writer.

Records are read one gzip member at a time; the reader never holds more
than the current record (and one read chunk of lookahead) in memory.
Plain, uncompressed ``.warc`` streams are accepted as well.
"""

from __future__ import annotations

import gzip
import re
import uuid
import zlib
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import BinaryIO

from .document import Document

GZIP_MAGIC = b"\x1f\x8b\x08"
RECORD_TYPES = ("warcinfo", "request", "response", "conversion")
CHUNK_SIZE = 1 << 16

_DUMP_RE = re.compile(r"CC-MAIN-\d{4}-\d{2}")


class WarcFormatError(ValueError):
    """The stream is neither gzip-framed nor plain WARC."""


class RecordParseError(ValueError):
    def __init__(self, message: str, record_id: str | None = None):
        super().__init__(message)
        self.record_id = record_id


@dataclass(frozen=True)
class RecordError:
    byte_offset: int
    message: str
    record_id: str | None = None


class Headers(Mapping):
    """Ordered header block with case-insensitive lookup.

    Repeated names are preserved in ``items()``; lookup returns the first.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        self._pairs = [(str(k), str(v)) for k, v in pairs]
        self._index: dict[str, str] = {}
        for k, v in self._pairs:
            self._index.setdefault(k.lower(), v)

    def __getitem__(self, name: str) -> str:
        return self._index[name.lower()]

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and name.lower() in self._index

    def __iter__(self):
        return (k for k, _ in self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def items(self):  # type: ignore[override]
        return list(self._pairs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Headers):
            return self._pairs == other._pairs
        return NotImplemented

    def __repr__(self) -> str:
        return f"Headers({self._pairs!r})"


@dataclass
class RawRecord:
    record_type: str
    headers: Headers
    target_uri: str | None
    record_id: str
    date: str
    payload: bytes
    source_path: str = ""
    byte_offset: int = 0
    # input bytes consumed by this record, framing included
    raw_length: int = field(default=0, compare=False)


def _parse_headers(block: bytes) -> tuple[str, list[tuple[str, str]]]:
    lines = block.split(b"\r\n")
    version = lines[0].decode("ascii", "replace")
    if not version.startswith("WARC/"):
        raise RecordParseError(f"bad version line {version[:20]!r}")
    pairs: list[tuple[str, str]] = []
    for line in lines[1:]:
        if line[:1] in (b" ", b"\t"):
            if not pairs:
                raise RecordParseError("continuation line before any header")
            name, value = pairs[-1]
            pairs[-1] = (name, value + " " + line.strip().decode("utf-8", "replace"))
            continue
        name, sep, value = line.partition(b":")
        name = name.strip()
        if not sep or not name or b" " in name:
            raise RecordParseError(f"malformed header line {line[:40]!r}")
        pairs.append((name.decode("utf-8", "replace"), value.strip().decode("utf-8", "replace")))
    return version, pairs


def _make_record(pairs: list[tuple[str, str]], payload: bytes) -> RawRecord:
    headers = Headers(pairs)
    rtype = headers.get("WARC-Type", "").strip().lower()
    return RawRecord(
        record_type=rtype if rtype in RECORD_TYPES else "other",
        headers=headers,
        target_uri=headers.get("WARC-Target-URI"),
        record_id=headers.get("WARC-Record-ID", ""),
        date=headers.get("WARC-Date", ""),
        payload=payload,
    )


def _content_length(pairs: list[tuple[str, str]], record_id: str | None) -> int:
    for name, value in pairs:
        if name.lower() == "content-length":
            try:
                length = int(value)
            except ValueError:
                raise RecordParseError(f"bad Content-Length {value!r}", record_id) from None
            if length < 0:
                raise RecordParseError("negative Content-Length", record_id)
            return length
    raise RecordParseError("missing Content-Length", record_id)


def _record_id(pairs: list[tuple[str, str]]) -> str | None:
    for name, value in pairs:
        if name.lower() == "warc-record-id" and value:
            return value
    return None


def parse_records(data: bytes) -> Iterator[tuple[RawRecord, int, int]]:
    """Parse complete decompressed WARC bytes.

    Yields ``(record, start, end)`` relative to ``data``. Raises
    RecordParseError on the first malformed record.
    """
    pos = 0
    n = len(data)
    while pos < n:
        # tolerate stray blank lines between records
        while data.startswith(b"\r\n", pos) or data.startswith(b"\n", pos):
            pos += 2 if data.startswith(b"\r\n", pos) else 1
        if pos >= n:
            return
        start = pos
        head_end = data.find(b"\r\n\r\n", pos)
        if head_end < 0:
            raise RecordParseError("unterminated header block")
        _, pairs = _parse_headers(data[pos:head_end])
        rid = _record_id(pairs)
        if rid is None:
            raise RecordParseError("missing WARC-Record-ID")
        length = _content_length(pairs, rid)
        body = head_end + 4
        payload = data[body : body + length]
        if len(payload) < length:
            raise RecordParseError(
                f"truncated payload: {len(payload)} of {length} bytes", rid
            )
        pos = body + length
        if data.startswith(b"\r\n\r\n", pos):
            pos += 4
        yield _make_record(pairs, payload), start, pos


class WarcReader:
    """Iterate over the records of one WARC stream.

    Record-level problems are collected in ``errors`` (with byte offsets)
    and parsing continues with the next gzip member. A stream that is
    neither gzip nor plain WARC raises WarcFormatError on construction.
    """

    def __init__(
        self,
        stream: BinaryIO,
        *,
        source_path: str = "",
        skip_non_response: bool = False,
        base_offset: int = 0,
        chunk_size: int = CHUNK_SIZE,
    ):
        self.stream = stream
        self.source_path = source_path
        self.skip_non_response = skip_non_response
        self.base_offset = base_offset
        self.chunk_size = chunk_size
        self.errors: list[RecordError] = []
        self._buf = bytearray(stream.read(chunk_size))
        self._eof = not self._buf
        if not self._buf:
            self.compressed = True
        elif self._buf[:2] == GZIP_MAGIC[:2]:
            self.compressed = True
        elif self._buf.lstrip()[:5] == b"WARC/":
            self.compressed = False
        else:
            raise WarcFormatError(
                f"{source_path or 'stream'}: not a gzip or WARC stream "
                f"(starts with {bytes(self._buf[:8])!r})"
            )
        self._started = False

    def _fill(self) -> bool:
        if self._eof:
            return False
        chunk = self.stream.read(self.chunk_size)
        if not chunk:
            self._eof = True
            return False
        self._buf += chunk
        return True

    def __iter__(self) -> Iterator[RawRecord]:
        if self._started:
            raise RuntimeError("WarcReader can only be iterated once")
        self._started = True
        members = self._gzip_members() if self.compressed else self._plain_records()
        for record in members:
            if self.skip_non_response and record.record_type != "response":
                continue
            yield record

    def _error(self, offset: int, exc: Exception) -> None:
        self.errors.append(
            RecordError(offset, str(exc), getattr(exc, "record_id", None))
        )

    def _resync(self, pattern: bytes) -> int:
        """Drop bytes up to the next occurrence of ``pattern`` past index 0."""
        while True:
            i = self._buf.find(pattern, 1)
            if i >= 0:
                del self._buf[:i]
                return i
            if not self._fill():
                dropped = len(self._buf)
                self._buf.clear()
                return dropped

    def _gzip_members(self) -> Iterator[RawRecord]:
        offset = self.base_offset
        while True:
            if not self._buf and not self._fill():
                return
            d = zlib.decompressobj(wbits=31)
            out: list[bytes] = []
            fed = 0
            try:
                while not d.eof:
                    if fed == len(self._buf) and not self._fill():
                        break
                    out.append(d.decompress(bytes(self._buf[fed:])))
                    fed = len(self._buf)
            except zlib.error as exc:
                self._error(offset, RecordParseError(f"corrupt gzip member: {exc}"))
                offset += self._resync(GZIP_MAGIC)
                continue
            if not d.eof:
                self._error(offset, RecordParseError("truncated gzip member at end of stream"))
                self._buf.clear()
                return
            member_len = fed - len(d.unused_data)
            del self._buf[:member_len]
            data = b"".join(out)
            try:
                parsed = list(parse_records(data))
            except RecordParseError as exc:
                self._error(offset, exc)
            else:
                for i, (record, _, _) in enumerate(parsed):
                    record.source_path = self.source_path
                    record.byte_offset = offset
                    record.raw_length = member_len if i == 0 else 0
                    yield record
            offset += member_len

    def _plain_records(self) -> Iterator[RawRecord]:
        offset = self.base_offset
        while True:
            # skip separators
            while True:
                stripped = len(self._buf) - len(self._buf.lstrip(b"\r\n"))
                if stripped:
                    del self._buf[:stripped]
                    offset += stripped
                if self._buf or not self._fill():
                    break
            if not self._buf:
                return
            head_end = self._buf.find(b"\r\n\r\n")
            while head_end < 0 and self._fill():
                head_end = self._buf.find(b"\r\n\r\n")
            try:
                if head_end < 0:
                    raise RecordParseError("unterminated header block")
                _, pairs = _parse_headers(bytes(self._buf[:head_end]))
                rid = _record_id(pairs)
                if rid is None:
                    raise RecordParseError("missing WARC-Record-ID")
                length = _content_length(pairs, rid)
            except RecordParseError as exc:
                self._error(offset, exc)
                offset += self._resync(b"\nWARC/")
                if self._buf:
                    del self._buf[:1]
                    offset += 1
                continue
            body = head_end + 4
            while len(self._buf) < body + length + 4 and self._fill():
                pass
            payload = bytes(self._buf[body : body + length])
            if len(payload) < length:
                self._error(
                    offset,
                    RecordParseError(f"truncated payload: {len(payload)} of {length} bytes", rid),
                )
                self._buf.clear()
                return
            end = body + length
            if self._buf[end : end + 4] == b"\r\n\r\n":
                end += 4
            record = _make_record(pairs, payload)
            record.source_path = self.source_path
            record.byte_offset = offset
            record.raw_length = end
            del self._buf[:end]
            offset += end
            yield record


def read_warc(stream: BinaryIO, **kwargs) -> WarcReader:
    return WarcReader(stream, **kwargs)


def dump_from_path(path: str) -> str:
    m = _DUMP_RE.search(path)
    return m.group(0) if m else ""


def _warcinfo_fields(payload: bytes) -> dict[str, str]:
    fields = {}
    for line in payload.decode("utf-8", "replace").splitlines():
        name, sep, value = line.partition(":")
        if sep:
            fields[name.strip().lower()] = value.strip()
    return fields


class WetReader:
    """Documents from the conversion records of a WET stream.

    The dump id comes from the warcinfo ``isPartOf`` field when present,
    otherwise from a ``CC-MAIN-YYYY-WW`` token in the source path.
    """

    def __init__(self, stream: BinaryIO, *, source_path: str = "", dump: str | None = None, **kwargs):
        self._reader = WarcReader(stream, source_path=source_path, **kwargs)
        self.source_path = source_path
        self.dump = dump

    @property
    def errors(self) -> list[RecordError]:
        return self._reader.errors

    def __iter__(self) -> Iterator[Document]:
        dump = self.dump if self.dump is not None else dump_from_path(self.source_path)
        for record in self._reader:
            if record.record_type == "warcinfo" and self.dump is None:
                dump = _warcinfo_fields(record.payload).get("ispartof", dump)
                continue
            if record.record_type != "conversion":
                continue
            yield Document(
                id=record.record_id,
                text=record.payload.decode("utf-8", errors="replace"),
                url=record.target_uri or "",
                dump=dump,
                date=record.date,
                file_path=record.source_path,
                meta={"byte_offset": record.byte_offset},
            )


def read_wet(stream: BinaryIO, **kwargs) -> WetReader:
    return WetReader(stream, **kwargs)


# reference writer -----------------------------------------------------------


def new_record_id() -> str:
    return f"<urn:uuid:{uuid.uuid4()}>"


def format_record(headers: Iterable[tuple[str, str]], payload: bytes) -> tuple[bytes, list[tuple[str, str]]]:
    """Serialize one record; Content-Length is always recomputed."""
    pairs = [(k, v) for k, v in headers if k.lower() != "content-length"]
    pairs.append(("Content-Length", str(len(payload))))
    head = "WARC/1.0\r\n" + "".join(f"{k}: {v}\r\n" for k, v in pairs) + "\r\n"
    return head.encode("utf-8") + payload + b"\r\n\r\n", pairs


class WarcWriter:
    """Append records to a stream, one gzip member per record by default.

    Intended for fixtures and tests; compression uses mtime 0 so output is
    byte-deterministic.
    """

    def __init__(self, stream: BinaryIO, *, compress: bool = True, source_path: str = ""):
        self.stream = stream
        self.compress = compress
        self.source_path = source_path
        self.offset = 0

    def write(
        self,
        record_type: str,
        payload: bytes,
        *,
        record_id: str | None = None,
        target_uri: str | None = None,
        date: str = "2024-01-01T00:00:00Z",
        headers: Iterable[tuple[str, str]] = (),
    ) -> RawRecord:
        rid = record_id or new_record_id()
        pairs = [("WARC-Type", record_type), ("WARC-Record-ID", rid), ("WARC-Date", date)]
        if target_uri is not None:
            pairs.append(("WARC-Target-URI", target_uri))
        pairs.extend(headers)
        return self.write_headers(pairs, payload)

    def write_headers(self, headers: Iterable[tuple[str, str]], payload: bytes) -> RawRecord:
        raw, pairs = format_record(headers, payload)
        if self.compress:
            raw = gzip.compress(raw, mtime=0)
        record = _make_record(pairs, payload)
        record.source_path = self.source_path
        record.byte_offset = self.offset
        record.raw_length = len(raw)
        self.stream.write(raw)
        self.offset += len(raw)
        return record


def http_response(html: str | bytes, content_type: str = "text/html; charset=utf-8") -> bytes:
    body = html.encode("utf-8") if isinstance(html, str) else html
    head = f"HTTP/1.1 200 OK\r\nContent-Type: {content_type}\r\nContent-Length: {len(body)}\r\n\r\n"
    return head.encode("ascii") + body


def split_http(payload: bytes) -> tuple[dict[str, str], bytes]:
    """Split an HTTP response payload into (lowercased headers, body).

    Payloads without a status line are returned as body-only.
    """
    if not payload.startswith(b"HTTP/"):
        return {}, payload
    end = payload.find(b"\r\n\r\n")
    sep = 4
    if end < 0:
        end = payload.find(b"\n\n")
        sep = 2
    if end < 0:
        return {}, b""
    headers = {}
    for line in payload[:end].split(b"\n")[1:]:
        name, colon, value = line.decode("latin-1").partition(":")
        if colon:
            headers[name.strip().lower()] = value.strip()
    return headers, payload[end + sep :]
