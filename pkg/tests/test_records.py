import gzip
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webcurate.records import (
    WarcFormatError,
    WarcReader,
    WarcWriter,
    WetReader,
    dump_from_path,
    http_response,
    split_http,
)


def _write(records, compress=True):
    buf = io.BytesIO()
    w = WarcWriter(buf, compress=compress)
    written = [w.write(*r[:2], **r[2]) for r in records]
    return buf.getvalue(), written


SAMPLE = [
    ("warcinfo", b"isPartOf: CC-MAIN-2023-50\r\n", {}),
    ("response", http_response("<p>Hello there, a paragraph.</p>"), {"target_uri": "https://a.example/"}),
    ("response", http_response("<p>Second page.</p>"), {"target_uri": "https://b.example/x"}),
]


@pytest.mark.parametrize("compress", [True, False])
def test_round_trip(compress):
    data, written = _write(SAMPLE, compress)
    reader = WarcReader(io.BytesIO(data))
    got = list(reader)
    assert reader.errors == []
    assert got == written
    assert [r.record_type for r in got] == ["warcinfo", "response", "response"]
    assert got[1].target_uri == "https://a.example/"


def test_offsets_point_at_members():
    data, written = _write(SAMPLE)
    for rec in WarcReader(io.BytesIO(data)):
        member = data[rec.byte_offset : rec.byte_offset + rec.raw_length]
        assert gzip.decompress(member).startswith(b"WARC/1.0")


def test_small_chunks_match_large():
    data, _ = _write(SAMPLE * 5)
    a = list(WarcReader(io.BytesIO(data), chunk_size=7))
    b = list(WarcReader(io.BytesIO(data)))
    assert a == b


def test_corrupt_member_is_skipped_with_offset():
    data, written = _write(SAMPLE)
    start = written[1].byte_offset
    bad = bytearray(data)
    bad[start + 20 : start + 40] = b"\x00" * 20
    reader = WarcReader(io.BytesIO(bytes(bad)))
    got = list(reader)
    assert [r.record_id for r in got] == [written[0].record_id, written[2].record_id]
    assert len(reader.errors) == 1
    assert reader.errors[0].byte_offset == start


def test_bad_header_inside_member():
    buf = io.BytesIO()
    buf.write(gzip.compress(b"WARC/1.0\r\nWARC-Type: response\r\n\r\nxx\r\n\r\n", mtime=0))
    w = WarcWriter(buf)
    w.offset = buf.tell()
    ok = w.write("response", b"body")
    reader = WarcReader(io.BytesIO(buf.getvalue()))
    got = list(reader)
    assert [r.record_id for r in got] == [ok.record_id]
    assert reader.errors[0].byte_offset == 0


def test_truncated_stream_reports_error():
    data, written = _write(SAMPLE)
    reader = WarcReader(io.BytesIO(data[:-10]))
    got = list(reader)
    assert len(got) == 2
    assert reader.errors and reader.errors[0].byte_offset == written[2].byte_offset


def test_not_warc_raises():
    with pytest.raises(WarcFormatError):
        WarcReader(io.BytesIO(b"PK\x03\x04 zip file"))


def test_iterate_once():
    data, _ = _write(SAMPLE)
    reader = WarcReader(io.BytesIO(data))
    list(reader)
    with pytest.raises(RuntimeError):
        list(reader)


def test_wet_reader_reads_conversion_records():
    data, written = _write([
        ("warcinfo", b"isPartOf: CC-MAIN-2024-10\r\n", {}),
        ("conversion", "Plain text here.\nSecond line.".encode(), {"target_uri": "https://c.example/"}),
    ])
    docs = list(WetReader(io.BytesIO(data), source_path="x/CC-MAIN-2023-50/y.warc.wet.gz"))
    assert len(docs) == 1
    assert docs[0].dump == "CC-MAIN-2024-10"
    assert docs[0].text == "Plain text here.\nSecond line."
    assert docs[0].id == written[1].record_id


def test_dump_from_path():
    assert dump_from_path("s3://commoncrawl/crawl-data/CC-MAIN-2013-48/segments/a.warc.gz") == "CC-MAIN-2013-48"
    assert dump_from_path("local.warc.gz") == ""


def test_split_http():
    headers, body = split_http(http_response("<p>x</p>", "text/html; charset=latin-1"))
    assert headers["content-type"] == "text/html; charset=latin-1"
    assert body == b"<p>x</p>"
    assert split_http(b"no status line") == ({}, b"no status line")


_types = st.sampled_from(["warcinfo", "request", "response", "conversion"])
_uri = st.one_of(st.none(), st.from_regex(r"https?://[a-z]{1,10}\.example/[a-z0-9/]{0,12}", fullmatch=True))
_record = st.tuples(_types, st.binary(max_size=300), _uri)


@settings(max_examples=60, deadline=None)
@given(st.lists(_record, max_size=6), st.booleans())
def test_fuzzed_round_trip(records, compress):
    data, written = _write([(t, p, {"target_uri": u}) for t, p, u in records], compress)
    reader = WarcReader(io.BytesIO(data))
    got = list(reader)
    assert reader.errors == []
    assert got == written
    assert all(a.payload == b.payload for a, b in zip(got, written))
