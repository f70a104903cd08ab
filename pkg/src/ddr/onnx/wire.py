"""Protobuf wire-format primitives for the encoder graph files.

Implements just enough of the protobuf encoding — varints, length-delimited
fields, little-endian fixed fields, packed repeated scalars — to read and
write the model format without a schema compiler. Unknown fields are skipped
on read, so files produced by other exporters load as long as they use the
subset of the schema this package understands.
"""

from __future__ import annotations

import struct
from typing import Iterator

WIRE_VARINT = 0
WIRE_FIXED64 = 1
WIRE_LEN = 2
WIRE_FIXED32 = 5

_U64_MASK = (1 << 64) - 1


def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varint value must be non-negative (use encode_int64)")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def encode_int64(value: int) -> bytes:
    """Two's-complement int64 varint (10 bytes when negative)."""
    return encode_varint(value & _U64_MASK)


def to_signed64(value: int) -> int:
    return value - (1 << 64) if value >= (1 << 63) else value


def tag(field: int, wire_type: int) -> bytes:
    return encode_varint((field << 3) | wire_type)


def len_field(field: int, payload: bytes) -> bytes:
    return tag(field, WIRE_LEN) + encode_varint(len(payload)) + payload


def str_field(field: int, text: str) -> bytes:
    return len_field(field, text.encode("utf-8"))


def uint_field(field: int, value: int) -> bytes:
    return tag(field, WIRE_VARINT) + encode_varint(value)


def int64_field(field: int, value: int) -> bytes:
    return tag(field, WIRE_VARINT) + encode_int64(value)


def float_field(field: int, value: float) -> bytes:
    return tag(field, WIRE_FIXED32) + struct.pack("<f", value)


def packed_int64s(field: int, values) -> bytes:
    payload = b"".join(encode_int64(int(v)) for v in values)
    return len_field(field, payload)


def packed_floats(field: int, values) -> bytes:
    payload = struct.pack(f"<{len(values)}f", *values)
    return len_field(field, payload)


def decode_varint(buf: memoryview, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise ValueError("truncated varint")
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift >= 70:
            raise ValueError("varint too long")


def iter_fields(buf: memoryview) -> Iterator[tuple[int, int, object]]:
    """Yield (field_number, wire_type, value) triples from a message buffer.

    Varints come out as unsigned ints, fixed32/fixed64 as raw bytes, and
    length-delimited fields as memoryviews into the buffer.
    """
    pos = 0
    end = len(buf)
    while pos < end:
        key, pos = decode_varint(buf, pos)
        field, wire_type = key >> 3, key & 0x07
        if wire_type == WIRE_VARINT:
            value, pos = decode_varint(buf, pos)
        elif wire_type == WIRE_LEN:
            length, pos = decode_varint(buf, pos)
            if pos + length > end:
                raise ValueError("truncated length-delimited field")
            value = buf[pos : pos + length]
            pos += length
        elif wire_type == WIRE_FIXED32:
            value = bytes(buf[pos : pos + 4])
            pos += 4
        elif wire_type == WIRE_FIXED64:
            value = bytes(buf[pos : pos + 8])
            pos += 8
        else:
            raise ValueError(f"unsupported wire type {wire_type}")
        yield field, wire_type, value


def unpack_int64s(view: memoryview) -> list[int]:
    """Decode a packed repeated int64 payload."""
    out = []
    pos = 0
    while pos < len(view):
        value, pos = decode_varint(view, pos)
        out.append(to_signed64(value))
    return out
