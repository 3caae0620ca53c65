"""Parcel-style byte container.

Layout (all little-endian, every item padded to a 4-byte boundary):

    int32 / float32   4 bytes
    int64 / float64   8 bytes
    bool              int32 0 or 1
    string            int32 UTF-16 code-unit count, the units, a 16-bit zero
                      terminator, zero pad to 4
    bytes             int32 length, the bytes, zero pad to 4

There is no strict-mode header in front of the interface token.
"""
from __future__ import annotations

import struct

_I32 = struct.Struct("<i")
_I64 = struct.Struct("<q")
_F32 = struct.Struct("<f")
_F64 = struct.Struct("<d")


class CodecError(Exception):
    """Base class for everything the codec raises."""


class BufferUnderrun(CodecError):
    def __init__(self, needed, available, offset):
        self.needed, self.available, self.offset = needed, available, offset
        super().__init__(f"need {needed} bytes at offset {offset}, {available} left")


class MalformedData(CodecError):
    pass


def _pad(n: int) -> int:
    return (-n) % 4


class ParcelBuffer:
    def __init__(self, data: bytes = b""):
        self._data = bytearray(data)
        self.cursor = 0

    @property
    def data(self) -> bytes:
        return bytes(self._data)

    def __len__(self):
        return len(self._data)

    @property
    def remaining(self) -> int:
        return len(self._data) - self.cursor

    # -- writers --------------------------------------------------------

    def write_int32(self, v: int) -> "ParcelBuffer":
        self._data += _I32.pack(v)
        return self

    def write_int64(self, v: int) -> "ParcelBuffer":
        self._data += _I64.pack(v)
        return self

    def write_float32(self, v: float) -> "ParcelBuffer":
        self._data += _F32.pack(v)
        return self

    def write_float64(self, v: float) -> "ParcelBuffer":
        self._data += _F64.pack(v)
        return self

    def write_bool(self, v: bool) -> "ParcelBuffer":
        return self.write_int32(1 if v else 0)

    def write_string(self, s: str) -> "ParcelBuffer":
        units = s.encode("utf-16-le")
        self.write_int32(len(units) // 2)
        body = units + b"\x00\x00"
        self._data += body + b"\x00" * _pad(len(body))
        return self

    def write_bytes(self, b: bytes) -> "ParcelBuffer":
        self.write_int32(len(b))
        self._data += bytes(b) + b"\x00" * _pad(len(b))
        return self

    # -- readers --------------------------------------------------------

    def _take(self, n: int) -> bytes:
        if n > self.remaining:
            raise BufferUnderrun(n, self.remaining, self.cursor)
        chunk = bytes(self._data[self.cursor:self.cursor + n])
        self.cursor += n
        return chunk

    def read_int32(self) -> int:
        return _I32.unpack(self._take(4))[0]

    def read_int64(self) -> int:
        return _I64.unpack(self._take(8))[0]

    def read_float32(self) -> float:
        return _F32.unpack(self._take(4))[0]

    def read_float64(self) -> float:
        return _F64.unpack(self._take(8))[0]

    def read_bool(self) -> bool:
        start = self.cursor
        v = self.read_int32()
        if v not in (0, 1):
            self.cursor = start
            raise MalformedData(f"bool value {v} at offset {start}")
        return bool(v)

    def read_string(self) -> str:
        start = self.cursor
        count = self.read_int32()
        if count < 0:
            self.cursor = start
            raise MalformedData(f"negative string length {count} at offset {start}")
        size = 2 * count + 2
        total = size + _pad(size)
        if total > self.remaining:
            err = BufferUnderrun(total, self.remaining, self.cursor)
            self.cursor = start
            raise err
        body = self._take(total)
        if body[2 * count:2 * count + 2] != b"\x00\x00":
            self.cursor = start
            raise MalformedData(f"missing string terminator at offset {start}")
        try:
            return body[:2 * count].decode("utf-16-le")
        except UnicodeDecodeError as exc:
            self.cursor = start
            raise MalformedData(f"invalid UTF-16 at offset {start}: {exc.reason}") from None

    def read_bytes(self) -> bytes:
        start = self.cursor
        n = self.read_int32()
        if n < 0:
            self.cursor = start
            raise MalformedData(f"negative byte-array length {n} at offset {start}")
        total = n + _pad(n)
        if total > self.remaining:
            err = BufferUnderrun(total, self.remaining, self.cursor)
            self.cursor = start
            raise err
        return self._take(total)[:n]
