"""Canonical byte encodings: fixed-width big-endian integers, 32-byte points
and scalars, u32 length prefixes for variable data."""

from __future__ import annotations

import struct

from .crypto import POINT_BYTES, decode_commitment, scalar_bytes, scalar_from_bytes
from .group import Point


class DecodeError(ValueError):
    pass


class Writer:
    def __init__(self):
        self._parts: list[bytes] = []

    def u8(self, v: int) -> Writer:
        self._parts.append(struct.pack(">B", v))
        return self

    def u32(self, v: int) -> Writer:
        self._parts.append(struct.pack(">I", v))
        return self

    def u64(self, v: int) -> Writer:
        self._parts.append(struct.pack(">Q", v))
        return self

    def raw(self, b: bytes) -> Writer:
        self._parts.append(bytes(b))
        return self

    def var(self, b: bytes) -> Writer:
        return self.u32(len(b)).raw(b)

    def point(self, p: Point) -> Writer:
        return self.raw(p.encode())

    def opt_point(self, p: Point | None) -> Writer:
        if p is None:
            return self.u8(0)
        return self.u8(1).point(p)

    def scalar(self, x: int) -> Writer:
        return self.raw(scalar_bytes(x))

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    def __init__(self, data: bytes):
        self._b = memoryview(bytes(data))
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._b):
            raise DecodeError("truncated input")
        out = bytes(self._b[self._pos : self._pos + n])
        self._pos += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def var(self) -> bytes:
        return self._take(self.u32())

    def point(self) -> Point:
        try:
            return decode_commitment(self._take(POINT_BYTES))
        except ValueError as exc:
            raise DecodeError(str(exc)) from None

    def opt_point(self) -> Point | None:
        flag = self.u8()
        if flag == 0:
            return None
        if flag != 1:
            raise DecodeError("bad option flag")
        return self.point()

    def scalar(self) -> int:
        try:
            return scalar_from_bytes(self._take(32))
        except ValueError as exc:
            raise DecodeError(str(exc)) from None

    def done(self) -> None:
        if self._pos != len(self._b):
            raise DecodeError("trailing bytes")

    @property
    def remaining(self) -> int:
        return len(self._b) - self._pos
