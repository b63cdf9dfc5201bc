"""Length-prefixed framing for the retailer, client and auditor processes.

A frame is ``length u32 | type u8 | payload`` where ``length`` counts the
payload bytes only, all integers big-endian.
"""

from __future__ import annotations

import asyncio
import enum
import struct
from dataclasses import dataclass

from ..codec import Reader, Writer

MAX_PAYLOAD = 64 << 20
_HEADER = struct.Struct(">IB")


class MsgType(enum.IntEnum):
    SUBMIT_MEASUREMENT = 1
    SLOT_SECRET = 2
    EVIDENCE_USER = 3
    EVIDENCE_AUDITOR = 4
    BILL = 5
    QUERY_INCLUSION = 6
    INCLUSION_RESP = 7
    ERROR = 8


class WireError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    type: MsgType
    payload: bytes = b""

    def encode(self) -> bytes:
        if len(self.payload) > MAX_PAYLOAD:
            raise WireError("payload too large")
        return _HEADER.pack(len(self.payload), self.type) + self.payload


def decode_frame(data: bytes) -> Frame:
    """Parse exactly one frame; trailing or missing bytes are an error."""
    if len(data) < _HEADER.size:
        raise WireError("truncated header")
    length, kind = _HEADER.unpack_from(data)
    if len(data) != _HEADER.size + length:
        raise WireError("length prefix does not match payload")
    return Frame(_msg_type(kind), data[_HEADER.size :])


def _msg_type(kind: int) -> MsgType:
    try:
        return MsgType(kind)
    except ValueError:
        raise WireError(f"unknown message type {kind}") from None


async def read_frame(reader: asyncio.StreamReader) -> Frame | None:
    """Next frame, or None on a clean end of stream between frames."""
    try:
        head = await reader.readexactly(_HEADER.size)
    except asyncio.IncompleteReadError as e:
        if not e.partial:
            return None
        raise WireError("truncated header") from None
    length, kind = _HEADER.unpack(head)
    if length > MAX_PAYLOAD:
        raise WireError("payload too large")
    mtype = _msg_type(kind)
    try:
        payload = await reader.readexactly(length)
    except asyncio.IncompleteReadError:
        raise WireError("truncated payload") from None
    return Frame(mtype, payload)


async def send(writer: asyncio.StreamWriter, mtype: MsgType, payload: bytes = b"") -> None:
    writer.write(Frame(mtype, payload).encode())
    await writer.drain()


# --- payloads ---------------------------------------------------------------------


@dataclass(frozen=True)
class Measurement:
    user: int
    cycle: int
    period: int
    y: int

    def encode(self) -> bytes:
        return Writer().u32(self.user).u64(self.cycle).u64(self.period).u64(self.y).getvalue()

    @classmethod
    def decode(cls, data: bytes) -> Measurement:
        r = Reader(data)
        out = cls(r.u32(), r.u64(), r.u64(), r.u64())
        r.done()
        return out


@dataclass(frozen=True)
class SlotSecret:
    user: int
    cycle: int
    period: int
    r: int

    def encode(self) -> bytes:
        return Writer().u32(self.user).u64(self.cycle).u64(self.period).scalar(self.r).getvalue()

    @classmethod
    def decode(cls, data: bytes) -> SlotSecret:
        rd = Reader(data)
        out = cls(rd.u32(), rd.u64(), rd.u64(), rd.scalar())
        rd.done()
        return out


@dataclass(frozen=True)
class Tagged:
    """Evidence view or request for one (cycle, period), with an opaque body."""

    cycle: int
    period: int
    index: int = 0
    body: bytes = b""

    def encode(self) -> bytes:
        return Writer().u64(self.cycle).u64(self.period).u32(self.index).var(self.body).getvalue()

    @classmethod
    def decode(cls, data: bytes) -> Tagged:
        r = Reader(data)
        out = cls(r.u64(), r.u64(), r.u32(), r.var())
        r.done()
        return out


@dataclass(frozen=True)
class InclusionResponse:
    inclusion: bytes
    leaf_proof: bytes

    def encode(self) -> bytes:
        return Writer().var(self.inclusion).var(self.leaf_proof).getvalue()

    @classmethod
    def decode(cls, data: bytes) -> InclusionResponse:
        r = Reader(data)
        out = cls(r.var(), r.var())
        r.done()
        return out
