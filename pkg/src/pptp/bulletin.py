"""Append-only, hash-chained public board.

Every entry links to its predecessor through ``prev_hash`` and carries
``entry_hash = SHA-256(index || kind || cycle || period || len(payload) ||
payload || prev_hash)`` with fixed-width big-endian integers.  Entries of
the signed kinds also carry an Ed25519 verification key and a signature
over ``kind || cycle || period || payload``.

File layout: the 8-byte magic ``PPTPBRD1`` followed by records, each a
4-byte big-endian length and then::

    index u64 | kind u8 | cycle u64 | period u64 | payload_len u32 | payload
    | prev_hash[32] | entry_hash[32] | has_sig u8 | [vk[32] | sig[64]]
"""

from __future__ import annotations

import enum
import os
import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from filelock import FileLock

from .crypto import hash_bytes, sign, verify_sig

MAGIC = b"PPTPBRD1"
ZERO_HASH = bytes(32)


class Kind(enum.IntEnum):
    DIGEST = 1
    ROOT = 2
    REPORT = 3
    FRAUD = 4
    UNAVAILABLE = 5
    SCHEDULE = 6


SIGNED_KINDS = frozenset({Kind.REPORT, Kind.FRAUD, Kind.UNAVAILABLE})


class BoardError(Exception):
    pass


class InvalidSignature(BoardError):
    pass


class DuplicateEntry(BoardError):
    pass


class ChainCorrupted(BoardError):
    pass


def _header(index: int, kind: int, cycle: int, period: int, payload: bytes) -> bytes:
    return struct.pack(">QBQQI", index, kind, cycle, period, len(payload)) + payload


def entry_hash(index: int, kind: int, cycle: int, period: int, payload: bytes, prev: bytes) -> bytes:
    return hash_bytes(_header(index, kind, cycle, period, payload) + prev)


def signed_message(kind: int, cycle: int, period: int, payload: bytes) -> bytes:
    return struct.pack(">BQQ", kind, cycle, period) + payload


@dataclass(frozen=True)
class BulletinEntry:
    index: int
    kind: Kind
    cycle: int
    period: int
    payload: bytes
    prev_hash: bytes
    entry_hash: bytes
    vk: bytes | None = None
    sig: bytes | None = None

    def encode(self) -> bytes:
        body = _header(self.index, self.kind, self.cycle, self.period, self.payload)
        body += self.prev_hash + self.entry_hash
        if self.sig is None:
            return body + b"\x00"
        return body + b"\x01" + self.vk + self.sig

    @classmethod
    def decode(cls, data: bytes) -> BulletinEntry:
        try:
            index, kind, cycle, period, plen = struct.unpack_from(">QBQQI", data)
        except struct.error:
            raise ChainCorrupted("truncated entry header") from None
        pos = struct.calcsize(">QBQQI")
        payload = data[pos : pos + plen]
        pos += plen
        prev, eh = data[pos : pos + 32], data[pos + 32 : pos + 64]
        pos += 64
        if len(payload) != plen or len(eh) != 32 or pos >= len(data):
            raise ChainCorrupted("truncated entry")
        flag = data[pos]
        pos += 1
        vk = sig = None
        if flag == 1:
            vk, sig = data[pos : pos + 32], data[pos + 32 : pos + 96]
            pos += 96
        elif flag != 0:
            raise ChainCorrupted("bad signature flag")
        if pos != len(data) or (flag and len(sig) != 64):
            raise ChainCorrupted("entry length mismatch")
        try:
            kind = Kind(kind)
        except ValueError:
            raise ChainCorrupted(f"unknown kind {kind}") from None
        return cls(index, kind, cycle, period, bytes(payload), bytes(prev), bytes(eh), vk, sig)

    def signature_ok(self) -> bool:
        if self.sig is None:
            return False
        try:
            return verify_sig(
                self.vk, signed_message(self.kind, self.cycle, self.period, self.payload), self.sig
            )
        except ValueError:
            return False


def verify_chain(entries: Sequence[BulletinEntry]) -> bool:
    """True iff indices are gapless from 0, every hash recomputes and links,
    and every signed or signature-requiring entry carries a valid signature."""
    prev = ZERO_HASH
    for i, e in enumerate(entries):
        if e.index != i or e.prev_hash != prev:
            return False
        if entry_hash(e.index, e.kind, e.cycle, e.period, e.payload, e.prev_hash) != e.entry_hash:
            return False
        if (e.sig is not None or e.kind in SIGNED_KINDS) and not e.signature_ok():
            return False
        prev = e.entry_hash
    return True


class Board:
    """Board interface shared by the in-memory and file backends.

    Appends are serialized; reads see a consistent prefix.  Entries of
    ``SIGNED_KINDS`` must be signed, and when ``authorized`` is given the
    signer must be in it.  At most one entry per (signer, kind, cycle,
    period) is accepted for the kinds in ``unique_kinds``.
    """

    def __init__(self, authorized: Iterable[bytes] | None = None, unique_kinds=(Kind.REPORT,)):
        self.authorized = None if authorized is None else frozenset(authorized)
        self.unique_kinds = frozenset(unique_kinds)
        self._lock = threading.RLock()

    # backend hooks
    def _entries(self) -> list[BulletinEntry]:
        raise NotImplementedError

    def _persist(self, entry: BulletinEntry) -> None:
        raise NotImplementedError

    def _locked(self):
        return self._lock

    def append(
        self,
        kind: Kind,
        cycle: int,
        period: int,
        payload: bytes,
        vk: bytes | None = None,
        sig: bytes | None = None,
    ) -> int:
        kind = Kind(kind)
        if (sig is None) != (vk is None):
            raise InvalidSignature("signature and key must be given together")
        if sig is not None:
            try:
                ok = verify_sig(vk, signed_message(kind, cycle, period, payload), sig)
            except ValueError as exc:
                raise InvalidSignature(str(exc)) from None
            if not ok:
                raise InvalidSignature("signature does not verify")
            if self.authorized is not None and vk not in self.authorized:
                raise InvalidSignature("signer is not authorized")
        elif kind in SIGNED_KINDS:
            raise InvalidSignature(f"{kind.name} entries must be signed")
        with self._locked():
            entries = self._entries()
            if sig is not None and kind in self.unique_kinds:
                for e in entries:
                    if (e.kind, e.cycle, e.period, e.vk) == (kind, cycle, period, vk):
                        raise DuplicateEntry(
                            f"{kind.name} for cycle {cycle} period {period} already posted by this key"
                        )
            index = len(entries)
            prev = entries[-1].entry_hash if entries else ZERO_HASH
            eh = entry_hash(index, kind, cycle, period, payload, prev)
            entry = BulletinEntry(index, kind, cycle, period, bytes(payload), prev, eh, vk, sig)
            self._persist(entry)
            return index

    def append_signed(self, kind: Kind, cycle: int, period: int, payload: bytes, keys) -> int:
        sig = sign(keys.sk, signed_message(kind, cycle, period, payload))
        return self.append(kind, cycle, period, payload, keys.vk, sig)

    def read_range(self, start: int = 0, stop: int | None = None) -> list[BulletinEntry]:
        return list(self._entries()[start:stop])

    def read_kind(self, cycle: int, period: int, kind: Kind) -> list[BulletinEntry]:
        return [
            e for e in self._entries() if e.kind == kind and e.cycle == cycle and e.period == period
        ]

    def latest(self, cycle: int, period: int, kind: Kind) -> BulletinEntry | None:
        found = self.read_kind(cycle, period, kind)
        return found[-1] if found else None

    def __len__(self) -> int:
        return len(self._entries())

    def verify(self) -> bool:
        return verify_chain(self._entries())


class MemoryBoard(Board):
    def __init__(self, **kw):
        super().__init__(**kw)
        self._list: list[BulletinEntry] = []

    def _entries(self):
        return self._list

    def _persist(self, entry):
        self._list.append(entry)


def encode_file(entries: Iterable[BulletinEntry]) -> bytes:
    out = [MAGIC]
    for e in entries:
        rec = e.encode()
        out.append(struct.pack(">I", len(rec)) + rec)
    return b"".join(out)


def decode_file(data: bytes) -> list[BulletinEntry]:
    if data[: len(MAGIC)] != MAGIC:
        raise ChainCorrupted("bad magic")
    pos = len(MAGIC)
    out = []
    while pos < len(data):
        if pos + 4 > len(data):
            raise ChainCorrupted("truncated record length")
        (n,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise ChainCorrupted("truncated record")
        out.append(BulletinEntry.decode(data[pos : pos + n]))
        pos += n
    return out


class FileBoard(Board):
    """Single-file append-only log, safe for several processes on one host.

    Appends take an exclusive file lock; the cached view is refreshed
    whenever the file has grown since the last read.
    """

    def __init__(self, path, **kw):
        super().__init__(**kw)
        self.path = Path(path)
        self._flock = FileLock(str(self.path) + ".lock")
        self._cache: list[BulletinEntry] = []
        self._size = 0
        with self._flock:
            if not self.path.exists() or self.path.stat().st_size == 0:
                with open(self.path, "wb") as fh:
                    fh.write(MAGIC)
                    fh.flush()
                    os.fsync(fh.fileno())

    def _locked(self):
        return _Both(self._lock, self._flock)

    def _entries(self):
        with self._lock:
            size = self.path.stat().st_size
            if size != self._size:
                # a writer in another process may be mid-append
                with self._flock:
                    data = self.path.read_bytes()
                self._cache = decode_file(data)
                self._size = len(data)
            return self._cache

    def _persist(self, entry):
        rec = entry.encode()
        with open(self.path, "ab") as fh:
            fh.write(struct.pack(">I", len(rec)) + rec)
            fh.flush()
            os.fsync(fh.fileno())
        self._cache.append(entry)
        self._size = self.path.stat().st_size


class _Both:
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __enter__(self):
        self.a.__enter__()
        self.b.__enter__()

    def __exit__(self, *exc):
        self.b.__exit__(*exc)
        self.a.__exit__(*exc)


def verify_file(path) -> tuple[bool, str]:
    """Check a persisted board; returns (ok, reason)."""
    try:
        entries = decode_file(Path(path).read_bytes())
    except (ChainCorrupted, OSError) as exc:
        return False, str(exc)
    if not verify_chain(entries):
        return False, "hash chain or signature check failed"
    return True, f"{len(entries)} entries verified"
