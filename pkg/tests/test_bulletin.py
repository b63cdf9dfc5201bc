import random

import pytest

from pptp.bulletin import (
    ChainCorrupted,
    DuplicateEntry,
    FileBoard,
    InvalidSignature,
    Kind,
    MemoryBoard,
    decode_file,
    encode_file,
    verify_chain,
    verify_file,
)
from pptp.crypto import sig_keygen

KEYS = sig_keygen(b"\x07" * 32)


def fill(board):
    board.append(Kind.DIGEST, 0, 0, b"d" * 32)
    board.append(Kind.ROOT, 0, 1, b"r" * 64)
    board.append_signed(Kind.REPORT, 0, 0, b"\x01\x00", KEYS)
    board.append_signed(Kind.FRAUD, 0, 1, b"proof", KEYS)
    return board


def test_append_and_read():
    b = fill(MemoryBoard())
    assert len(b) == 4
    assert [e.index for e in b.read_range()] == [0, 1, 2, 3]
    assert b.read_kind(0, 0, Kind.DIGEST)[0].payload == b"d" * 32
    assert b.latest(0, 1, Kind.FRAUD).vk == KEYS.vk
    assert b.latest(5, 5, Kind.ROOT) is None
    assert b.verify()


def test_signed_kinds_need_signatures():
    b = MemoryBoard()
    with pytest.raises(InvalidSignature):
        b.append(Kind.REPORT, 0, 0, b"x")
    with pytest.raises(InvalidSignature):
        b.append(Kind.REPORT, 0, 0, b"x", KEYS.vk, b"\x00" * 64)
    other = sig_keygen(b"\x08" * 32)
    restricted = MemoryBoard(authorized=[KEYS.vk])
    with pytest.raises(InvalidSignature):
        restricted.append_signed(Kind.REPORT, 0, 0, b"x", other)
    restricted.append_signed(Kind.REPORT, 0, 0, b"x", KEYS)


def test_duplicate_report_rejected():
    b = MemoryBoard()
    b.append_signed(Kind.REPORT, 0, 0, b"\x01\x00", KEYS)
    with pytest.raises(DuplicateEntry):
        b.append_signed(Kind.REPORT, 0, 0, b"\x01\x01", KEYS)
    b.append_signed(Kind.REPORT, 0, 1, b"\x01\x00", KEYS)
    b.append_signed(Kind.FRAUD, 0, 1, b"a", KEYS)
    b.append_signed(Kind.FRAUD, 0, 1, b"b", KEYS)


def test_chain_detects_edits():
    entries = fill(MemoryBoard()).read_range()
    assert verify_chain(entries)
    e = entries[1]
    forged = type(e)(e.index, e.kind, e.cycle, e.period, b"x" * 64, e.prev_hash, e.entry_hash, e.vk, e.sig)
    assert not verify_chain(entries[:1] + [forged] + entries[2:])
    assert not verify_chain(entries[1:])
    assert not verify_chain([entries[1], entries[0]] + entries[2:])


def test_file_round_trip(tmp_path):
    path = tmp_path / "board.log"
    b = fill(FileBoard(path))
    again = FileBoard(path)
    assert [e.encode() for e in again.read_range()] == [e.encode() for e in b.read_range()]
    again.append(Kind.SCHEDULE, 1, 0, b"s")
    assert len(b) == 5  # the first handle sees the other's append
    assert verify_file(path)[0]
    assert decode_file(encode_file(b.read_range())) == b.read_range()


def test_truncated_file_is_corrupt(tmp_path):
    path = tmp_path / "board.log"
    fill(FileBoard(path))
    data = path.read_bytes()
    with pytest.raises(ChainCorrupted):
        decode_file(data[:-3])
    path.write_bytes(data[:-3])
    assert not verify_file(path)[0]


def test_single_byte_mutations_detected(tmp_path):
    path = tmp_path / "board.log"
    fill(FileBoard(path))
    data = path.read_bytes()
    rng = random.Random(0)
    for _ in range(100):
        buf = bytearray(data)
        buf[rng.randrange(len(buf))] ^= rng.randrange(1, 256)
        path.write_bytes(bytes(buf))
        assert not verify_file(path)[0]


def test_missing_file(tmp_path):
    ok, reason = verify_file(tmp_path / "absent.log")
    assert not ok and reason
