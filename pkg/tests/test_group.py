import hashlib
import os
import random

import pytest
from hypothesis import given, strategies as st

from pptp.group import DecodeError, Point, Q, msm, point_sum

pysodium = pytest.importorskip("pysodium")

scalars = st.integers(min_value=0, max_value=Q - 1)


def le(k):
    return (k % Q).to_bytes(32, "little")


def test_base_point_matches_libsodium():
    assert Point.base().encode() == pysodium.crypto_scalarmult_ristretto255_base(le(1))


@given(scalars)
def test_fixed_base_mult_matches_libsodium(k):
    want = pysodium.crypto_scalarmult_ristretto255_base(le(k)) if k else bytes(32)
    assert (k * Point.base().fixed_base(8)).encode() == want
    assert (k * Point.base()).encode() == want


@given(st.binary(min_size=64, max_size=64), scalars)
def test_hash_to_group_and_variable_mult_match_libsodium(h, k):
    p = Point.from_uniform_bytes(h)
    assert p.encode() == pysodium.crypto_core_ristretto255_from_hash(h)
    if k and not p.is_identity():
        assert (k * p).encode() == pysodium.crypto_scalarmult_ristretto255(le(k), p.encode())


def test_addition_matches_libsodium():
    a = Point.from_uniform_bytes(os.urandom(64))
    b = Point.from_uniform_bytes(os.urandom(64))
    assert (a + b).encode() == pysodium.crypto_core_ristretto255_add(a.encode(), b.encode())
    assert (a - b).encode() == pysodium.crypto_core_ristretto255_sub(a.encode(), b.encode())


def test_encoding_round_trip_and_canonicity():
    p = Point.hash_to_group(b"test", b"point")
    assert Point.decode(p.encode()) == p
    assert Point.decode(p.encode()).encode() == p.encode()
    # the field prime itself is a non-canonical encoding of zero
    p_enc = (2**255 - 19).to_bytes(32, "little")
    with pytest.raises(DecodeError):
        Point.decode(p_enc)
    with pytest.raises(DecodeError):
        Point.decode(b"\x01" + bytes(31))  # negative field element
    with pytest.raises(DecodeError):
        Point.decode(bytes(31))


def test_random_bytes_mostly_rejected():
    rng = random.Random(1)
    accepted = 0
    for _ in range(200):
        data = rng.getrandbits(256).to_bytes(32, "little")
        try:
            Point.decode(data)
            accepted += 1
        except DecodeError:
            pass
    assert accepted < 60


def test_identity_encodes_to_zero():
    assert Point.identity().encode() == bytes(32)
    assert Point.identity().is_identity()
    g = Point.base()
    assert g + Point.identity() == g
    assert (Q * g).is_identity()


def test_msm_matches_naive_sum():
    rng = random.Random(5)
    pts = [Point.hash_to_group(b"msm", bytes([i])) for i in range(9)]
    ks = [rng.randrange(Q) for _ in pts]
    fixed = Point.base().fixed_base(8)
    naive = point_sum(k * p for k, p in zip(ks, pts))
    assert msm(ks, pts) == naive
    k0 = rng.randrange(Q)
    assert msm(ks + [k0], pts + [fixed]) == naive + k0 * Point.base()


def test_hash_to_group_is_length_prefixed():
    assert Point.hash_to_group(b"ab", b"c") != Point.hash_to_group(b"a", b"bc")
    h = hashlib.sha512()
    for part in (b"x", b"y"):
        h.update(len(part).to_bytes(8, "big") + part)
    assert Point.hash_to_group(b"x", b"y").encode() == pysodium.crypto_core_ristretto255_from_hash(h.digest())
