import hashlib
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from pptp.crypto import (
    RetailerKey,
    UnsupportedParameter,
    com_add,
    com_setup,
    com_sum,
    commit,
    count_ops,
    decode_commitment,
    hash_bytes,
    prf_eval,
    prf_keygen,
    random_scalar,
    sig_keygen,
    sign,
    verify_sig,
)
from pptp.group import Point, Q

COM = com_setup(128)
scalars = st.integers(min_value=0, max_value=Q - 1)

# frozen vectors, cross-checked against libsodium and an independent HMAC
COMMIT_1_1 = "06186f1902a01b80aa1e67ffece805953523df4dbe3e596d878c984e8a88db46"
H_ENC = "60ed628738bd37e15474f9f2207d9e980d5a0eabb431d3c94f6a11d92a841c01"
PRF_ZERO_KEY_1_2 = 2108161605728742127733244599483439907748796622697604249145088231984088672700
SHA256_EMPTY = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_setup_deterministic_and_generators_sane():
    again = com_setup(128)
    assert again.G == COM.G and again.H == COM.H
    assert COM.H != COM.G and not COM.H.is_identity()
    assert Point.decode(COM.G.encode()).encode() == COM.G.encode()
    assert COM.H.encode().hex() == H_ENC


def test_setup_rejects_other_levels():
    with pytest.raises(UnsupportedParameter):
        com_setup(256)


def test_commit_vectors():
    assert commit(COM, 0, 0).is_identity()
    assert commit(COM, 1, 1).encode().hex() == COMMIT_1_1
    assert commit(COM, 5, 7) == commit(COM, 5, 7)


def test_commit_vector_oracle():
    pysodium = pytest.importorskip("pysodium")
    g = pysodium.crypto_scalarmult_ristretto255_base((1).to_bytes(32, "little"))
    h = hashlib.sha512()
    for part in (b"pptp/commitment/H", g):
        h.update(len(part).to_bytes(8, "big") + part)
    H = pysodium.crypto_core_ristretto255_from_hash(h.digest())
    assert pysodium.crypto_core_ristretto255_add(g, H).hex() == COMMIT_1_1


@pytest.mark.parametrize("v,r", [(-1, 0), (Q, 0), (0, Q), (0, -5)])
def test_commit_range_checked(v, r):
    with pytest.raises(ValueError):
        commit(COM, v, r)


@given(scalars, scalars, scalars, scalars)
def test_homomorphism(v0, r0, v1, r1):
    assert com_add(commit(COM, v0, r0), commit(COM, v1, r1)) == commit(COM, (v0 + v1) % Q, (r0 + r1) % Q)


def test_identity_and_small_sum():
    rng = random.Random(2)
    r1, r2 = random_scalar(rng), random_scalar(rng)
    c = commit(COM, 9, r1)
    assert com_add(c, commit(COM, 0, 0)) == c
    assert com_add(commit(COM, 2, r1), commit(COM, 3, r2)) == commit(COM, 5, (r1 + r2) % Q)


def test_fold_of_64():
    rng = random.Random(3)
    vs = [rng.randrange(1000) for _ in range(64)]
    rs = [random_scalar(rng) for _ in range(64)]
    assert com_sum(commit(COM, v, r) for v, r in zip(vs, rs)) == commit(COM, sum(vs), sum(rs) % Q)


def test_commit_counts_and_decode():
    with count_ops() as ops:
        c = commit(COM, 1, 2)
    assert ops.commit == 1
    assert decode_commitment(c.encode()) == c
    with pytest.raises(ValueError):
        decode_commitment(b"\xff" * 32)


def test_hiding_smoke():
    rng = random.Random(4)
    cs = {commit(COM, 3, random_scalar(rng)).encode() for _ in range(300)}
    assert len(cs) == 300
    a = Counter(commit(COM, 3, random_scalar(rng)).encode()[0] >> 4 for _ in range(5000))
    b = Counter(commit(COM, 4, random_scalar(rng)).encode()[0] >> 4 for _ in range(5000))
    # chi-square over the two 16-bucket histograms; df=15, 0.1% critical value ~37.7
    chi = sum((a[k] - b[k]) ** 2 / (a[k] + b[k]) for k in range(16) if a[k] + b[k])
    assert chi < 37.7


def test_prf():
    k = prf_keygen(128, random.Random(0))
    assert len(k.key) == 16
    assert prf_keygen(128) != prf_keygen(128)
    assert prf_eval(k, 3, 4) == prf_eval(k, 3, 4)
    assert prf_eval(k, 1, 2) != prf_eval(k, 2, 1)
    assert 0 <= prf_eval(k, 0, 0) < Q
    assert prf_eval(RetailerKey(bytes(16)), 1, 2) == PRF_ZERO_KEY_1_2


def test_prf_no_collisions():
    k = prf_keygen(128, random.Random(9))
    out = {prf_eval(k, i, t) for i in range(2000) for t in range(50)}
    assert len(out) == 100_000


def test_binding_smoke():
    rng = random.Random(10)
    seen = {}
    for _ in range(100_000):
        v, r = rng.randrange(2**32), random_scalar(rng)
        enc = commit(COM, v, r).encode()
        assert seen.setdefault(enc, (v, r)) == (v, r)


def test_hash_bytes():
    assert hash_bytes(b"").hex() == SHA256_EMPTY
    assert hash_bytes(b"a") != hash_bytes(b"b")
    assert hash_bytes(b"abc") == hash_bytes(b"abc")


def test_signatures():
    kp = sig_keygen(b"\x01" * 32)
    other = sig_keygen(b"\x02" * 32)
    sig = sign(kp.sk, b"report")
    assert verify_sig(kp.vk, b"report", sig)
    assert not verify_sig(kp.vk, b"reporu", sig)
    assert not verify_sig(other.vk, b"report", sig)
    assert sig_keygen(b"\x01" * 32).vk == kp.vk
    with pytest.raises(ValueError):
        verify_sig(b"short", b"report", sig)
