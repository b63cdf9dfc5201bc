import random

import pytest

from pptp.baseline import (
    BaselineEvidence,
    board_digest,
    evidence_gen,
    evidence_size,
    evidence_vrf,
    verify_range_proofs,
    verify_sum,
)
from pptp.bulletin import Kind, MemoryBoard
from pptp.crypto import count_ops
from pptp.protocol import VerificationCache

from helpers import secrets_for, setup


@pytest.fixture(scope="module")
def honest():
    params, k_r, x, rng = setup(n=8, k=2)
    board = MemoryBoard()
    with count_ops() as ops:
        ev = evidence_gen(params, k_r, x, 1, board, rng=rng)
    return params, k_r, x, board, ev, ops


def test_server_counts(honest):
    *_, ops = honest
    assert (ops.commit, ops.prove) == (9, 9)


def test_every_user_accepts(honest):
    params, k_r, x, board, ev, _ = honest
    rs = secrets_for(params, k_r, 1)
    for i in range(params.n):
        with count_ops() as ops:
            assert evidence_vrf(params, rs[i], x[i], ev, 1, board, i)
        assert (ops.commit, ops.verify) == (1, 9)


def test_encoding(honest):
    params, _, _, board, ev, _ = honest
    assert BaselineEvidence.decode(ev.encode()) == ev
    assert board_digest(board, 0, 1) == ev.digest()
    assert evidence_size(ev) == len(ev.encode())
    with pytest.raises(ValueError):
        BaselineEvidence.decode(ev.encode() + b"\x00")


def test_wrong_reading_or_secret_rejected(honest):
    params, k_r, x, board, ev, _ = honest
    rs = secrets_for(params, k_r, 1)
    other = (x[0] + 1) % 8
    assert not evidence_vrf(params, rs[0], other, ev, 1, board, 0)
    assert not evidence_vrf(params, rs[1], x[0], ev, 1, board, 0)
    assert not evidence_vrf(params, rs[0], x[0], ev, 0, board, 0)
    assert not evidence_vrf(params, rs[0], x[0], ev, 1, MemoryBoard(), 0)


def test_swapped_commitments_rejected(honest):
    params, k_r, x, board, ev, _ = honest
    cs = list(ev.commitments)
    cs[0], cs[1] = cs[1], cs[0]
    forged = BaselineEvidence(ev.cycle, ev.period, ev.peak, ev.c_star, ev.pi_star, tuple(cs), ev.proofs)
    assert verify_sum(params, forged)
    assert not verify_range_proofs(params, forged)


def test_first_digest_wins(honest):
    params, k_r, x, board, ev, _ = honest
    b = MemoryBoard()
    b.append(Kind.DIGEST, 0, 1, ev.digest())
    b.append(Kind.DIGEST, 0, 1, b"\x00" * 32)
    rs = secrets_for(params, k_r, 1)
    assert evidence_vrf(params, rs[2], x[2], ev, 1, b, 2)


def test_peak_period():
    params, k_r, _, rng = setup(n=4, k=1, gamma=5, delta=7)
    x = [7, 7, 0, 0]
    board = MemoryBoard()
    ev = evidence_gen(params, k_r, x, 0, board, rng=rng)
    assert ev.peak
    rs = secrets_for(params, k_r)
    cache = VerificationCache()
    assert all(evidence_vrf(params, rs[i], x[i], ev, 0, board, i, cache=cache) for i in range(4))
    assert cache.misses == 1
    flipped = BaselineEvidence(ev.cycle, ev.period, False, ev.c_star, ev.pi_star, ev.commitments, ev.proofs)
    assert not verify_sum(params, flipped)


def test_workers_give_same_evidence():
    params, k_r, x, _ = setup(n=3, k=1)
    a = evidence_gen(params, k_r, x, 0, rng=random.Random(4))
    b = evidence_gen(params, k_r, x, 0, rng=random.Random(4), workers=2)
    assert a.encode() == b.encode()
