import pytest

from pptp.crypto import commit, count_ops
from pptp.group import Q
from pptp.protocol import (
    SystemParams,
    VerificationCache,
    check_measurements,
    slot_secret_gen,
    sum_statement,
    sum_witness,
)
from pptp.rangeproof import WitnessOutOfRange, zk_prove, zk_verify

from helpers import setup


def test_params_round_trip():
    params, k_r, _, _ = setup(auditors=(b"\x01" * 32,), f=0)
    again = SystemParams.decode(params.encode())
    assert again.encode() == params.encode() and again.digest() == params.digest()
    assert again.n == 8 and again.k == 2


def test_slot_secrets_deterministic():
    params, k_r, _, _ = setup()
    a = slot_secret_gen(params, k_r, 1)
    assert a == slot_secret_gen(params, k_r, 1)
    assert len(set(a)) == len(a) and all(0 <= r < Q for r in a)
    assert a != slot_secret_gen(params, k_r, 0)
    with pytest.raises(IndexError):
        slot_secret_gen(params, k_r, 2)


def test_check_measurements():
    params, _, x, _ = setup()
    check_measurements(params, x, 0)
    with pytest.raises(WitnessOutOfRange):
        check_measurements(params, [8] + x[1:], 0)
    with pytest.raises(ValueError):
        check_measurements(params, x[:-1], 0)


@pytest.mark.parametrize("x_star", [0, 20, 21, 56])
def test_sum_statement_both_sides(x_star):
    params, _, _, _ = setup()
    r = 12345
    c = commit(params.com, x_star, r)
    peak = x_star > 20
    target, bound = sum_statement(params, c, 0, peak)
    w = sum_witness(params, x_star, 0, peak)
    assert zk_verify(params.zk, target, bound, zk_prove(params.zk, target, bound, w, r))


def test_wrong_side_cannot_be_proven():
    params, _, _, _ = setup()
    c = commit(params.com, 21, 5)
    target, bound = sum_statement(params, c, 0, False)
    with pytest.raises(WitnessOutOfRange):
        zk_prove(params.zk, target, bound, 21, 5)
    c = commit(params.com, 20, 5)
    target, bound = sum_statement(params, c, 0, True)
    with pytest.raises(WitnessOutOfRange):
        zk_prove(params.zk, target, bound, sum_witness(params, 20, 0, True), 5)


def test_cache_counts_hits():
    cache = VerificationCache()
    calls = []
    fn = lambda: calls.append(1) or True
    with count_ops() as ops:
        assert cache.run(b"k", fn, 5)
        assert cache.run(b"k", fn, 5)
    assert len(calls) == 1 and ops.verify == 5  # fn itself counted nothing
    assert cache.hits == 1 and cache.misses == 1
    assert VerificationCache.key(b"a", b"bc") != VerificationCache.key(b"ab", b"c")
