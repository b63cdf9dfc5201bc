import random
from fractions import Fraction

import pytest

from pptp.audit import (
    FetchError,
    check_target,
    hypergeom_pmf,
    miss_probability_bound,
    pick_targets,
    simulate_misses,
    spot_check,
)
from pptp.bulletin import Kind, MemoryBoard
from pptp.crypto import commit, sig_keygen
from pptp.merkle import (
    FraudProof,
    RootEntry,
    build_tree,
    check_fraud,
    evidence_gen_merkle,
    find_fraud,
    inclusion_proof,
)

from helpers import secrets_for, setup


def test_pick_targets():
    plan = pick_targets(3, 10, 5, random.Random(1))
    assert len(set(plan.targets)) == 5 and 3 not in plan.targets
    assert all(0 <= j < 10 for j in plan.targets)
    assert pick_targets(3, 10, 5, 7) == pick_targets(3, 10, 5, 7)
    with pytest.raises(ValueError):
        pick_targets(0, 10, 10)
    assert pick_targets(0, 1, 0).targets == ()


def test_hypergeometric_sums_to_one():
    n, f, z = 30, 6, 8
    assert sum(hypergeom_pmf(n, f, z, u) for u in range(min(f, z) + 1)) == 1


def test_miss_probability():
    m = miss_probability_bound(100, 10, 50, 5)
    assert m.bound == Fraction(89, 99) ** 250
    assert m.exact <= m.bound
    assert miss_probability_bound(100, 0, 50, 5).bound == 1
    assert miss_probability_bound(100, 10, 0, 5).exact == 1
    assert miss_probability_bound(100, 99, 1, 1).bound == 0
    with pytest.raises(ValueError):
        miss_probability_bound(10, 10, 1, 1)


def test_simulate_misses_extremes():
    assert simulate_misses(10, [0, 1], 3, 50, lambda j: False) == 50
    assert simulate_misses(10, [0, 1], 9, 50, lambda j: j == 5) == 0


@pytest.fixture(scope="module")
def cheating_tree():
    params, k_r, x, rng = setup(n=6, k=1)
    ev = evidence_gen_merkle(params, k_r, x, 0, rng=rng)
    rs = secrets_for(params, k_r)
    bad = list(ev.tree.levels[0])
    bad[4] = commit(params.com, 100, rs[4])
    tree = build_tree(bad, ev.tree.digests)
    board = MemoryBoard()
    board.append(Kind.ROOT, 0, 0, RootEntry(tree.root, tree.root_hash).encode())
    return params, ev, tree, board


def test_spot_check_finds_bad_leaf(cheating_tree):
    params, ev, tree, board = cheating_tree
    keys = sig_keygen(b"\x09" * 32)

    def fetch(j):
        if j == 2:
            raise FetchError("withheld")
        return inclusion_proof(tree, j), ev.proofs[j]

    verdict = spot_check(params, pick_targets(0, 6, 5, 0), fetch, board, 0, keys=keys)
    assert [j for j, _ in verdict.frauds] == [4]
    assert verdict.unavailable == [2]
    assert not verdict.clean
    assert len(board.read_kind(0, 0, Kind.FRAUD)) == 1
    assert len(board.read_kind(0, 0, Kind.UNAVAILABLE)) == 1
    assert find_fraud(params, board, 0, 0).target == 4


def test_material_off_board_proves_nothing(cheating_tree):
    params, ev, tree, board = cheating_tree
    root = RootEntry(tree.root, tree.root_hash)
    honest_G = inclusion_proof(ev.tree, 1)
    assert check_target(params, 1, honest_G, ev.proofs[1], root, 0) is False
    assert check_target(params, 1, inclusion_proof(tree, 1), ev.proofs[1], root, 0) is None
    fraud = check_target(params, 4, inclusion_proof(tree, 4), ev.proofs[4], root, 0)
    assert isinstance(fraud, FraudProof) and check_fraud(params, fraud, root, 0)
