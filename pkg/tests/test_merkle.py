import math
import random

import pytest
from hypothesis import given, strategies as st

from pptp.bulletin import Kind, MemoryBoard
from pptp.crypto import com_setup, com_sum, commit, count_ops, sig_keygen
from pptp.merkle import (
    AuditorReport,
    FraudProof,
    InclusionProof,
    ManualClock,
    MerkleAuditorView,
    MerkleUserView,
    QuorumStatus,
    RootEntry,
    Verdict,
    audit_tree,
    await_quorum,
    board_root,
    build_tree,
    check_fraud,
    evidence_gen_merkle,
    evidence_vrf_merkle,
    inclusion_proof,
    level_sizes,
    publish_report,
    tree_from_nodes,
    verify_inclusion,
)

from helpers import secrets_for, setup

COM = com_setup(128)
AUDITORS = [sig_keygen(bytes([40 + j]) * 32) for j in range(3)]


def leaves(n, seed=0):
    rng = random.Random(seed)
    return [commit(COM, rng.randrange(10), rng.randrange(1, 2**200)) for _ in range(n)]


def test_level_sizes():
    assert level_sizes(1) == [1]
    assert level_sizes(7) == [7, 4, 2, 1]
    assert level_sizes(8) == [8, 4, 2, 1]
    with pytest.raises(ValueError):
        level_sizes(0)


@given(st.integers(1, 40))
def test_tree_root_is_sum(n):
    ls = leaves(n, n)
    with count_ops() as ops:
        tree = build_tree(ls)
    assert tree.root == com_sum(ls)
    assert ops.commit == n - 1
    for i in range(n):
        G = inclusion_proof(tree, i)
        assert verify_inclusion(G)
        assert G.root == tree.root and G.leaf == ls[i]
        assert G.root_hash() == tree.root_hash
        assert InclusionProof.decode(G.encode()) == G


@pytest.mark.parametrize("n", [2, 8, 64, 1024])
def test_inclusion_size_power_of_two(n):
    tree = build_tree(leaves(n))
    for i in (0, n - 1):
        assert inclusion_proof(tree, i).commitment_count == 2 * int(math.log2(n)) + 1


def test_tampered_path_rejected():
    tree = build_tree(leaves(8))
    G = inclusion_proof(tree, 3)
    path = list(G.path)
    path[1] = path[1] + COM.G
    bad = InclusionProof(G.index, G.n, G.leaf_digest, tuple(path), G.siblings)
    assert not verify_inclusion(bad)
    moved = InclusionProof(4, G.n, G.leaf_digest, G.path, G.siblings)
    assert moved.root_hash() != tree.root_hash


def test_tree_from_nodes_round_trip():
    tree = build_tree(leaves(11))
    internal = [c for lv in reversed(tree.levels[1:]) for c in lv]
    again = tree_from_nodes(tree.levels[0], internal, tree.digests)
    assert again.root_hash == tree.root_hash
    with pytest.raises(ValueError):
        tree_from_nodes(tree.levels[0], internal[1:], tree.digests)


@pytest.fixture(scope="module")
def period():
    params, k_r, x, rng = setup(n=7, k=1, auditors=[a.vk for a in AUDITORS[:2]], f=1)
    board = MemoryBoard()
    with count_ops() as ops:
        ev = evidence_gen_merkle(params, k_r, x, 0, board, rng=rng)
    return params, k_r, x, board, ev, ops


def test_server_counts(period):
    params, *_, ops = period
    assert (ops.commit, ops.prove) == (2 * 7 - 1, 8)


def test_views_round_trip(period):
    params, k_r, x, board, ev, _ = period
    v = ev.user_view(3)
    assert MerkleUserView.decode(v.encode()) == v
    a = ev.auditor_view()
    assert MerkleAuditorView.decode(a.encode()) == a
    assert board_root(board, 0, 0) == ev.root_entry
    assert RootEntry.decode(ev.root_entry.encode()) == ev.root_entry


def test_two_phase_accept(period):
    params, k_r, x, board, ev, _ = period
    board = MemoryBoard(authorized=None)
    board.append(Kind.ROOT, 0, 0, ev.root_entry.encode())
    for a in AUDITORS[:2]:
        with count_ops() as ops:
            assert evidence_vrf_merkle(params, None, None, ev.auditor_view(), 0, board, "auditor", keys=a)
        assert ops.verify == 7
    rs = secrets_for(params, k_r)
    for i in range(7):
        with count_ops() as ops:
            assert evidence_vrf_merkle(params, rs[i], x[i], ev.user_view(i), 0, board, clock=ManualClock())
        assert (ops.commit, ops.verify) == (1, 1)


def test_quorum_needs_f_plus_one(period):
    params, k_r, x, _, ev, _ = period
    board = MemoryBoard()
    board.append(Kind.ROOT, 0, 0, ev.root_entry.encode())
    publish_report(board, AuditorReport(0, 0, Verdict.OK).signed(AUDITORS[0]))
    clock = ManualClock()
    res = await_quorum(board, params, 0, 1, 2.0, clock)
    assert res.status is QuorumStatus.TIMEOUT and clock.now() >= 2.0
    # an unregistered signer does not count
    publish_report(board, AuditorReport(0, 0, Verdict.OK).signed(AUDITORS[2]))
    assert await_quorum(board, params, 0, 1, 1.0, ManualClock()).status is QuorumStatus.TIMEOUT
    publish_report(board, AuditorReport(0, 0, Verdict.OK).signed(AUDITORS[1]))
    assert await_quorum(board, params, 0, 1, 1.0, ManualClock())


def test_late_report_arrives_while_waiting(period):
    params, k_r, x, _, ev, _ = period
    board = MemoryBoard()
    board.append(Kind.ROOT, 0, 0, ev.root_entry.encode())
    publish_report(board, AuditorReport(0, 0, Verdict.OK).signed(AUDITORS[0]))

    def later(now):
        if now >= 0.5 and len(board) == 2:
            publish_report(board, AuditorReport(0, 0, Verdict.OK).signed(AUDITORS[1]))

    assert await_quorum(board, params, 0, 1, 5.0, ManualClock(on_sleep=later))


def test_bad_leaf_yields_checkable_fraud(period):
    params, k_r, x, _, ev, _ = period
    rs = secrets_for(params, k_r)
    bad = list(ev.tree.levels[0])
    bad[2] = commit(params.com, 9, rs[2])
    tree = build_tree(bad, ev.tree.digests)
    root = RootEntry(tree.root, tree.root_hash)
    view = MerkleAuditorView(0, 0, tuple(bad), tuple(ev.proofs), tuple(c for lv in reversed(tree.levels[1:]) for c in lv))
    verdict, fraud = audit_tree(params, view, root)
    assert verdict == Verdict.FRAUD and fraud.target == 2
    assert check_fraud(params, FraudProof.decode(fraud.encode()), root, 0)
    # the same material does not convict the honest tree
    assert not check_fraud(params, fraud, ev.root_entry, 0)


def test_honest_tree_cannot_be_framed(period):
    params, k_r, x, _, ev, _ = period
    root = ev.root_entry
    G = inclusion_proof(ev.tree, 1)
    assert not check_fraud(params, FraudProof(G), root, 0)
    assert not check_fraud(params, FraudProof(G, ev.proofs[1]), root, 0)
    assert not check_fraud(params, FraudProof(G, ev.proofs[2]), root, 0)


def test_fraud_on_board_overrides_quorum(period):
    params, k_r, x, _, ev, _ = period
    tree = ev.tree
    levels = [list(lv) for lv in tree.levels]
    levels[-1][0] = levels[-1][0] + params.com.G
    forged = tree_from_nodes(levels[0], [c for lv in reversed(levels[1:]) for c in lv], tree.digests)
    board = MemoryBoard()
    board.append(Kind.ROOT, 0, 0, RootEntry(forged.root, forged.root_hash).encode())
    view = MerkleAuditorView(0, 0, tuple(levels[0]), tuple(ev.proofs), tuple(c for lv in reversed(levels[1:]) for c in lv))
    publish_report(board, AuditorReport(0, 0, Verdict.OK).signed(AUDITORS[0]))
    assert not evidence_vrf_merkle(params, None, None, view, 0, board, "auditor", keys=AUDITORS[1])
    res = await_quorum(board, params, 0, 0, 1.0, ManualClock())
    assert res.status is QuorumStatus.FRAUD_DETECTED


def test_auditor_view_not_on_board_is_empty(period):
    params, k_r, x, _, ev, _ = period
    other = RootEntry(ev.tree.root, b"\x00" * 32)
    assert audit_tree(params, ev.auditor_view(), other) == (Verdict.EMPTY, None)
    assert audit_tree(params, ev.auditor_view(), None) == (Verdict.EMPTY, None)


def test_report_signing(period):
    rep = AuditorReport(0, 0, Verdict.OK).signed(AUDITORS[0])
    board = MemoryBoard()
    publish_report(board, rep)
    assert AuditorReport.from_entry(board.read_range()[0]) == rep
    with pytest.raises(Exception):
        publish_report(board, AuditorReport(0, 0, Verdict.FRAUD, None).signed(AUDITORS[0]))
