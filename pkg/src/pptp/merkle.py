"""Homomorphic commitment tree evidence.

Leaves are the users' commitments in index order.  Level ``j`` has
``ceil(n / 2^j)`` nodes, so every leaf sits at depth ``m = ceil(log2 n)``;
an internal node is the sum of its children, and a missing right child
counts as ``commit(0, 0)``.

Alongside the commitments the retailer keeps a hash tree of the same
shape::

    leaf:     SHA-256(0x00 | index u64 | c_i | SHA-256(pi_i))
    internal: SHA-256(0x01 | c_v | h_left | h_right or 32 zero bytes)

The board's ROOT entry carries ``c_root | h_root``.  The hash binds every
node commitment and leaf proof, so an inclusion proof whose hashes reach
``h_root`` but whose sums break is itself evidence of retailer fraud.
Auditors publish signed reports; users wait for ``f + 1`` OK reports
and reject on any fraud report that re-checks.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from .bulletin import Board, BulletinEntry, Kind, signed_message
from .codec import Reader, Writer
from .crypto import Commitment, RetailerKey, SigKeyPair, commit, hash_bytes, record, sign
from .group import Point, Q
from .protocol import (
    SystemParams,
    VerificationCache,
    check_measurements,
    slot_secret_gen,
    sum_statement,
    sum_witness,
)
from .rangeproof import zk_prove, zk_prove_many, zk_verify, zk_verify_all

ZERO32 = bytes(32)
_VERSION = 1


def level_sizes(n: int) -> list[int]:
    if n < 1:
        raise ValueError("tree needs at least one leaf")
    sizes = [n]
    while sizes[-1] > 1:
        sizes.append((sizes[-1] + 1) // 2)
    return sizes


def leaf_hash(index: int, c: Point, proof_digest: bytes) -> bytes:
    return hash_bytes(b"\x00" + index.to_bytes(8, "big") + c.encode() + proof_digest)


def node_hash(c: Point, h_left: bytes, h_right: bytes | None) -> bytes:
    return hash_bytes(b"\x01" + c.encode() + h_left + (h_right or ZERO32))


# --- tree ------------------------------------------------------------------------


@dataclass
class CommitTree:
    """Commitments and hashes per level; ``levels[0]`` are the leaves."""

    levels: list[list[Point]]
    hashes: list[list[bytes]]
    digests: list[bytes]

    @property
    def n(self) -> int:
        return len(self.levels[0])

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def root(self) -> Point:
        return self.levels[-1][0]

    @property
    def root_hash(self) -> bytes:
        return self.hashes[-1][0]

    @property
    def node_count(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def level_order(self) -> list[Point]:
        """All node commitments, root first, each level left to right."""
        return [c for lv in reversed(self.levels) for c in lv]


def _hash_levels(levels: list[list[Point]], digests: Sequence[bytes]) -> list[list[bytes]]:
    hashes = [[leaf_hash(i, c, d) for i, (c, d) in enumerate(zip(levels[0], digests))]]
    for j in range(1, len(levels)):
        below = hashes[j - 1]
        row = []
        for k, c in enumerate(levels[j]):
            right = below[2 * k + 1] if 2 * k + 1 < len(below) else None
            row.append(node_hash(c, below[2 * k], right))
        hashes.append(row)
    return hashes


def build_tree(
    leaf_commitments: Sequence[Commitment], proof_digests: Sequence[bytes] | None = None
) -> CommitTree:
    """Sum leaves pairwise up to the root.

    Each two-child node is one homomorphic combination (counted as a
    commit); single-child nodes pass their child through unchanged.
    """
    leaves = list(leaf_commitments)
    sizes = level_sizes(len(leaves))
    if proof_digests is None:
        proof_digests = [ZERO32] * len(leaves)
    elif len(proof_digests) != len(leaves):
        raise ValueError("one proof digest per leaf")
    levels = [leaves]
    for size in sizes[1:]:
        below = levels[-1]
        row = []
        for k in range(size):
            if 2 * k + 1 < len(below):
                record("commit")
                row.append(below[2 * k] + below[2 * k + 1])
            else:
                row.append(below[2 * k])
        levels.append(row)
    return CommitTree(levels, _hash_levels(levels, proof_digests), list(proof_digests))


def tree_from_nodes(
    leaves: Sequence[Point], internal_level_order: Sequence[Point], digests: Sequence[bytes]
) -> CommitTree:
    """Rebuild a tree exactly as presented (no sums recomputed)."""
    sizes = level_sizes(len(leaves))
    if len(internal_level_order) != sum(sizes[1:]):
        raise ValueError("wrong number of internal nodes")
    # internal nodes arrive root first; peel levels off the end, bottom up
    levels = [list(leaves)]
    pos = len(internal_level_order)
    for size in sizes[1:]:
        levels.append(list(internal_level_order[pos - size : pos]))
        pos -= size
    return CommitTree(levels, _hash_levels(levels, digests), list(digests))


# --- inclusion proofs --------------------------------------------------------------


@dataclass(frozen=True)
class Sibling:
    """A sibling's commitment plus the rest of its hash preimage.

    For a leaf sibling ``opening`` is its proof digest; for an internal
    sibling it is ``h_left`` followed by ``h_right`` (zeros when absent).
    """

    c: Point
    opening: bytes

    def hash(self, index: int, is_leaf: bool) -> bytes:
        if is_leaf:
            return leaf_hash(index, self.c, self.opening)
        h_right = self.opening[32:]
        return node_hash(self.c, self.opening[:32], None if h_right == ZERO32 else h_right)


@dataclass(frozen=True)
class InclusionProof:
    index: int
    n: int
    leaf_digest: bytes
    path: tuple[Point, ...]
    siblings: tuple[Sibling | None, ...]

    @property
    def leaf(self) -> Point:
        return self.path[0]

    @property
    def root(self) -> Point:
        return self.path[-1]

    @property
    def commitment_count(self) -> int:
        return len(self.path) + sum(s is not None for s in self.siblings)

    def well_formed(self) -> bool:
        try:
            sizes = level_sizes(self.n)
        except ValueError:
            return False
        m = len(sizes) - 1
        if not 0 <= self.index < self.n or len(self.path) != m + 1 or len(self.siblings) != m:
            return False
        if len(self.leaf_digest) != 32:
            return False
        for j, sib in enumerate(self.siblings):
            present = ((self.index >> j) ^ 1) < sizes[j]
            if present != (sib is not None):
                return False
            if sib is not None and len(sib.opening) != (32 if j == 0 else 64):
                return False
        return True

    def sums_ok(self) -> bool:
        for j, sib in enumerate(self.siblings):
            expected = self.path[j] if sib is None else self.path[j] + sib.c
            if expected != self.path[j + 1]:
                return False
        return True

    def root_hash(self) -> bytes:
        h = leaf_hash(self.index, self.path[0], self.leaf_digest)
        for j, sib in enumerate(self.siblings):
            idx = self.index >> j
            sh = None if sib is None else sib.hash(idx ^ 1, j == 0)
            h = node_hash(self.path[j + 1], h, sh) if idx % 2 == 0 else node_hash(
                self.path[j + 1], sh, h
            )
        return h

    def encode(self) -> bytes:
        w = Writer().u64(self.index).u64(self.n).raw(self.leaf_digest).u8(len(self.siblings))
        for p in self.path:
            w.point(p)
        for sib in self.siblings:
            if sib is None:
                w.u8(0)
            else:
                w.u8(1).point(sib.c).var(sib.opening)
        return w.getvalue()

    @classmethod
    def read(cls, r: Reader) -> InclusionProof:
        index, n, digest, m = r.u64(), r.u64(), r.raw(32), r.u8()
        path = tuple(r.point() for _ in range(m + 1))
        sibs = []
        for _ in range(m):
            flag = r.u8()
            if flag == 0:
                sibs.append(None)
            elif flag == 1:
                sibs.append(Sibling(r.point(), r.var()))
            else:
                raise ValueError("bad sibling flag")
        return cls(index, n, digest, path, tuple(sibs))

    @classmethod
    def decode(cls, data: bytes) -> InclusionProof:
        r = Reader(data)
        out = cls.read(r)
        r.done()
        return out


def inclusion_proof(tree: CommitTree, i: int) -> InclusionProof:
    if not 0 <= i < tree.n:
        raise IndexError(f"leaf {i} outside [0, {tree.n})")
    path, sibs = [], []
    for j in range(tree.depth + 1):
        idx = i >> j
        path.append(tree.levels[j][idx])
        if j == tree.depth:
            break
        s = idx ^ 1
        if s >= len(tree.levels[j]):
            sibs.append(None)
        elif j == 0:
            sibs.append(Sibling(tree.levels[0][s], tree.digests[s]))
        else:
            below = tree.hashes[j - 1]
            right = below[2 * s + 1] if 2 * s + 1 < len(below) else ZERO32
            sibs.append(Sibling(tree.levels[j][s], below[2 * s] + right))
    return InclusionProof(i, tree.n, tree.digests[i], tuple(path), tuple(sibs))


def verify_inclusion(G: InclusionProof) -> bool:
    """Shape matches (index, n) and every path node is the sum of its children."""
    return G.well_formed() and G.sums_ok()


# --- evidence ------------------------------------------------------------------------


@dataclass(frozen=True)
class RootEntry:
    c_root: Point
    h_root: bytes

    def encode(self) -> bytes:
        return self.c_root.encode() + self.h_root

    @classmethod
    def decode(cls, data: bytes) -> RootEntry:
        r = Reader(data)
        out = cls(r.point(), r.raw(32))
        r.done()
        return out


def board_root(board: Board, cycle: int, t: int) -> RootEntry | None:
    """First ROOT entry for (cycle, t), or None when absent or malformed."""
    found = board.read_kind(cycle, t, Kind.ROOT)
    if not found:
        return None
    try:
        return RootEntry.decode(found[0].payload)
    except ValueError:
        return None


@dataclass(frozen=True)
class MerkleUserView:
    cycle: int
    period: int
    peak: bool
    pi_star: bytes
    inclusion: InclusionProof

    def encode(self) -> bytes:
        w = Writer().u8(_VERSION).u64(self.cycle).u64(self.period).u8(int(self.peak))
        return w.var(self.pi_star).var(self.inclusion.encode()).getvalue()

    @classmethod
    def decode(cls, data: bytes) -> MerkleUserView:
        r = Reader(data)
        if r.u8() != _VERSION:
            raise ValueError("unknown view version")
        cycle, period, peak = r.u64(), r.u64(), r.u8()
        if peak > 1:
            raise ValueError("bad peak flag")
        pi, inc = r.var(), InclusionProof.decode(r.var())
        r.done()
        return cls(cycle, period, bool(peak), pi, inc)


@dataclass(frozen=True)
class MerkleAuditorView:
    """All leaves with their range proofs and every internal node, root first."""

    cycle: int
    period: int
    leaves: tuple[Point, ...]
    proofs: tuple[bytes, ...]
    internal: tuple[Point, ...]

    @property
    def n(self) -> int:
        return len(self.leaves)

    def encode(self) -> bytes:
        w = Writer().u8(_VERSION).u64(self.cycle).u64(self.period).u32(self.n)
        for c, p in zip(self.leaves, self.proofs):
            w.point(c).var(p)
        w.u32(len(self.internal))
        for c in self.internal:
            w.point(c)
        return w.getvalue()

    @classmethod
    def decode(cls, data: bytes) -> MerkleAuditorView:
        r = Reader(data)
        if r.u8() != _VERSION:
            raise ValueError("unknown view version")
        cycle, period, n = r.u64(), r.u64(), r.u32()
        leaves, proofs = [], []
        for _ in range(n):
            leaves.append(r.point())
            proofs.append(r.var())
        internal = tuple(r.point() for _ in range(r.u32()))
        r.done()
        return cls(cycle, period, tuple(leaves), tuple(proofs), internal)

    def tree(self) -> CommitTree:
        return tree_from_nodes(self.leaves, self.internal, [hash_bytes(p) for p in self.proofs])


@dataclass
class MerkleEvidence:
    """The retailer's full record for one period; hands out per-role views."""

    cycle: int
    period: int
    peak: bool
    pi_star: bytes
    tree: CommitTree
    proofs: list[bytes]

    @property
    def root_entry(self) -> RootEntry:
        return RootEntry(self.tree.root, self.tree.root_hash)

    def user_view(self, i: int) -> MerkleUserView:
        return MerkleUserView(
            self.cycle, self.period, self.peak, self.pi_star, inclusion_proof(self.tree, i)
        )

    def auditor_view(self) -> MerkleAuditorView:
        internal = [c for lv in reversed(self.tree.levels[1:]) for c in lv]
        return MerkleAuditorView(
            self.cycle, self.period, tuple(self.tree.levels[0]), tuple(self.proofs), tuple(internal)
        )

    def rehash(self) -> None:
        """Recompute the hash tree after the commitments or proofs were edited."""
        self.tree.digests = [hash_bytes(p) for p in self.proofs]
        self.tree.hashes = _hash_levels(self.tree.levels, self.tree.digests)


def evidence_gen_merkle(
    params: SystemParams,
    k_r: RetailerKey,
    x: Sequence[int],
    t: int,
    board: Board | None = None,
    *,
    cycle: int = 0,
    rng=None,
    workers: int = 1,
) -> MerkleEvidence:
    check_measurements(params, x, t)
    sched = params.schedule
    secrets_ = slot_secret_gen(params, k_r, t)
    cs = [commit(params.com, xi, ri) for xi, ri in zip(x, secrets_)]
    delta = sched.delta[t]
    proofs = [
        p.to_bytes()
        for p in zk_prove_many(
            params.zk, [(c, delta, xi, ri) for c, xi, ri in zip(cs, x, secrets_)], rng, workers
        )
    ]
    tree = build_tree(cs, [hash_bytes(p) for p in proofs])
    x_star = sum(x)
    r_star = sum(secrets_) % Q
    peak = x_star > sched.gamma[t]
    target, bound = sum_statement(params, tree.root, t, peak)
    pi_star = zk_prove(params.zk, target, bound, sum_witness(params, x_star, t, peak), r_star, rng)
    ev = MerkleEvidence(cycle, t, peak, pi_star.to_bytes(), tree, proofs)
    if board is not None:
        board.append(Kind.ROOT, cycle, t, ev.root_entry.encode())
    return ev


# --- user checks -----------------------------------------------------------------------


def verify_consistency(G: InclusionProof, root: RootEntry | None) -> bool:
    if root is None or not G.well_formed():
        return False
    return G.root == root.c_root and G.root_hash() == root.h_root


def verify_commitment(params: SystemParams, x_i: int, r_i: int, G: InclusionProof, i: int) -> bool:
    if G.index != i:
        return False
    try:
        return commit(params.com, x_i, r_i) == G.leaf
    except ValueError:
        return False


def verify_sum(params: SystemParams, view: MerkleUserView) -> bool:
    target, bound = sum_statement(params, view.inclusion.root, view.period, view.peak)
    return zk_verify(params.zk, target, bound, view.pi_star)


# --- fraud proofs and reports -------------------------------------------------------


@dataclass(frozen=True)
class FraudProof:
    """An inclusion proof anchored at the board root plus, optionally, the
    leaf's range proof.  It shows fraud when the anchored path has a broken
    sum or a mismatched root commitment, or when the leaf proof (matching
    the anchored digest) fails to verify."""

    inclusion: InclusionProof
    leaf_proof: bytes | None = None

    def encode(self) -> bytes:
        w = Writer().var(self.inclusion.encode())
        if self.leaf_proof is None:
            return w.u8(0).getvalue()
        return w.u8(1).var(self.leaf_proof).getvalue()

    @classmethod
    def decode(cls, data: bytes) -> FraudProof:
        r = Reader(data)
        inc = InclusionProof.decode(r.var())
        flag = r.u8()
        if flag not in (0, 1):
            raise ValueError("bad flag")
        proof = r.var() if flag else None
        r.done()
        return cls(inc, proof)

    @property
    def target(self) -> int:
        return self.inclusion.index


def check_fraud(params: SystemParams, fraud: FraudProof, root: RootEntry | None, t: int) -> bool:
    """True iff the material proves retailer misbehaviour for period t."""
    G = fraud.inclusion
    if root is None or G.n != params.n or not G.well_formed():
        return False
    if G.root_hash() != root.h_root:
        return False
    if not G.sums_ok() or G.root != root.c_root:
        return True
    if fraud.leaf_proof is None or hash_bytes(fraud.leaf_proof) != G.leaf_digest:
        return False
    return not zk_verify(params.zk, G.leaf, params.schedule.delta[t], fraud.leaf_proof)


class Verdict(enum.IntEnum):
    OK = 0
    FRAUD = 1
    EMPTY = 2


@dataclass(frozen=True)
class AuditorReport:
    cycle: int
    period: int
    verdict: Verdict
    fraud: FraudProof | None = None
    vk: bytes = b""
    sig: bytes = b""

    def payload(self) -> bytes:
        w = Writer().u8(_VERSION).u8(self.verdict)
        if self.verdict == Verdict.FRAUD:
            w.var(self.fraud.encode())
        return w.getvalue()

    def signed_bytes(self) -> bytes:
        return signed_message(Kind.REPORT, self.cycle, self.period, self.payload())

    def signed(self, keys: SigKeyPair) -> AuditorReport:
        unsigned = AuditorReport(self.cycle, self.period, self.verdict, self.fraud, keys.vk, b"")
        sig = sign(keys.sk, unsigned.signed_bytes())
        return AuditorReport(self.cycle, self.period, self.verdict, self.fraud, keys.vk, sig)

    @classmethod
    def from_entry(cls, e: BulletinEntry) -> AuditorReport:
        r = Reader(e.payload)
        if r.u8() != _VERSION:
            raise ValueError("unknown report version")
        verdict = Verdict(r.u8())
        fraud = FraudProof.decode(r.var()) if verdict == Verdict.FRAUD else None
        r.done()
        return cls(e.cycle, e.period, verdict, fraud, e.vk or b"", e.sig or b"")


def audit_tree(
    params: SystemParams, view: MerkleAuditorView, root: RootEntry | None
) -> tuple[Verdict, FraudProof | None]:
    """Check every leaf proof against delta_t and every internal node sum.

    EMPTY means the view could not be tied to the board (absent, malformed
    or not the committed tree), so no fraud can be proven from it.
    """
    try:
        t = view.period
        params.schedule.check_period(t)
        if root is None or view.n != params.n or len(view.proofs) != view.n:
            return Verdict.EMPTY, None
        tree = view.tree()
    except (ValueError, IndexError):
        return Verdict.EMPTY, None
    if tree.root_hash != root.h_root:
        return Verdict.EMPTY, None
    for j in range(1, len(tree.levels)):
        below = tree.levels[j - 1]
        for k, c in enumerate(tree.levels[j]):
            expected = below[2 * k] + below[2 * k + 1] if 2 * k + 1 < len(below) else below[2 * k]
            if c != expected:
                return Verdict.FRAUD, FraudProof(inclusion_proof(tree, k << j))
    if tree.root != root.c_root:
        return Verdict.FRAUD, FraudProof(inclusion_proof(tree, 0))
    delta = params.schedule.delta[t]
    if zk_verify_all(params.zk, [(c, delta, p) for c, p in zip(view.leaves, view.proofs)]):
        return Verdict.OK, None
    for i, (c, p) in enumerate(zip(view.leaves, view.proofs)):
        if not zk_verify(params.zk, c, delta, p):
            return Verdict.FRAUD, FraudProof(inclusion_proof(tree, i), p)
    return Verdict.OK, None


def publish_report(board: Board, report: AuditorReport) -> int:
    return board.append(
        Kind.REPORT, report.cycle, report.period, report.payload(), report.vk, report.sig
    )


# --- waiting on the board ---------------------------------------------------------------


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


@dataclass
class ManualClock:
    """Deterministic clock for tests; ``sleep`` just advances time."""

    t: float = 0.0
    on_sleep: Callable[[float], None] | None = None

    def now(self) -> float:
        return self.t

    def sleep(self, seconds: float) -> None:
        self.t += seconds
        if self.on_sleep is not None:
            self.on_sleep(self.t)


class QuorumStatus(enum.Enum):
    ACCEPT = "accept"
    FRAUD_DETECTED = "fraud"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class QuorumResult:
    status: QuorumStatus
    fraud: FraudProof | None = None
    ok_signers: tuple[bytes, ...] = ()

    def __bool__(self) -> bool:
        return self.status is QuorumStatus.ACCEPT


def find_fraud(
    params: SystemParams, board: Board, cycle: int, t: int, root: RootEntry | None = None
) -> FraudProof | None:
    """First fraud claim for (cycle, t) on the board that re-checks, if any."""
    if root is None:
        root = board_root(board, cycle, t)
    for kind in (Kind.REPORT, Kind.FRAUD):
        for e in board.read_kind(cycle, t, kind):
            if not _trusted(params, e, kind):
                continue
            try:
                if kind == Kind.REPORT:
                    rep = AuditorReport.from_entry(e)
                    if rep.verdict != Verdict.FRAUD:
                        continue
                    fraud = rep.fraud
                else:
                    fraud = FraudProof.decode(e.payload)
            except ValueError:
                continue
            if check_fraud(params, fraud, root, t):
                return fraud
    return None


def _trusted(params: SystemParams, e: BulletinEntry, kind: Kind) -> bool:
    if not e.signature_ok():
        return False
    if kind == Kind.REPORT and params.auditors:
        return e.vk in params.auditors
    return True


def _ok_signers(params: SystemParams, board: Board, cycle: int, t: int) -> set[bytes]:
    signers = set()
    for e in board.read_kind(cycle, t, Kind.REPORT):
        if not _trusted(params, e, Kind.REPORT):
            continue
        try:
            if AuditorReport.from_entry(e).verdict == Verdict.OK:
                signers.add(e.vk)
        except ValueError:
            continue
    return signers


def await_quorum(
    board: Board,
    params: SystemParams,
    period: int,
    f: int,
    T: float,
    clock: Clock | None = None,
    *,
    cycle: int = 0,
    poll: float = 0.05,
    cancel=None,
) -> QuorumResult:
    """Wait for f+1 OK reports from distinct auditors, with fraud taking precedence.

    ``cancel`` is an optional ``threading.Event``; setting it ends the wait
    as a timeout.
    """
    if f < 0 or T <= 0:
        raise ValueError("need f >= 0 and T > 0")
    clock = clock or SystemClock()
    deadline = clock.now() + T
    root = board_root(board, cycle, period)
    while True:
        if root is None:
            root = board_root(board, cycle, period)
        fraud = find_fraud(params, board, cycle, period, root)
        if fraud is not None:
            return QuorumResult(QuorumStatus.FRAUD_DETECTED, fraud)
        ok = _ok_signers(params, board, cycle, period)
        if len(ok) >= f + 1:
            return QuorumResult(QuorumStatus.ACCEPT, None, tuple(sorted(ok)))
        if clock.now() >= deadline or (cancel is not None and cancel.is_set()):
            return QuorumResult(QuorumStatus.TIMEOUT)
        clock.sleep(min(poll, max(0.0, deadline - clock.now())) or poll)


# --- two-phase verification ------------------------------------------------------------------


def evidence_vrf_merkle(
    params: SystemParams,
    r_i: int | None,
    x_i: int | None,
    view,
    t: int,
    board: Board,
    role: str = "user",
    f: int | None = None,
    T: float | None = None,
    *,
    i: int | None = None,
    keys: SigKeyPair | None = None,
    clock: Clock | None = None,
    cycle: int = 0,
    cache: VerificationCache | None = None,
) -> bool:
    """Phase one checks the role's view; phase two publishes (auditor) or
    waits for the auditor quorum (user).

    For users, ``view`` is a :class:`MerkleUserView` and ``i`` their index
    (defaults to the index in the inclusion proof).  For auditors ``view``
    is a :class:`MerkleAuditorView` and ``keys`` signs the report.
    """
    f = params.f if f is None else f
    T = params.T if T is None else T
    root = board_root(board, cycle, t)
    if role == "auditor":
        if view.period != t or view.cycle != cycle:
            verdict, fraud = Verdict.EMPTY, None
        else:
            verdict, fraud = audit_tree(params, view, root)
        if keys is None:
            raise ValueError("auditors need signing keys")
        publish_report(board, AuditorReport(cycle, t, verdict, fraud).signed(keys))
        return verdict == Verdict.OK
    if role != "user":
        raise ValueError(f"unknown role {role!r}")
    G = view.inclusion
    i = G.index if i is None else i
    if view.period != t or view.cycle != cycle:
        return False
    if not (
        verify_consistency(G, root)
        and verify_commitment(params, x_i, r_i, G, i)
        and verify_inclusion(G)
    ):
        return False
    if cache is None:
        if not verify_sum(params, view):
            return False
    else:
        key = VerificationCache.key(
            b"merkle-sum", params.digest(), G.root.encode(), bytes([view.peak]), view.pi_star,
            t.to_bytes(8, "big"),
        )
        if not cache.run(key, lambda: verify_sum(params, view), 1):
            return False
    return bool(await_quorum(board, params, t, f, T, clock, cycle=cycle))
