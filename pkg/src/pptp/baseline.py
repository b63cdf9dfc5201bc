"""Flat-list evidence: every client receives all n commitments with their
range proofs plus the network-sum commitment and its proof, and checks
everything against a digest posted on the board.

Canonical evidence layout (the digest is SHA-256 of exactly these bytes)::

    version u8 | cycle u64 | period u64 | n u32 | peak u8 | c_star[32]
    | len u32 | pi_star | n x (c_i[32] | len u32 | pi_i)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .bulletin import Board, Kind
from .codec import Reader, Writer
from .crypto import Commitment, RetailerKey, com_sum, commit, hash_bytes
from .protocol import (
    SystemParams,
    VerificationCache,
    check_measurements,
    slot_secret_gen,
    sum_statement,
    sum_witness,
)
from .group import Q
from .rangeproof import zk_prove, zk_prove_many, zk_verify, zk_verify_all

_VERSION = 1


@dataclass(frozen=True)
class BaselineEvidence:
    cycle: int
    period: int
    peak: bool
    c_star: Commitment
    pi_star: bytes
    commitments: tuple[Commitment, ...]
    proofs: tuple[bytes, ...]

    @property
    def n(self) -> int:
        return len(self.commitments)

    def encode(self) -> bytes:
        w = Writer().u8(_VERSION).u64(self.cycle).u64(self.period).u32(self.n)
        w.u8(1 if self.peak else 0).point(self.c_star).var(self.pi_star)
        for c, p in zip(self.commitments, self.proofs):
            w.point(c).var(p)
        return w.getvalue()

    @classmethod
    def decode(cls, data: bytes) -> BaselineEvidence:
        r = Reader(data)
        if r.u8() != _VERSION:
            raise ValueError("unknown evidence version")
        cycle, period, n = r.u64(), r.u64(), r.u32()
        peak = r.u8()
        if peak > 1:
            raise ValueError("bad peak flag")
        c_star, pi_star = r.point(), r.var()
        cs, ps = [], []
        for _ in range(n):
            cs.append(r.point())
            ps.append(r.var())
        r.done()
        return cls(cycle, period, bool(peak), c_star, pi_star, tuple(cs), tuple(ps))

    def digest(self) -> bytes:
        return hash_bytes(self.encode())


def evidence_gen(
    params: SystemParams,
    k_r: RetailerKey,
    x: Sequence[int],
    t: int,
    board: Board | None = None,
    *,
    cycle: int = 0,
    rng=None,
    workers: int = 1,
) -> BaselineEvidence:
    """Commit to every truncated reading, prove each in [0, delta_t], and
    prove the network sum against gamma_t (or above it, in a peak period).

    The evidence digest is appended to ``board`` when one is given.
    """
    check_measurements(params, x, t)
    sched = params.schedule
    secrets_ = slot_secret_gen(params, k_r, t)
    cs = [commit(params.com, xi, ri) for xi, ri in zip(x, secrets_)]
    x_star = sum(x)
    r_star = sum(secrets_) % Q
    c_star = commit(params.com, x_star, r_star)
    if c_star != com_sum(cs):
        raise AssertionError("homomorphic sum mismatch")
    peak = x_star > sched.gamma[t]
    delta = sched.delta[t]
    proofs = zk_prove_many(
        params.zk, [(c, delta, xi, ri) for c, xi, ri in zip(cs, x, secrets_)], rng, workers
    )
    target, bound = sum_statement(params, c_star, t, peak)
    pi_star = zk_prove(params.zk, target, bound, sum_witness(params, x_star, t, peak), r_star, rng)
    ev = BaselineEvidence(
        cycle, t, peak, c_star, pi_star.to_bytes(), tuple(cs), tuple(p.to_bytes() for p in proofs)
    )
    if board is not None:
        board.append(Kind.DIGEST, cycle, t, ev.digest())
    return ev


def board_digest(board: Board, cycle: int, t: int) -> bytes | None:
    """First digest posted for (cycle, t); later postings cannot replace it."""
    found = board.read_kind(cycle, t, Kind.DIGEST)
    return found[0].payload if found else None


def verify_consistency(E: BaselineEvidence, digest: bytes | None) -> bool:
    if digest is None:
        return False
    return E.digest() == digest


def verify_commitment(params: SystemParams, x_i: int, r_i: int, E: BaselineEvidence, i: int) -> bool:
    if not 0 <= i < E.n:
        return False
    try:
        return commit(params.com, x_i, r_i) == E.commitments[i]
    except ValueError:
        return False


def verify_sum(params: SystemParams, E: BaselineEvidence) -> bool:
    """Fold of the per-user commitments equals c*, and c*'s proof verifies."""
    if E.n != params.n:
        return False
    if com_sum(E.commitments) != E.c_star:
        return False
    target, bound = sum_statement(params, E.c_star, E.period, E.peak)
    return zk_verify(params.zk, target, bound, E.pi_star)


def verify_range_proofs(params: SystemParams, E: BaselineEvidence) -> bool:
    if E.n != params.n:
        return False
    delta = params.schedule.delta[E.period]
    return zk_verify_all(params.zk, [(c, delta, p) for c, p in zip(E.commitments, E.proofs)])


def evidence_vrf(
    params: SystemParams,
    r_i: int,
    x_i: int,
    E: BaselineEvidence,
    t: int,
    board: Board,
    i: int,
    *,
    cycle: int = 0,
    cache: VerificationCache | None = None,
) -> bool:
    """User i's full check of period-t evidence.

    ``cache`` shares the outcome of the public checks (sum and range
    proofs) between simulated clients holding identical evidence.
    """
    if E.period != t or E.cycle != cycle:
        return False
    try:
        params.schedule.check_period(t)
    except IndexError:
        return False
    if not verify_consistency(E, board_digest(board, cycle, t)):
        return False
    if not verify_commitment(params, x_i, r_i, E, i):
        return False

    def public() -> bool:
        return verify_sum(params, E) and verify_range_proofs(params, E)

    if cache is None:
        return public()
    key = VerificationCache.key(b"baseline", params.digest(), E.digest())
    return cache.run(key, public, E.n + 1)


def peak_flags(evidences: Sequence[BaselineEvidence]) -> list[bool]:
    return [E.peak for E in evidences]


def evidence_size(E: BaselineEvidence) -> int:
    return len(E.encode())

