"""Retailer-side logic shared by the in-process simulator and the network
server, including the tamper scenarios used to exercise detection."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from ..baseline import BaselineEvidence, evidence_gen
from ..bulletin import Board, Kind
from ..crypto import com_sum, commit, hash_bytes
from ..group import Q
from ..merkle import (
    MerkleEvidence,
    RootEntry,
    build_tree,
    evidence_gen_merkle,
)
from ..pricing import Bill, compute_bill, truncate
from ..protocol import SystemParams, slot_secret_gen, sum_statement, sum_witness
from ..rangeproof import RangeProofError, zk_prove
from .config import HarnessConfig


class Scenario(enum.Enum):
    INFLATE_SUM = "INFLATE_SUM"
    SUBSTITUTE_LEAF = "SUBSTITUTE_LEAF"
    OUT_OF_RANGE_LEAF = "OUT_OF_RANGE_LEAF"
    FORGE_ROOT = "FORGE_ROOT"
    DESYNC_DIGEST = "DESYNC_DIGEST"
    OVERBILL = "OVERBILL"


@dataclass(frozen=True)
class TamperSpec:
    scenario: Scenario
    user: int = 0
    period: int = 0
    magnitude: int = 1

    @classmethod
    def parse(cls, scenario: str, **kw) -> TamperSpec:
        return cls(Scenario(scenario.upper()), **kw)


def _sum_proof(params, c_star, x_star, r_star, t, rng) -> tuple[bool, bytes]:
    """Best-effort sum proof for a possibly false statement.

    When no valid proof exists (the claimed sum is above n*delta_t) the
    retailer falls back to a proof about an unrelated commitment.
    """
    peak = x_star > params.schedule.gamma[t]
    target, bound = sum_statement(params, c_star, t, peak)
    try:
        return peak, zk_prove(
            params.zk, target, bound, sum_witness(params, x_star, t, peak), r_star, rng
        ).to_bytes()
    except RangeProofError:
        dummy = commit(params.com, 0, r_star)
        return peak, zk_prove(params.zk, dummy, bound, 0, r_star, rng).to_bytes()


class RetailerCore:
    def __init__(self, cfg: HarnessConfig, params: SystemParams, board: Board, tamper: TamperSpec | None = None):
        self.cfg = cfg
        self.params = params
        self.board = board
        self.k_r = cfg.retailer_key()
        self.tamper = tamper
        self.x_star: dict[tuple[int, int], int] = {}

    def _active(self, t: int, *scenarios: Scenario) -> bool:
        return (
            self.tamper is not None
            and self.tamper.period == t
            and self.tamper.scenario in scenarios
        )

    def slot_secret(self, i: int, t: int) -> int:
        return slot_secret_gen(self.params, self.k_r, t)[i]

    def truncated(self, y_column: Sequence[int], t: int) -> list[int]:
        return [truncate(y, self.params.schedule.delta[t]) for y in y_column]

    def evidence(self, cycle: int, t: int, y_column: Sequence[int]):
        """Run the configured variant for period t and post to the board."""
        x = self.truncated(y_column, t)
        self.x_star[(cycle, t)] = sum(x)
        rng = self.cfg.proof_rng(cycle, t)
        sched = self.params.schedule
        tm = self.tamper
        if self._active(t, Scenario.SUBSTITUTE_LEAF):
            j = tm.user
            d = sched.delta[t]
            # move x_j by a nonzero amount while staying inside [0, delta]
            x = list(x)
            x[j] = (x[j] + 1 + (tm.magnitude - 1) % max(d, 1)) % (d + 1) if d else x[j]
        tamper_post = self._active(
            t, Scenario.INFLATE_SUM, Scenario.OUT_OF_RANGE_LEAF, Scenario.FORGE_ROOT,
            Scenario.DESYNC_DIGEST,
        )
        if self.cfg.variant == "baseline":
            ev = evidence_gen(
                self.params, self.k_r, x, t, None if tamper_post else self.board,
                cycle=cycle, rng=rng, workers=self.cfg.workers,
            )
            if tamper_post:
                ev = self._tamper_baseline(ev, x, cycle, t, rng)
            return ev
        ev = evidence_gen_merkle(
            self.params, self.k_r, x, t, None if tamper_post else self.board,
            cycle=cycle, rng=rng, workers=self.cfg.workers,
        )
        if tamper_post:
            self._tamper_merkle(ev, x, cycle, t, rng)
        return ev

    # --- baseline tampering ---------------------------------------------------

    def _tamper_baseline(self, ev: BaselineEvidence, x, cycle, t, rng) -> BaselineEvidence:
        p, tm = self.params, self.tamper
        sched = p.schedule
        secrets_ = slot_secret_gen(p, self.k_r, t)
        r_star = sum(secrets_) % Q
        x_star = sum(x)
        m = max(1, tm.magnitude)
        cs, proofs = list(ev.commitments), list(ev.proofs)
        c_star, peak, pi_star = ev.c_star, ev.peak, ev.pi_star
        if tm.scenario == Scenario.INFLATE_SUM:
            c_star = commit(p.com, x_star + m, r_star)
            peak, pi_star = _sum_proof(p, c_star, x_star + m, r_star, t, rng)
        elif tm.scenario == Scenario.OUT_OF_RANGE_LEAF:
            j = tm.user
            bad = sched.delta[t] + m
            cs[j] = commit(p.com, bad, secrets_[j])
            # the honest proof of the original leaf no longer matches c_j
            x_new = x_star - x[j] + bad
            c_star = com_sum(cs)
            peak, pi_star = _sum_proof(p, c_star, x_new, r_star, t, rng)
        elif tm.scenario == Scenario.FORGE_ROOT:
            # a sum proof made for a different commitment than c*
            fake = commit(p.com, 0, r_star)
            _, bound = sum_statement(p, fake, t, False)
            peak, pi_star = False, zk_prove(p.zk, fake, bound, 0, r_star, rng).to_bytes()
        out = BaselineEvidence(cycle, t, peak, c_star, pi_star, tuple(cs), tuple(proofs))
        if tm.scenario == Scenario.DESYNC_DIGEST:
            posted = hash_bytes(out.encode() + b"desync")
        else:
            posted = out.digest()
        self.board.append(Kind.DIGEST, cycle, t, posted)
        return out

    # --- Merkle tampering ---------------------------------------------------------

    def _tamper_merkle(self, ev: MerkleEvidence, x, cycle, t, rng) -> None:
        p, tm = self.params, self.tamper
        sched = p.schedule
        secrets_ = slot_secret_gen(p, self.k_r, t)
        r_star = sum(secrets_) % Q
        x_star = sum(x)
        m = max(1, tm.magnitude)
        tree = ev.tree
        root = RootEntry(tree.root, tree.root_hash)
        if tm.scenario == Scenario.INFLATE_SUM:
            inflated = commit(p.com, x_star + m, r_star)
            tree.levels[-1][0] = inflated
            ev.peak, ev.pi_star = _sum_proof(p, inflated, x_star + m, r_star, t, rng)
            ev.rehash()
            root = RootEntry(tree.root, tree.root_hash)
        elif tm.scenario == Scenario.OUT_OF_RANGE_LEAF:
            j = tm.user
            bad = sched.delta[t] + m
            leaves = list(tree.levels[0])
            leaves[j] = commit(p.com, bad, secrets_[j])
            new = build_tree(leaves, tree.digests)
            tree.levels = new.levels
            ev.rehash()
            ev.peak, ev.pi_star = _sum_proof(p, tree.root, x_star - x[j] + bad, r_star, t, rng)
            root = RootEntry(tree.root, tree.root_hash)
        elif tm.scenario == Scenario.FORGE_ROOT:
            root = RootEntry(tree.root - m * p.com.G, tree.root_hash)
        elif tm.scenario == Scenario.DESYNC_DIGEST:
            root = RootEntry(tree.root, hash_bytes(tree.root_hash + b"desync"))
        self.board.append(Kind.ROOT, cycle, t, root.encode())

    # --- bills ------------------------------------------------------------------------

    def bills(self, cycle: int, y: Sequence[Sequence[int]]) -> list[Bill]:
        sched = self.params.schedule
        x_star = [self.x_star[(cycle, t)] for t in range(sched.k)]
        out = []
        for i, row in enumerate(y):
            x = [truncate(row[t], sched.delta[t]) for t in range(sched.k)]
            bill = compute_bill(x, x_star, sched, i, raw_y=row)
            tm = self.tamper
            if tm is not None and tm.scenario == Scenario.OVERBILL and tm.user == i:
                bill = _overbill(bill, sched, tm.magnitude)
            out.append(bill)
        return out


def _overbill(bill: Bill, sched, magnitude: int) -> Bill:
    """Charge the peak rate wherever the base rate applied, else pad the total."""
    rates = tuple(sched.alpha)
    total = sum(r * x for r, x in zip(rates, bill.x_used))
    if total <= bill.total:
        total = bill.total + max(1, magnitude)
    return Bill(bill.user, rates, bill.x_used, total)
