"""Client- and auditor-side logic shared by the simulator and the network roles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..baseline import evidence_vrf
from ..bulletin import Board, Kind
from ..crypto import SigKeyPair
from ..merkle import (
    AuditorReport,
    Clock,
    MerkleAuditorView,
    Verdict,
    evidence_vrf_merkle,
    publish_report,
)
from ..pricing import Bill, PriceSchedule, truncate, verify_bill
from ..protocol import SystemParams, VerificationCache


def surrogate_x_star(peaks: Sequence[bool], sched: PriceSchedule) -> list[int]:
    """A network sum consistent with each period's proven side of gamma_t.

    Clients never learn x*_t itself, only whether it exceeds gamma_t, which
    is all the price rule looks at.
    """
    return [g + 1 if p else g for p, g in zip(peaks, sched.gamma)]


@dataclass
class ClientRecord:
    """What a client has learned and decided during one cycle."""

    user: int
    raw_y: list[int]
    x: list[int] = field(default_factory=list)
    evidence_ok: list[bool] = field(default_factory=list)
    peaks: list[bool] = field(default_factory=list)
    bill_ok: bool | None = None

    @property
    def accepted(self) -> bool:
        return bool(self.evidence_ok) and all(self.evidence_ok) and bool(self.bill_ok)

    def check_period(
        self,
        params: SystemParams,
        variant: str,
        t: int,
        r_i: int,
        view,
        board: Board,
        *,
        cycle: int = 0,
        cache: VerificationCache | None = None,
        clock: Clock | None = None,
    ) -> bool:
        x_i = truncate(self.raw_y[t], params.schedule.delta[t])
        self.x.append(x_i)
        try:
            if variant == "baseline":
                ok = evidence_vrf(params, r_i, x_i, view, t, board, self.user, cycle=cycle, cache=cache)
            else:
                ok = evidence_vrf_merkle(
                    params, r_i, x_i, view, t, board, "user",
                    i=self.user, clock=clock, cycle=cycle, cache=cache,
                )
        except (ValueError, IndexError):
            ok = False
        self.evidence_ok.append(ok)
        self.peaks.append(bool(view.peak))
        return ok

    def check_bill(self, sched: PriceSchedule, bill: Bill | None) -> bool:
        if bill is None or bill.user != self.user or len(self.peaks) != sched.k:
            self.bill_ok = False
        else:
            xs = surrogate_x_star(self.peaks, sched)
            self.bill_ok = verify_bill(bill, self.x, xs, sched, raw_y=self.raw_y, user=self.user)
        return self.bill_ok


def run_auditor_period(
    params: SystemParams,
    view: MerkleAuditorView | None,
    t: int,
    board: Board,
    keys: SigKeyPair,
    *,
    cycle: int = 0,
    honest: bool = True,
) -> Verdict:
    """Audit one period and publish the signed report.

    A dishonest auditor skips the work and vouches for whatever it was given.
    """
    if not honest:
        publish_report(board, AuditorReport(cycle, t, Verdict.OK).signed(keys))
        return Verdict.OK
    if view is None:
        publish_report(board, AuditorReport(cycle, t, Verdict.EMPTY).signed(keys))
        return Verdict.EMPTY
    ok = evidence_vrf_merkle(params, None, None, view, t, board, "auditor", keys=keys, cycle=cycle)
    return Verdict.OK if ok else _last_verdict(board, keys.vk, cycle, t)


def _last_verdict(board: Board, vk: bytes, cycle: int, t: int) -> Verdict:
    for e in reversed(board.read_kind(cycle, t, Kind.REPORT)):
        if e.vk == vk:
            return AuditorReport.from_entry(e).verdict
    return Verdict.EMPTY

