"""In-process end-to-end cycle: retailer, clients and auditors share one board."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..bulletin import Board, FileBoard, MemoryBoard
from ..crypto import OpCounter, count_ops
from ..merkle import ManualClock, Verdict, find_fraud
from ..pricing import Bill
from ..protocol import VerificationCache
from .client import ClientRecord, run_auditor_period
from .config import HarnessConfig
from .retailer import RetailerCore, TamperSpec


@dataclass
class CycleResult:
    variant: str
    clients: list[ClientRecord]
    bills: list[Bill]
    board: Board
    server_ops: OpCounter
    client_ops: list[OpCounter]
    auditor_ops: list[OpCounter] = field(default_factory=list)
    auditor_verdicts: list[list[Verdict]] = field(default_factory=list)

    @property
    def accepted(self) -> list[bool]:
        return [c.accepted for c in self.clients]

    @property
    def all_accept(self) -> bool:
        return all(self.accepted)

    def fraud_reports(self) -> int:
        """FRAUD verdicts from any auditor, honest or not, over the cycle."""
        return sum(v == Verdict.FRAUD for row in self.auditor_verdicts for v in row)

    @property
    def detected(self) -> bool:
        return not self.all_accept or self.fraud_reports() > 0


def open_board(cfg: HarnessConfig) -> Board:
    return FileBoard(cfg.board) if cfg.board else MemoryBoard()


def run_cycle(
    cfg: HarnessConfig,
    tamper: TamperSpec | None = None,
    *,
    cycle: int = 0,
    board: Board | None = None,
    cache: VerificationCache | None = None,
) -> CycleResult:
    """Drive one billing cycle for every party and collect their verdicts.

    Auditors run before clients each period, so clients normally find the
    quorum already on the board; a manual clock keeps timeouts instant.
    """
    params = cfg.system_params()
    board = board if board is not None else open_board(cfg)
    cache = cache if cache is not None else VerificationCache()
    retailer = RetailerCore(cfg, params, board, tamper)
    y = cfg.raw_measurements(cycle)
    clients = [ClientRecord(i, list(y[i])) for i in range(cfg.n)]
    client_ops = [OpCounter() for _ in range(cfg.n)]
    auditor_ops = [OpCounter() for _ in range(cfg.auditors)] if cfg.variant == "merkle" else []
    verdicts: list[list[Verdict]] = [[] for _ in auditor_ops]
    server = OpCounter()

    for t in range(cfg.k):
        with count_ops() as ops:
            ev = retailer.evidence(cycle, t, [row[t] for row in y])
        _merge(server, ops)
        if cfg.variant == "merkle":
            view = ev.auditor_view()
            for j in range(cfg.auditors):
                with count_ops() as ops:
                    v = run_auditor_period(
                        params, view, t, board, cfg.auditor_keys(j),
                        cycle=cycle, honest=j >= cfg.dishonest_auditors,
                    )
                _merge(auditor_ops[j], ops)
                verdicts[j].append(v)
        for i, c in enumerate(clients):
            r_i = retailer.slot_secret(i, t)
            view = ev if cfg.variant == "baseline" else ev.user_view(i)
            with count_ops() as ops:
                c.check_period(
                    params, cfg.variant, t, r_i, view, board,
                    cycle=cycle, cache=cache, clock=ManualClock(),
                )
            _merge(client_ops[i], ops)

    bills = retailer.bills(cycle, y)
    for c, b in zip(clients, bills):
        c.check_bill(params.schedule, b)
    return CycleResult(cfg.variant, clients, bills, board, server, client_ops, auditor_ops, verdicts)


def _merge(into: OpCounter, ops: OpCounter) -> None:
    for op, k in ops.as_dict().items():
        into.bump(op, k)


def board_frauds(cfg: HarnessConfig, result: CycleResult, cycle: int = 0) -> int:
    """Periods for which the board holds a fraud claim that re-checks."""
    params = cfg.system_params()
    return sum(
        find_fraud(params, result.board, cycle, t) is not None for t in range(cfg.k)
    )


def board_contents(board: Board) -> list[tuple]:
    """Entries without their position in the chain, in a canonical order.

    Concurrent auditors may post in either order, so runs are compared on
    this rather than on raw entry bytes.
    """
    return sorted((int(e.kind), e.cycle, e.period, e.payload, e.vk or b"", e.sig or b"") for e in board.read_range())
