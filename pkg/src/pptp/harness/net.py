"""Retailer, client and auditor as asyncio processes over loopback TCP.

Transport is plaintext and unauthenticated: simulation only.  The board
is a shared :class:`~pptp.bulletin.FileBoard`; every party opens the same
file and the board's lock serializes writers.

Per cycle a client connects, submits its k readings and then receives, for
each period, its slot secret followed by its evidence view, and finally its
bill.  An auditor connects, asks for the cycle's auditor views and gets one
per period.  ``QUERY_INCLUSION`` serves any leaf's inclusion proof and
range proof for spot checks once the period's evidence exists.
"""

from __future__ import annotations

import asyncio
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..baseline import BaselineEvidence
from ..bulletin import BoardError, FileBoard
from ..merkle import InclusionProof, MerkleAuditorView, MerkleUserView, Verdict
from ..pricing import Bill
from .client import ClientRecord, run_auditor_period
from .config import HarnessConfig
from .retailer import RetailerCore, TamperSpec
from .wire import (
    InclusionResponse,
    Measurement,
    MsgType,
    SlotSecret,
    Tagged,
    WireError,
    read_frame,
    send,
)

log = logging.getLogger("pptp.net")

BANNER = "pptp: INSECURE, SIMULATION-ONLY transport (plaintext loopback TCP, no authentication)"

EXIT_ACCEPT, EXIT_REJECT, EXIT_UNREACHABLE = 0, 1, 2


class Unreachable(Exception):
    """The retailer or the board could not be reached."""


def open_file_board(cfg: HarnessConfig, *, create: bool) -> FileBoard:
    if cfg.board is None:
        raise Unreachable("no board path configured")
    path = Path(cfg.board)
    if not create and not path.exists():
        raise Unreachable(f"board {path} does not exist")
    if not path.parent.is_dir():
        raise Unreachable(f"board directory {path.parent} does not exist")
    try:
        return FileBoard(path)
    except (OSError, BoardError) as e:
        raise Unreachable(str(e)) from e


# --- retailer -----------------------------------------------------------------------


@dataclass
class _CycleState:
    readings: dict[int, dict[int, int]] = field(default_factory=dict)
    evidence: dict[int, object] = field(default_factory=dict)
    ready: list[asyncio.Event] = field(default_factory=list)
    arrived: asyncio.Event = field(default_factory=asyncio.Event)
    bills: list[Bill] | None = None
    billed: asyncio.Event = field(default_factory=asyncio.Event)
    served: set[int] = field(default_factory=set)


class RetailerServer:
    def __init__(self, cfg: HarnessConfig, tamper: TamperSpec | None = None, board=None):
        self.cfg = cfg
        self.params = cfg.system_params()
        self.board = board if board is not None else open_file_board(cfg, create=True)
        self.core = RetailerCore(cfg, self.params, self.board, tamper)
        self.cycles: dict[int, _CycleState] = {}
        self._server: asyncio.base_events.Server | None = None

    def _state(self, cycle: int) -> _CycleState:
        if cycle not in self.cycles:
            st = _CycleState()
            st.ready = [asyncio.Event() for _ in range(self.cfg.k)]
            self.cycles[cycle] = st
        return self.cycles[cycle]

    async def start(self, host: str | None = None, port: int | None = None) -> int:
        h, p = self.cfg.host_port
        self._server = await asyncio.start_server(
            self._handle, host or h, p if port is None else port
        )
        return self._server.sockets[0].getsockname()[1]

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def serve(self) -> None:
        """Produce evidence for every configured cycle, then stop."""
        for cycle in range(self.cfg.cycles):
            await self.run_cycle(cycle)
            st = self._state(cycle)
            # let clients collect their bills before moving on
            while len(st.served) < self.cfg.n:
                await asyncio.sleep(0.02)

    async def run_cycle(self, cycle: int) -> None:
        st = self._state(cycle)
        for t in range(self.cfg.k):
            while len(st.readings.get(t, {})) < self.cfg.n:
                st.arrived.clear()
                await st.arrived.wait()
            column = [st.readings[t][i] for i in range(self.cfg.n)]
            st.evidence[t] = await asyncio.to_thread(self.core.evidence, cycle, t, column)
            st.ready[t].set()
            log.info("cycle %d period %d: evidence posted", cycle, t)
        y = [[st.readings[t][i] for t in range(self.cfg.k)] for i in range(self.cfg.n)]
        st.bills = self.core.bills(cycle, y)
        st.billed.set()

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        tasks: list[asyncio.Task] = []
        try:
            while True:
                try:
                    frame = await read_frame(reader)
                except WireError as e:
                    await send(writer, MsgType.ERROR, str(e).encode())
                    break
                if frame is None:
                    break
                try:
                    task = await self._dispatch(frame, writer)
                except (ValueError, IndexError, KeyError) as e:
                    log.warning("protocol error: %s", e)
                    await send(writer, MsgType.ERROR, str(e).encode())
                    continue
                if task is not None:
                    tasks.append(task)
            if tasks:
                await asyncio.gather(*tasks)
        except (ConnectionError, asyncio.IncompleteReadError) as e:
            log.warning("connection dropped: %s", e)
        finally:
            for task in tasks:
                task.cancel()
            writer.close()

    async def _dispatch(self, frame, writer) -> asyncio.Task | None:
        if frame.type == MsgType.SUBMIT_MEASUREMENT:
            m = Measurement.decode(frame.payload)
            self._check_user(m.user)
            self.params.schedule.check_period(m.period)
            st = self._state(m.cycle)
            # first reading wins; re-submission after a reconnect is a no-op
            st.readings.setdefault(m.period, {}).setdefault(m.user, m.y)
            st.arrived.set()
            if m.period == self.cfg.k - 1:
                return asyncio.ensure_future(self._feed_client(m.user, m.cycle, writer))
            return None
        if frame.type == MsgType.EVIDENCE_AUDITOR:
            req = Tagged.decode(frame.payload)
            return asyncio.ensure_future(self._feed_auditor(req.cycle, writer))
        if frame.type == MsgType.QUERY_INCLUSION:
            q = Tagged.decode(frame.payload)
            await send(writer, MsgType.INCLUSION_RESP, self._inclusion(q).encode())
            return None
        raise ValueError(f"unexpected message {frame.type.name}")

    def _check_user(self, i: int) -> None:
        if not 0 <= i < self.cfg.n:
            raise ValueError(f"user {i} out of range")

    async def _feed_client(self, i: int, cycle: int, writer) -> None:
        st = self._state(cycle)
        for t in range(self.cfg.k):
            await st.ready[t].wait()
            ev = st.evidence[t]
            # slot secrets are deterministic, so re-sending them is harmless
            secret = SlotSecret(i, cycle, t, self.core.slot_secret(i, t))
            await send(writer, MsgType.SLOT_SECRET, secret.encode())
            body = ev.encode() if self.cfg.variant == "baseline" else ev.user_view(i).encode()
            await send(writer, MsgType.EVIDENCE_USER, Tagged(cycle, t, i, body).encode())
        await st.billed.wait()
        await send(writer, MsgType.BILL, st.bills[i].encode())
        st.served.add(i)

    async def _feed_auditor(self, cycle: int, writer) -> None:
        if self.cfg.variant != "merkle":
            await send(writer, MsgType.ERROR, b"no auditors in the baseline variant")
            return
        st = self._state(cycle)
        for t in range(self.cfg.k):
            await st.ready[t].wait()
            body = st.evidence[t].auditor_view().encode()
            await send(writer, MsgType.EVIDENCE_AUDITOR, Tagged(cycle, t, 0, body).encode())

    def _inclusion(self, q: Tagged) -> InclusionResponse:
        if self.cfg.variant != "merkle":
            raise ValueError("inclusion proofs exist only in the merkle variant")
        self._check_user(q.index)
        ev = self._state(q.cycle).evidence.get(q.period)
        if ev is None:
            raise ValueError("evidence not ready")
        view = ev.user_view(q.index)
        return InclusionResponse(view.inclusion.encode(), ev.proofs[q.index])


async def run_retailer(cfg: HarnessConfig, tamper: TamperSpec | None = None) -> int:
    log.warning(BANNER)
    server = RetailerServer(cfg, tamper)
    port = await server.start()
    log.info("retailer listening on port %d", port)
    try:
        await server.serve()
    finally:
        await server.close()
    return 0


# --- client ---------------------------------------------------------------------------


async def _connect(cfg: HarnessConfig, port: int | None):
    host, p = cfg.host_port
    try:
        return await asyncio.open_connection(host, p if port is None else port)
    except OSError as e:
        raise Unreachable(f"retailer at {host}:{p if port is None else port}: {e}") from e


async def _expect(reader, mtype: MsgType, timeout: float):
    frame = await asyncio.wait_for(read_frame(reader), timeout)
    if frame is None:
        raise ConnectionError("retailer closed the connection")
    if frame.type == MsgType.ERROR:
        raise ValueError(frame.payload.decode(errors="replace"))
    if frame.type != mtype:
        raise ValueError(f"expected {mtype.name}, got {frame.type.name}")
    return frame.payload


async def client_cycle(
    cfg: HarnessConfig,
    i: int,
    *,
    cycle: int = 0,
    port: int | None = None,
    board=None,
    timeout: float = 600.0,
) -> ClientRecord:
    """One cycle for user i; raises :class:`Unreachable` if it cannot start."""
    board = board if board is not None else open_file_board(cfg, create=False)
    params = cfg.system_params()
    y = cfg.raw_measurements(cycle)[i]
    rec = ClientRecord(i, list(y))
    reader, writer = await _connect(cfg, port)
    try:
        for t in range(cfg.k):
            await send(writer, MsgType.SUBMIT_MEASUREMENT, Measurement(i, cycle, t, y[t]).encode())
        for t in range(cfg.k):
            s = SlotSecret.decode(await _expect(reader, MsgType.SLOT_SECRET, timeout))
            tagged = Tagged.decode(await _expect(reader, MsgType.EVIDENCE_USER, timeout))
            if (s.user, s.cycle, s.period) != (i, cycle, t) or tagged.period != t:
                raise ValueError("out-of-order delivery")
            if cfg.variant == "baseline":
                view = BaselineEvidence.decode(tagged.body)
            else:
                view = MerkleUserView.decode(tagged.body)
            await asyncio.to_thread(
                rec.check_period, params, cfg.variant, t, s.r, view, board, cycle=cycle
            )
        bill = Bill.decode(await _expect(reader, MsgType.BILL, timeout))
        rec.check_bill(params.schedule, bill)
    except (ValueError, ConnectionError, asyncio.TimeoutError) as e:
        log.warning("user %d: %s", i, e)
        rec.bill_ok = False
    finally:
        writer.close()
    return rec


async def run_client(cfg: HarnessConfig, i: int, *, port: int | None = None, verdict_path=None) -> int:
    """Exit code: 0 accept, 1 reject, 2 retailer or board unreachable."""
    log.warning(BANNER)
    code = EXIT_ACCEPT
    lines = []
    try:
        for cycle in range(cfg.cycles):
            rec = await client_cycle(cfg, i, cycle=cycle, port=port)
            lines.append(f"cycle={cycle} user={i} verdict={'accept' if rec.accepted else 'reject'}")
            if not rec.accepted:
                code = EXIT_REJECT
    except Unreachable as e:
        log.error("unreachable: %s", e)
        lines.append(f"user={i} verdict=unreachable")
        code = EXIT_UNREACHABLE
    if verdict_path is not None:
        Path(verdict_path).write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return code


# --- auditor ------------------------------------------------------------------------------


async def auditor_cycle(
    cfg: HarnessConfig,
    j: int,
    *,
    cycle: int = 0,
    port: int | None = None,
    board=None,
    honest: bool | None = None,
    timeout: float = 600.0,
) -> list[Verdict]:
    board = board if board is not None else open_file_board(cfg, create=False)
    params = cfg.system_params()
    honest = j >= cfg.dishonest_auditors if honest is None else honest
    keys = cfg.auditor_keys(j)
    reader, writer = await _connect(cfg, port)
    verdicts = []
    try:
        await send(writer, MsgType.EVIDENCE_AUDITOR, Tagged(cycle, 0, j).encode())
        for t in range(cfg.k):
            tagged = Tagged.decode(await _expect(reader, MsgType.EVIDENCE_AUDITOR, timeout))
            try:
                view = MerkleAuditorView.decode(tagged.body)
            except ValueError:
                view = None
            try:
                v = await asyncio.to_thread(
                    run_auditor_period, params, view, t, board, keys, cycle=cycle, honest=honest
                )
            except BoardError as e:
                log.error("auditor %d: report for period %d refused: %s", j, t, e)
                v = None
            verdicts.append(v)
    finally:
        writer.close()
    return verdicts


async def run_auditor(cfg: HarnessConfig, j: int, *, port: int | None = None) -> int:
    log.warning(BANNER)
    try:
        for cycle in range(cfg.cycles):
            verdicts = await auditor_cycle(cfg, j, cycle=cycle, port=port)
            for t, v in enumerate(verdicts):
                print(f"cycle={cycle} period={t} auditor={j} verdict={v.name if v is not None else 'REFUSED'}")
            if any(v is None for v in verdicts):
                return EXIT_REJECT
    except Unreachable as e:
        log.error("unreachable: %s", e)
        return EXIT_UNREACHABLE
    return 0


# --- spot checks ---------------------------------------------------------------------------


async def fetch_inclusion(cfg: HarnessConfig, cycle: int, t: int, j: int, *, port: int | None = None):
    reader, writer = await _connect(cfg, port)
    try:
        await send(writer, MsgType.QUERY_INCLUSION, Tagged(cycle, t, j).encode())
        resp = InclusionResponse.decode(await _expect(reader, MsgType.INCLUSION_RESP, 30.0))
    finally:
        writer.close()
    return InclusionProof.decode(resp.inclusion), resp.leaf_proof


# --- everything on one loop ------------------------------------------------------------------


@dataclass
class NetworkResult:
    clients: list[ClientRecord]
    auditor_verdicts: list[list[Verdict]]
    board: FileBoard

    @property
    def accepted(self) -> list[bool]:
        return [c.accepted for c in self.clients]


async def run_loopback(cfg: HarnessConfig, tamper: TamperSpec | None = None, cycle: int = 0) -> NetworkResult:
    """Retailer, every client and every auditor as tasks on one event loop."""
    if cfg.board is None:
        raise ValueError("the network run needs a board file")
    if os.path.exists(cfg.board) and os.path.getsize(cfg.board) > 0:
        raise ValueError(f"board {cfg.board} is not empty")
    server = RetailerServer(cfg, tamper)
    port = await server.start(port=0)
    try:
        producer = asyncio.ensure_future(server.run_cycle(cycle))
        auditors = [
            auditor_cycle(cfg, j, cycle=cycle, port=port, board=server.board)
            for j in range(cfg.auditors if cfg.variant == "merkle" else 0)
        ]
        clients = [
            client_cycle(cfg, i, cycle=cycle, port=port, board=server.board) for i in range(cfg.n)
        ]
        results = await asyncio.gather(*auditors, *clients)
        await producer
    finally:
        await server.close()
    k = len(auditors)
    return NetworkResult(list(results[k:]), list(results[:k]), server.board)
