"""Benchmarks: wall time, exact operation counts and bytes per role.

CSV columns are ``variant,n,role,op,count,nanos,bytes``.  For each role
there is one row per counted operation; ``nanos`` is the role's wall time
for the whole step (median over repetitions for verification) and
``bytes`` the size of what that role receives.
"""

from __future__ import annotations

import csv
import io
import math
import random
import statistics
import time
from dataclasses import astuple, dataclass
from typing import Iterable, Sequence

from ..baseline import evidence_gen, evidence_vrf
from ..bulletin import MemoryBoard
from ..crypto import OpCounter, com_setup, commit, count_ops, random_scalar, sig_keygen
from ..merkle import (
    build_tree,
    evidence_gen_merkle,
    evidence_vrf_merkle,
    inclusion_proof,
    verify_inclusion,
)
from ..pricing import PriceSchedule
from ..protocol import initialize, slot_secret_gen

COLUMNS = ("variant", "n", "role", "op", "count", "nanos", "bytes")


@dataclass(frozen=True)
class BenchRow:
    variant: str
    n: int
    role: str
    op: str
    count: int
    nanos: int
    bytes: int


class CounterMismatch(AssertionError):
    pass


def expected_counts(variant: str, n: int) -> dict[tuple[str, str], int]:
    """Operation counts per (role, op) for one period."""
    if variant == "baseline":
        return {
            ("server", "commit"): n + 1,
            ("server", "prove"): n + 1,
            ("client", "verify"): n + 1,
        }
    return {
        ("server", "commit"): 2 * n - 1,
        ("server", "prove"): n + 1,
        ("client", "verify"): 1,
        ("auditor", "verify"): n,
    }


def inclusion_commitments(n: int) -> int:
    """Commitments in a leaf's inclusion proof when n is a power of two."""
    return 2 * int(math.log2(n)) + 1


def bench_schedule(n: int, delta: int = 7) -> PriceSchedule:
    return PriceSchedule.build(n, 1, alpha=3, beta=1, gamma=n * delta // 2, delta=delta)


def _rows(variant, n, role, ops: OpCounter, nanos, nbytes, only=("commit", "prove", "verify")):
    return [BenchRow(variant, n, role, op, getattr(ops, op), nanos, nbytes) for op in only]


def _check(variant: str, n: int, rows: Sequence[BenchRow]) -> None:
    got = {(r.role, r.op): r.count for r in rows}
    for key, want in expected_counts(variant, n).items():
        if got.get(key) != want:
            raise CounterMismatch(f"{variant} n={n} {key}: got {got.get(key)}, expected {want}")


def bench_one(
    variant: str,
    n: int,
    *,
    reps: int = 3,
    workers: int = 1,
    seed: int = 0,
    delta: int = 7,
    check: bool = True,
) -> list[BenchRow]:
    """Generate one period of evidence and time every role's verification."""
    rng = random.Random(seed)
    params, k_r = initialize(
        128, bench_schedule(n, delta),
        auditors=[sig_keygen(bytes([j]) * 32).vk for j in range(2)], f=1, T=1.0, rng=rng,
    )
    x = [rng.randint(0, delta) for _ in range(n)]
    board = MemoryBoard()
    gen = evidence_gen if variant == "baseline" else evidence_gen_merkle
    with count_ops() as ops:
        t0 = time.perf_counter_ns()
        ev = gen(params, k_r, x, 0, board, rng=rng, workers=workers)
        gen_ns = time.perf_counter_ns() - t0
    r0 = slot_secret_gen(params, k_r, 0)[0]
    rows: list[BenchRow] = []
    if variant == "baseline":
        rows += _rows(variant, n, "server", ops, gen_ns, len(ev.encode()), ("commit", "prove"))
        times, ops = [], None
        for _ in range(reps):
            with count_ops() as c:
                t0 = time.perf_counter_ns()
                ok = evidence_vrf(params, r0, x[0], ev, 0, board, 0)
                times.append(time.perf_counter_ns() - t0)
            if not ok:
                raise AssertionError("honest evidence rejected")
            ops = ops or c
        rows += _rows(variant, n, "client", ops, int(statistics.median(times)), len(ev.encode()))
    else:
        view = ev.auditor_view()
        rows += _rows(variant, n, "server", ops, gen_ns, len(view.encode()), ("commit", "prove"))
        for j in range(2):
            keys = sig_keygen(bytes([j]) * 32)
            with count_ops() as c:
                t0 = time.perf_counter_ns()
                ok = evidence_vrf_merkle(params, None, None, view, 0, board, "auditor", keys=keys)
                a_ns = time.perf_counter_ns() - t0
            if not ok:
                raise AssertionError("honest tree rejected by auditor")
            if j == 0:
                rows += _rows(variant, n, "auditor", c, a_ns, len(view.encode()), ("verify",))
        uview = ev.user_view(0)
        times, ops = [], None
        for _ in range(reps):
            with count_ops() as c:
                t0 = time.perf_counter_ns()
                ok = evidence_vrf_merkle(params, r0, x[0], uview, 0, board, "user", i=0)
                times.append(time.perf_counter_ns() - t0)
            if not ok:
                raise AssertionError("honest view rejected by user")
            ops = ops or c
        rows += _rows(variant, n, "client", ops, int(statistics.median(times)), len(uview.encode()))
    if check:
        _check(variant, n, rows)
    return rows


def bench_inclusion(n: int, seed: int = 0, reps: int = 3) -> BenchRow:
    """Tree over random commitments, no range proofs: the path check alone."""
    rng = random.Random(seed)
    com = com_setup(128)
    leaves = [commit(com, rng.randint(0, 7), random_scalar(rng)) for _ in range(n)]
    tree = build_tree(leaves)
    G = inclusion_proof(tree, rng.randrange(n))
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        if not verify_inclusion(G):
            raise AssertionError("inclusion proof rejected")
        times.append(time.perf_counter_ns() - t0)
    return BenchRow("merkle", n, "client", "inclusion", G.commitment_count, int(statistics.median(times)), len(G.encode()))


def bench(
    ns: Iterable[int],
    variant: str,
    *,
    reps: int = 3,
    workers: Sequence[int] = (1,),
    seed: int = 0,
    inclusion_only: bool = False,
    delta: int = 7,
) -> list[BenchRow]:
    rows = []
    for n in ns:
        if inclusion_only:
            rows.append(bench_inclusion(n, seed, reps))
            continue
        for w in workers:
            got = bench_one(variant, n, reps=reps, workers=w, seed=seed, delta=delta)
            if len(workers) > 1:
                got = [BenchRow(r.variant, r.n, f"{r.role}@{w}", r.op, r.count, r.nanos, r.bytes) for r in got]
            rows += got
    return rows


def to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(astuple(r))
    return buf.getvalue()


def loglog_slope(ns: Sequence[int], nanos: Sequence[float]) -> float:
    """Least-squares slope of log(time) against log(n)."""
    xs = [math.log(n) for n in ns]
    ys = [math.log(t) for t in nanos]
    return statistics.linear_regression(xs, ys).slope


def client_times(rows: Iterable[BenchRow], variant: str) -> dict[int, int]:
    return {r.n: r.nanos for r in rows if r.variant == variant and r.role == "client" and r.op == "verify"}
