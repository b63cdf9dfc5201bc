"""Pieces shared by both evidence variants: system parameters, slot secrets,
the network-sum statement, and an optional verification cache.

When the truncated network sum is at most gamma_t the retailer proves
``x* in [0, gamma_t]`` for ``c*``.  Otherwise it proves the lower bound
``x* - gamma_t - 1 in [0, n*delta_t - gamma_t - 1]`` for ``c* - (gamma_t+1)*G``,
so a peak-rate period is never just an unproven claim.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from typing import Sequence

from .codec import Reader, Writer
from .crypto import (
    ComParams,
    Commitment,
    RetailerKey,
    com_setup,
    hash_bytes,
    prf_eval,
    prf_keygen,
    record,
)
from .group import Point
from .pricing import PriceSchedule
from .rangeproof import (
    MAX_BITS,
    WitnessOutOfRange,
    ZkParams,
    zk_setup,
)

_PARAMS_VERSION = 1


@dataclass(frozen=True)
class SystemParams:
    """Public parameters: commitment and proof parameters, the tariff, and
    the auditor registry (verification keys, fault bound f, deadline T)."""

    com: ComParams
    zk: ZkParams
    schedule: PriceSchedule
    auditors: tuple[bytes, ...] = ()
    f: int = 0
    T: float = 10.0

    @property
    def n(self) -> int:
        return self.schedule.n

    @property
    def k(self) -> int:
        return self.schedule.k

    def encode(self) -> bytes:
        w = Writer().u8(_PARAMS_VERSION).u32(self.com.security).u32(self.zk.max_bits)
        w.var(self.schedule.encode()).u32(len(self.auditors))
        for vk in self.auditors:
            w.raw(vk)
        w.u32(self.f).u64(int(round(self.T * 1000)))
        return w.getvalue()

    @classmethod
    def decode(cls, data: bytes) -> SystemParams:
        r = Reader(data)
        if r.u8() != _PARAMS_VERSION:
            raise ValueError("unknown params version")
        com = com_setup(r.u32())
        zk = zk_setup(com, r.u32())
        sched = PriceSchedule.decode(r.var())
        auditors = tuple(r.raw(32) for _ in range(r.u32()))
        f = r.u32()
        T = r.u64() / 1000
        r.done()
        return cls(com, zk, sched, auditors, f, T)

    def digest(self) -> bytes:
        return hash_bytes(self.encode())


def initialize(
    security_parameter: int,
    schedule: PriceSchedule,
    *,
    auditors: Sequence[bytes] = (),
    f: int = 0,
    T: float = 10.0,
    max_bits: int = MAX_BITS,
    rng=None,
) -> tuple[SystemParams, RetailerKey]:
    com = com_setup(security_parameter)
    params = SystemParams(com, zk_setup(com, max_bits), schedule, tuple(auditors), f, T)
    return params, prf_keygen(security_parameter, rng)


def slot_secret_gen(params: SystemParams, k_r: RetailerKey, t: int, n: int | None = None) -> list[int]:
    params.schedule.check_period(t)
    n = params.n if n is None else n
    return [prf_eval(k_r, i, t) for i in range(n)]


def check_measurements(params: SystemParams, x: Sequence[int], t: int) -> None:
    sched = params.schedule
    sched.check_period(t)
    if len(x) != sched.n:
        raise ValueError(f"expected {sched.n} measurements, got {len(x)}")
    for i, xi in enumerate(x):
        if not 0 <= xi <= sched.delta[t]:
            raise WitnessOutOfRange(f"user {i}: value {xi} outside [0, {sched.delta[t]}]")


def sum_statement(params: SystemParams, c_star: Commitment, t: int, peak: bool) -> tuple[Point, int]:
    """The (commitment, bound) pair the network-sum proof speaks about."""
    sched = params.schedule
    g = sched.gamma[t]
    if not peak:
        return c_star, g
    return c_star - (g + 1) * params.com.G, sched.n * sched.delta[t] - g - 1


def sum_witness(params: SystemParams, x_star: int, t: int, peak: bool) -> int:
    return x_star - params.schedule.gamma[t] - 1 if peak else x_star


class VerificationCache:
    """Memo of public-evidence verification outcomes for in-process simulations.

    Every client receives byte-identical public evidence and the checks on
    it are pure, so one outcome can serve them all.  Hits still bump the
    operation counters by the work they stand in for.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._memo: dict[bytes, tuple[bool, int]] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(*parts: bytes) -> bytes:
        h = hashlib.sha256()
        for p in parts:
            h.update(len(p).to_bytes(8, "big") + p)
        return h.digest()

    def run(self, key: bytes, fn, n_verify: int) -> bool:
        with self._lock:
            hit = self._memo.get(key)
        if hit is not None:
            self.hits += 1
            record("verify", hit[1])
            return hit[0]
        self.misses += 1
        result = fn()
        with self._lock:
            self._memo[key] = (result, n_verify)
        return result
