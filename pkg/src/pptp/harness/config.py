"""Harness configuration: one TOML document per deployment.

Example::

    variant = "merkle"        # or "baseline"
    seed = 7
    cycles = 1
    f = 1
    T = 5.0
    auditors = 2              # auditor keys derived from the seed
    listen = "127.0.0.1:7700"
    board = "board.log"

    [schedule]
    n = 8
    k = 4
    alpha = 3
    beta = 1
    gamma = 20
    delta = 7
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..crypto import RetailerKey, SigKeyPair, prf_keygen, sig_keygen
from ..pricing import PriceSchedule, load_config
from ..protocol import SystemParams, initialize

VARIANTS = ("baseline", "merkle")


@dataclass(frozen=True)
class HarnessConfig:
    schedule: PriceSchedule
    variant: str = "baseline"
    seed: int = 0
    cycles: int = 1
    f: int = 1
    T: float = 5.0
    auditors: int = 2
    dishonest_auditors: int = 0
    listen: str = "127.0.0.1:7700"
    board: str | None = None
    workers: int = 1
    measurements: tuple[tuple[int, ...], ...] | None = None
    auditor_vks: tuple[bytes, ...] | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.dishonest_auditors > self.auditors:
            raise ValueError("more dishonest auditors than auditors")

    @property
    def n(self) -> int:
        return self.schedule.n

    @property
    def k(self) -> int:
        return self.schedule.k

    @property
    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen.rpartition(":")
        return host or "127.0.0.1", int(port)

    def with_(self, **kw) -> HarnessConfig:
        return replace(self, **kw)

    # --- derived material; everything is a function of the seed -------------

    def _rng(self, *label) -> random.Random:
        h = hashlib.sha256(repr((self.seed,) + label).encode()).digest()
        return random.Random(int.from_bytes(h[:8], "big"))

    def retailer_key(self) -> RetailerKey:
        return prf_keygen(128, self._rng("k_r"))

    def auditor_keys(self, j: int) -> SigKeyPair:
        return sig_keygen(hashlib.sha256(repr((self.seed, "auditor", j)).encode()).digest())

    def auditor_registry(self) -> tuple[bytes, ...]:
        if self.auditor_vks is not None:
            return self.auditor_vks
        return tuple(self.auditor_keys(j).vk for j in range(self.auditors))

    def checker_keys(self, i: int) -> SigKeyPair:
        return sig_keygen(hashlib.sha256(repr((self.seed, "user", i)).encode()).digest())

    def proof_rng(self, cycle: int, t: int) -> random.Random:
        return self._rng("proofs", cycle, t)

    def system_params(self) -> SystemParams:
        params, _ = initialize(
            128,
            self.schedule,
            auditors=self.auditor_registry() if self.variant == "merkle" else (),
            f=self.f,
            T=self.T,
        )
        return params

    def raw_measurements(self, cycle: int) -> list[list[int]]:
        """n x k readings: the configured matrix, or uniform draws in [0, delta_t]."""
        if self.measurements is not None:
            return [list(row) for row in self.measurements]
        rng = self._rng("measurements", cycle)
        return [
            [rng.randint(0, self.schedule.delta[t]) for t in range(self.k)] for _ in range(self.n)
        ]

    @classmethod
    def from_dict(cls, d: dict) -> HarnessConfig:
        sched = PriceSchedule.from_dict(d["schedule"])
        kw = {}
        for name in ("variant", "seed", "cycles", "f", "T", "auditors", "dishonest_auditors",
                     "listen", "board", "workers"):
            if name in d:
                kw[name] = d[name]
        if "T" in kw:
            kw["T"] = float(kw["T"])
        if "measurements" in d:
            kw["measurements"] = tuple(tuple(row) for row in d["measurements"])
        if "auditor_keys" in d:
            kw["auditor_vks"] = tuple(bytes.fromhex(h) for h in d["auditor_keys"])
        return cls(sched, **kw)

    @classmethod
    def load(cls, path) -> HarnessConfig:
        cfg = cls.from_dict(load_config(Path(path)))
        if cfg.board is not None and not Path(cfg.board).is_absolute():
            cfg = cfg.with_(board=str(Path(path).parent / cfg.board))
        return cfg
