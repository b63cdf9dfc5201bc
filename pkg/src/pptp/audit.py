"""Auditor-free spot checking and its detection probability.

Each user draws ``z`` peers uniformly without replacement, fetches their
inclusion proofs and leaf range proofs, and publishes a fraud proof for
any peer whose material fails.  With ``f`` bad leaves among the other
``n - 1`` users and ``h`` honest checkers drawing independently, the
chance that nobody hits a bad leaf is at most ``((n-f-1)/(n-1))^(h*z)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable

from .bulletin import Board, Kind
from .codec import Writer
from .crypto import SigKeyPair, hash_bytes
from .merkle import (
    Clock,
    FraudProof,
    InclusionProof,
    RootEntry,
    SystemClock,
    board_root,
    check_fraud,
    find_fraud,
    verify_inclusion,
)
from .protocol import SystemParams
from .rangeproof import zk_verify


@dataclass(frozen=True)
class AuditPlan:
    checker: int
    targets: tuple[int, ...]
    seed: int | None = None


def pick_targets(i: int, n: int, z: int, rng: random.Random | int | None = None) -> AuditPlan:
    if not 0 <= i < n:
        raise ValueError("checker index out of range")
    if not 0 <= z <= n - 1:
        raise ValueError(f"z must lie in [0, {n - 1}]")
    seed = rng if isinstance(rng, int) else None
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    picks = rng.sample(range(n - 1), z)
    return AuditPlan(i, tuple(p if p < i else p + 1 for p in picks), seed)


class FetchError(Exception):
    """The retailer did not serve the requested material."""


Fetch = Callable[[int], tuple[InclusionProof, bytes]]


@dataclass
class SpotVerdict:
    frauds: list[tuple[int, FraudProof]] = field(default_factory=list)
    unavailable: list[int] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.frauds and not self.unavailable

    @property
    def first_fraud(self) -> tuple[int, FraudProof] | None:
        return self.frauds[0] if self.frauds else None


def check_target(
    params: SystemParams, j: int, G: InclusionProof, proof: bytes, root: RootEntry | None, t: int
) -> FraudProof | None | bool:
    """Fraud proof for target j, None when the target is clean, or False when
    the material is not anchored to the board (and so proves nothing)."""
    if root is None or G.index != j or G.n != params.n or not G.well_formed():
        return False
    if G.root_hash() != root.h_root or hash_bytes(proof) != G.leaf_digest:
        return False
    if not verify_inclusion(G) or G.root != root.c_root:
        return FraudProof(G)
    if not zk_verify(params.zk, G.leaf, params.schedule.delta[t], proof):
        return FraudProof(G, proof)
    return None


def spot_check(
    params: SystemParams,
    plan: AuditPlan,
    fetch: Fetch,
    board: Board,
    t: int,
    *,
    cycle: int = 0,
    keys: SigKeyPair | None = None,
    publish: bool = True,
) -> SpotVerdict:
    """Check every target; publish fraud proofs and unavailability complaints.

    Material that does not hash to the board root is treated like a refusal
    to serve: it cannot convict anyone, but it is still complained about.
    """
    root = board_root(board, cycle, t)
    out = SpotVerdict()
    for j in plan.targets:
        try:
            G, proof = fetch(j)
            res = check_target(params, j, G, proof, root, t)
        except (FetchError, ValueError, OSError):
            res = False
        if res is False:
            out.unavailable.append(j)
        elif res is not None:
            out.frauds.append((j, res))
    if publish and keys is not None:
        for j, fraud in out.frauds:
            board.append_signed(Kind.FRAUD, cycle, t, fraud.encode(), keys)
        for j in out.unavailable:
            board.append_signed(Kind.UNAVAILABLE, cycle, t, _complaint(plan.checker, j), keys)
    return out


def _complaint(checker: int, target: int) -> bytes:
    return Writer().u64(checker).u64(target).getvalue()


def await_no_fraud(
    board: Board,
    params: SystemParams,
    t: int,
    T: float,
    clock: Clock | None = None,
    *,
    cycle: int = 0,
    poll: float = 0.05,
) -> bool:
    """Wait T; False as soon as a fraud proof that re-checks shows up."""
    clock = clock or SystemClock()
    deadline = clock.now() + T
    while True:
        if find_fraud(params, board, cycle, t) is not None:
            return False
        if clock.now() >= deadline:
            return True
        clock.sleep(min(poll, deadline - clock.now()))


# --- probabilities -----------------------------------------------------------------


def _check_domain(n: int, f: int, z: int) -> None:
    if n < 1 or not 0 <= f <= n - 1 or not 0 <= z <= n - 1:
        raise ValueError("need n >= 1, 0 <= f <= n-1 and 0 <= z <= n-1")


def hypergeom_pmf(n: int, f: int, z: int, u: int) -> Fraction:
    """P[u bad peers among z drawn from the other n-1 users, f of them bad]."""
    _check_domain(n, f, z)
    if not 0 <= u <= min(f, z):
        raise ValueError("u must lie in [0, min(f, z)]")
    return Fraction(comb(f, u) * comb(n - f - 1, z - u), comb(n - 1, z))


@dataclass(frozen=True)
class MissProbability:
    bound: Fraction
    exact: Fraction

    def __float__(self) -> float:
        return float(self.bound)


def miss_probability_bound(n: int, f: int, h: int, z: int) -> MissProbability:
    """Chance that h independent checkers drawing z peers each all miss.

    ``exact`` is the hypergeometric zero-hit probability to the power h;
    ``bound`` replaces each factor by the largest one, (n-f-1)/(n-1).
    """
    _check_domain(n, f, z)
    if h < 0:
        raise ValueError("h must be nonnegative")
    if n == 1:
        return MissProbability(Fraction(1), Fraction(1))
    bound = Fraction(n - f - 1, n - 1) ** (h * z)
    per_checker = Fraction(1)
    for i in range(z):
        per_checker *= Fraction(n - f - i - 1, n - i - 1)
    return MissProbability(bound, per_checker**h)


def simulate_misses(
    n: int,
    checkers: list[int],
    z: int,
    trials: int,
    verdict: Callable[[int], bool],
    seed: int = 0,
) -> int:
    """Count trials in which no checker's plan hits a target that ``verdict`` flags.

    ``verdict(j)`` is the spot-check outcome for target j; callers pass a
    memo of real checks so the sampling can run many trials cheaply.
    """
    rng = random.Random(seed)
    misses = 0
    for _ in range(trials):
        hit = False
        for i in checkers:
            plan = pick_targets(i, n, z, rng)
            if any(verdict(j) for j in plan.targets):
                hit = True
                break
        if not hit:
            misses += 1
    return misses
