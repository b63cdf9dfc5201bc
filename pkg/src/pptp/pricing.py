"""Tariff model: per-period rates, truncation, the network-demand price rule,
bills, and a small load-scheduling simulator.

All quantities are integers.  Demand is counted in metering steps and
money in rate-times-step units, so billing never touches floating point.

The price rule charges the peak rate ``alpha_t`` when the truncated network
sum exceeds ``gamma_t`` or the user's own reading exceeds ``delta_t``, and
the base rate ``beta_t`` otherwise.  Both comparisons are strict.
"""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ScheduleError(ValueError):
    pass


def _vec(value, k: int, name: str) -> tuple[int, ...]:
    if isinstance(value, int):
        return (value,) * k
    out = tuple(value)
    if len(out) != k:
        raise ScheduleError(f"{name} has {len(out)} entries, expected {k}")
    for v in out:
        if not isinstance(v, int) or isinstance(v, bool):
            raise ScheduleError(f"{name} entries must be integers")
    return out


@dataclass(frozen=True)
class PriceSchedule:
    """Per-period tariff (alpha_t, beta_t, gamma_t, delta_t) for n users."""

    n: int
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    gamma: tuple[int, ...]
    delta: tuple[int, ...]

    def __post_init__(self):
        k = len(self.alpha)
        if k == 0:
            raise ScheduleError("schedule needs at least one period")
        for name in ("beta", "gamma", "delta"):
            if len(getattr(self, name)) != k:
                raise ScheduleError(f"{name} length differs from alpha")
        if self.n < 1:
            raise ScheduleError("n must be positive")
        for t in range(k):
            a, b, g, d = self.alpha[t], self.beta[t], self.gamma[t], self.delta[t]
            if min(a, b, g, d) < 0:
                raise ScheduleError(f"period {t}: negative entry")
            if b > a:
                raise ScheduleError(f"period {t}: beta {b} exceeds alpha {a}")
            if g > self.n * d - 1:
                raise ScheduleError(f"period {t}: gamma {g} above n*delta-1")

    @classmethod
    def build(cls, n: int, k: int, alpha, beta, gamma, delta) -> PriceSchedule:
        """Schedule from scalars (broadcast over k periods) or length-k sequences."""
        return cls(
            n,
            _vec(alpha, k, "alpha"),
            _vec(beta, k, "beta"),
            _vec(gamma, k, "gamma"),
            _vec(delta, k, "delta"),
        )

    @property
    def k(self) -> int:
        return len(self.alpha)

    def check_period(self, t: int) -> None:
        if not 0 <= t < self.k:
            raise IndexError(f"period {t} outside [0, {self.k})")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "gamma": list(self.gamma),
            "delta": list(self.delta),
        }

    @classmethod
    def from_dict(cls, d: dict) -> PriceSchedule:
        k = d.get("k")
        if k is None:
            k = len(d["alpha"])
        return cls.build(d["n"], k, d["alpha"], d["beta"], d["gamma"], d["delta"])

    def encode(self) -> bytes:
        """Canonical bytes: n, k, then the four vectors as 8-byte big-endian."""
        out = [self.n.to_bytes(8, "big"), self.k.to_bytes(8, "big")]
        for vec in (self.alpha, self.beta, self.gamma, self.delta):
            out.extend(v.to_bytes(8, "big") for v in vec)
        return b"".join(out)

    @classmethod
    def decode(cls, data: bytes) -> PriceSchedule:
        if len(data) < 16:
            raise ScheduleError("truncated schedule")
        n = int.from_bytes(data[:8], "big")
        k = int.from_bytes(data[8:16], "big")
        if len(data) != 16 + 32 * k:
            raise ScheduleError("schedule length mismatch")
        vals = [int.from_bytes(data[16 + 8 * i : 24 + 8 * i], "big") for i in range(4 * k)]
        return cls(n, *(tuple(vals[j * k : (j + 1) * k]) for j in range(4)))


@dataclass(frozen=True)
class MeasurementRecord:
    user: int
    period: int
    raw_y: int
    truncated_x: int

    @classmethod
    def of(cls, user: int, period: int, raw_y: int, sched: PriceSchedule) -> MeasurementRecord:
        return cls(user, period, raw_y, truncate(raw_y, sched.delta[period]))


@dataclass(frozen=True)
class Bill:
    user: int
    rates: tuple[int, ...]
    x_used: tuple[int, ...]
    total: int

    def encode(self) -> bytes:
        k = len(self.rates)
        out = [self.user.to_bytes(8, "big"), k.to_bytes(8, "big")]
        out.extend(r.to_bytes(8, "big") for r in self.rates)
        out.extend(x.to_bytes(8, "big") for x in self.x_used)
        out.append(self.total.to_bytes(16, "big", signed=True))
        return b"".join(out)

    @classmethod
    def decode(cls, data: bytes) -> Bill:
        user = int.from_bytes(data[:8], "big")
        k = int.from_bytes(data[8:16], "big")
        if len(data) != 16 + 16 * k + 16:
            raise ValueError("bill length mismatch")
        pos = 16
        rates = tuple(int.from_bytes(data[pos + 8 * i : pos + 8 * i + 8], "big") for i in range(k))
        pos += 8 * k
        xs = tuple(int.from_bytes(data[pos + 8 * i : pos + 8 * i + 8], "big") for i in range(k))
        pos += 8 * k
        return cls(user, rates, xs, int.from_bytes(data[pos:], "big", signed=True))


def truncate(raw_y: int, delta: int) -> int:
    if raw_y < 0 or delta < 0:
        raise ValueError("measurements and thresholds are nonnegative")
    return min(raw_y, delta)


def price(x_i: int, x_star: int, t: int, sched: PriceSchedule) -> int:
    sched.check_period(t)
    if x_i < 0 or x_star < 0:
        raise ValueError("demand must be nonnegative")
    if x_star > sched.gamma[t] or x_i > sched.delta[t]:
        return sched.alpha[t]
    return sched.beta[t]


def price_rtpibr(y_i: int, t: int, sched: PriceSchedule) -> int:
    """Inclining block rate on the user's own demand only."""
    sched.check_period(t)
    if y_i < 0:
        raise ValueError("demand must be nonnegative")
    return sched.alpha[t] if y_i > sched.gamma[t] else sched.beta[t]


def compute_bill(
    x: Sequence[int],
    x_star: Sequence[int],
    sched: PriceSchedule,
    user: int = 0,
    raw_y: Sequence[int] | None = None,
) -> Bill:
    """Bill over truncated readings ``x``.

    The rate test on the user's own demand uses ``raw_y`` when given (an
    untruncated reading above delta_t triggers the peak rate); otherwise
    ``x`` itself.
    """
    k = sched.k
    if len(x) != k or len(x_star) != k:
        raise ValueError(f"expected vectors of length {k}")
    if raw_y is not None and len(raw_y) != k:
        raise ValueError(f"expected raw readings of length {k}")
    own = x if raw_y is None else raw_y
    rates = tuple(price(own[t], x_star[t], t, sched) for t in range(k))
    total = sum(r * xi for r, xi in zip(rates, x))
    return Bill(user, rates, tuple(x), total)


def verify_bill(
    bill: Bill,
    own_x: Sequence[int],
    x_star: Sequence[int],
    sched: PriceSchedule,
    raw_y: Sequence[int] | None = None,
    user: int | None = None,
) -> bool:
    """True iff ``bill`` is exactly what compute_bill gives; ``user`` also pins the index."""
    if user is not None and bill.user != user:
        return False
    try:
        expected = compute_bill(own_x, x_star, sched, bill.user, raw_y)
    except (ValueError, IndexError):
        return False
    return bill == expected


def worst_case_bill(
    own_x: Sequence[int],
    honest_x_star: Sequence[int],
    n_adversarial: int,
    sched: PriceSchedule,
) -> int:
    """Largest bill a user can be charged when ``n_adversarial`` peers report delta_t.

    Each adversarial report adds at most delta_t to the honest sum, and no
    sum can exceed the user's own reading plus delta_t for every peer.
    """
    if not 0 <= n_adversarial <= sched.n:
        raise ValueError("n_adversarial must lie in [0, n]")
    total = 0
    for t in range(sched.k):
        d = sched.delta[t]
        worst = min(honest_x_star[t] + n_adversarial * d, own_x[t] + (sched.n - 1) * d)
        worst = max(worst, honest_x_star[t])
        total += price(own_x[t], worst, t, sched) * own_x[t]
    return total


# --- retailer cost ------------------------------------------------------------


CostSpec = Callable[[int, int], int]


def retailer_cost(
    total_demand: Sequence[int],
    coeffs: Sequence[int] | int | CostSpec = 1,
) -> int:
    """Sum over periods of C_t(s_t).

    ``coeffs`` is either the quadratic coefficients a_t (C_t(s) = a_t*s^2),
    a single coefficient for all periods, or a callable ``(t, s) -> cost``
    that should be convex and increasing in ``s``.
    """
    if any(s < 0 for s in total_demand):
        raise ValueError("demand must be nonnegative")
    if callable(coeffs):
        return sum(coeffs(t, s) for t, s in enumerate(total_demand))
    a = _vec(coeffs, len(total_demand), "coeffs")
    return sum(at * s * s for at, s in zip(a, total_demand))


# --- load simulation ------------------------------------------------------------


@dataclass(frozen=True)
class Load:
    duration: int
    demand: int
    start: int = 0


@dataclass(frozen=True)
class DemandProfile:
    must_run: tuple[int, ...]
    loads: tuple[Load, ...] = ()

    def __post_init__(self):
        k = len(self.must_run)
        if any(v < 0 for v in self.must_run):
            raise ValueError("must-run demand must be nonnegative")
        for ld in self.loads:
            if ld.duration < 1 or ld.demand < 0:
                raise ValueError("loads need positive duration and nonnegative demand")
            if ld.duration > k:
                raise ValueError(f"load of {ld.duration} periods does not fit in {k}")


@dataclass(frozen=True)
class FixedStart:
    """Each load starts at its own ``start``."""


@dataclass(frozen=True)
class AllAt:
    period: int


@dataclass(frozen=True)
class SplitHalf:
    """First half of the users (by index) start at ``first``, the rest at ``second``."""

    first: int
    second: int


Strategy = FixedStart | AllAt | SplitHalf

SCHEMES = ("naive", "peak_load", "rtpibr", "network")


@dataclass
class SimulationResult:
    demand: list[list[int]]
    total: list[int]
    costs: dict[str, tuple[int, int]] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scheme", "user_cost", "retailer_cost"])
        for scheme, (user_cost, ret_cost) in self.costs.items():
            w.writerow([scheme, user_cost, ret_cost])
        return buf.getvalue()


def _start_for(strategy: Strategy, user: int, n: int, load: Load) -> int:
    if isinstance(strategy, FixedStart):
        return load.start
    if isinstance(strategy, AllAt):
        return strategy.period
    if isinstance(strategy, SplitHalf):
        return strategy.first if user < (n + 1) // 2 else strategy.second
    raise TypeError(f"unknown strategy {strategy!r}")


def place_loads(profiles: Sequence[DemandProfile], strategy: Strategy) -> list[list[int]]:
    if not profiles:
        raise ValueError("no profiles")
    k = len(profiles[0].must_run)
    n = len(profiles)
    y = []
    for i, prof in enumerate(profiles):
        if len(prof.must_run) != k:
            raise ValueError("profiles disagree on the number of periods")
        row = list(prof.must_run)
        for ld in prof.loads:
            s = _start_for(strategy, i, n, ld)
            if s < 0 or s + ld.duration > k:
                raise ValueError(f"load at {s} for {ld.duration} periods runs past the cycle")
            for t in range(s, s + ld.duration):
                row[t] += ld.demand
        y.append(row)
    return y


def simulate_loads(
    profiles: Sequence[DemandProfile],
    strategy: Strategy,
    sched: PriceSchedule,
    *,
    peak_periods: Iterable[int] = (),
    block_threshold: Sequence[int] | int | None = None,
    cost_coeffs: Sequence[int] | int | CostSpec = 1,
) -> SimulationResult:
    """Place the loads and price the outcome under every scheme in SCHEMES.

    ``naive`` charges beta_t flat; ``peak_load`` charges alpha_t in
    ``peak_periods``; ``rtpibr`` charges alpha_t when a user's own demand
    exceeds ``block_threshold`` (default gamma_t / n); ``network`` is the
    network-demand rule billed over truncated readings.
    """
    y = place_loads(profiles, strategy)
    n, k = len(y), sched.k
    if k != len(y[0]):
        raise ValueError("schedule and profiles disagree on k")
    total = [sum(y[i][t] for i in range(n)) for t in range(k)]
    ret = retailer_cost(total, cost_coeffs)
    peak = set(peak_periods)
    if block_threshold is None:
        block = tuple(g // sched.n for g in sched.gamma)
    else:
        block = _vec(block_threshold, k, "block_threshold")
    block_sched = PriceSchedule(sched.n, sched.alpha, sched.beta, block, sched.delta)

    x = [[truncate(y[i][t], sched.delta[t]) for t in range(k)] for i in range(n)]
    x_star = [sum(x[i][t] for i in range(n)) for t in range(k)]
    costs = {
        "naive": sum(sched.beta[t] * total[t] for t in range(k)),
        "peak_load": sum(
            (sched.alpha[t] if t in peak else sched.beta[t]) * total[t] for t in range(k)
        ),
        "rtpibr": sum(
            price_rtpibr(y[i][t], t, block_sched) * y[i][t] for i in range(n) for t in range(k)
        ),
        "network": sum(
            compute_bill(x[i], x_star, sched, i, raw_y=y[i]).total for i in range(n)
        ),
    }
    result = SimulationResult(y, total)
    result.costs = {s: (costs[s], ret) for s in SCHEMES}
    return result


def ev_charging_scenario(n: int = 10) -> tuple[PriceSchedule, list[DemandProfile], dict]:
    """Hourly day with one six-hour EV charge per household.

    Period 0 is midnight and 10 demand steps are 1 kW.  Returns the
    schedule, the profiles and the three placement patterns: everybody at
    6 PM, everybody at midnight, and half at midnight / half at noon.
    """
    must_run = tuple([2] * 7 + [4] * 11 + [8] * 4 + [4] * 2)
    profiles = [DemandProfile(must_run, (Load(6, 10, 0),)) for _ in range(n)]
    sched = PriceSchedule.build(n, 24, alpha=3, beta=1, gamma=10 * n, delta=20)
    patterns = {
        "evening": AllAt(18),
        "midnight": AllAt(0),
        "split": SplitHalf(0, 12),
    }
    return sched, profiles, patterns


# --- configuration -------------------------------------------------------------


def load_config(source) -> dict:
    """Parse a TOML document from a path or text."""
    if hasattr(source, "read"):
        return tomllib.loads(source.read())
    text = str(source)
    if "\n" in text or "=" in text:
        return tomllib.loads(text)
    with open(text, "rb") as fh:
        return tomllib.load(fh)


def schedule_from_config(cfg: dict) -> PriceSchedule:
    return PriceSchedule.from_dict(cfg["schedule"])


def profiles_from_config(cfg: dict) -> list[DemandProfile]:
    """``[[profile]]`` tables with ``must_run`` and optional ``loads`` and ``count``."""
    out = []
    for p in cfg.get("profile", []):
        loads = tuple(Load(*ld) for ld in p.get("loads", []))
        prof = DemandProfile(tuple(p["must_run"]), loads)
        out.extend([prof] * int(p.get("count", 1)))
    return out


def strategy_from_config(spec) -> Strategy:
    """``"fixed"``, ``"all_at:18"`` or ``"split:0:12"``."""
    parts = str(spec).split(":")
    if parts[0] == "fixed":
        return FixedStart()
    if parts[0] == "all_at" and len(parts) == 2:
        return AllAt(int(parts[1]))
    if parts[0] == "split" and len(parts) == 3:
        return SplitHalf(int(parts[1]), int(parts[2]))
    raise ValueError(f"unknown strategy {spec!r}")
