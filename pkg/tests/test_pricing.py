import pytest
from hypothesis import assume, given, strategies as st

from pptp.pricing import (
    AllAt,
    Bill,
    DemandProfile,
    FixedStart,
    Load,
    MeasurementRecord,
    PriceSchedule,
    ScheduleError,
    SplitHalf,
    compute_bill,
    ev_charging_scenario,
    load_config,
    place_loads,
    price,
    price_rtpibr,
    profiles_from_config,
    retailer_cost,
    schedule_from_config,
    simulate_loads,
    strategy_from_config,
    truncate,
    verify_bill,
    worst_case_bill,
)


@st.composite
def schedules(draw, max_n=8, max_k=4):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, max_k))
    delta = [draw(st.integers(1, 9)) for _ in range(k)]
    alpha = [draw(st.integers(0, 9)) for _ in range(k)]
    beta = [draw(st.integers(0, a)) for a in alpha]
    gamma = [draw(st.integers(0, n * d - 1)) for d in delta]
    return PriceSchedule(n, tuple(alpha), tuple(beta), tuple(gamma), tuple(delta))


def one(alpha=3, beta=1, gamma=10, delta=5, n=4, k=1):
    return PriceSchedule.build(n, k, alpha, beta, gamma, delta)


def test_truncate():
    assert truncate(7, 5) == 5
    assert truncate(0, 5) == 0
    assert truncate(5, 5) == 5
    with pytest.raises(ValueError):
        truncate(-1, 5)


@given(st.integers(0, 100), st.integers(0, 100))
def test_truncate_idempotent(y, d):
    assert truncate(truncate(y, d), d) == truncate(y, d) == min(y, d)


def test_schedule_validation():
    with pytest.raises(ScheduleError):
        one(alpha=1, beta=2)
    with pytest.raises(ScheduleError):
        one(gamma=20, delta=5)  # n*delta - 1 = 19
    with pytest.raises(ScheduleError):
        one(beta=-1)
    s = one(gamma=19)
    assert PriceSchedule.from_dict(s.to_dict()) == s
    assert PriceSchedule.decode(s.encode()) == s


def test_measurement_record():
    s = one()
    m = MeasurementRecord.of(2, 0, 9, s)
    assert m.truncated_x == 5 and m.raw_y == 9


def test_price_examples():
    s = one()
    assert price(3, 10, 0, s) == 1  # x* equal to gamma is not above it
    assert price(6, 0, 0, s) == 3
    assert price(0, 0, 0, s) == 1
    assert price(0, 11, 0, s) == 3
    with pytest.raises(IndexError):
        price(0, 0, 1, s)


def test_rtpibr_examples():
    s = one()
    assert price_rtpibr(10, 0, s) == 1
    assert price_rtpibr(11, 0, s) == 3
    assert price_rtpibr(0, 0, one(gamma=0)) == 1


@given(schedules(), st.integers(0, 20), st.integers(0, 200), st.integers(0, 5))
def test_price_range_and_monotone(s, x, xs, bump):
    p = price(x, xs, 0, s)
    assert p in (s.alpha[0], s.beta[0])
    assert price(x, xs + bump, 0, s) >= p
    assert price(x + bump, xs, 0, s) >= p


def test_compute_bill_examples():
    s = one(delta=5)
    assert compute_bill([2], [2], s).total == 2
    assert compute_bill([0], [0], s).total == 0
    s2 = PriceSchedule(4, (3, 5), (1, 2), (10, 10), (5, 5))
    b = compute_bill([2, 3], [4, 11], s2)
    assert b.total == 1 * 2 + 5 * 3 and b.rates == (1, 5)
    with pytest.raises(ValueError):
        compute_bill([1], [1, 2], s2)


def test_raw_reading_above_cap_triggers_peak_rate_on_capped_amount():
    s = one(delta=5)
    b = compute_bill([5], [5], s, raw_y=[9])
    assert b.rates == (3,) and b.total == 15


def test_verify_bill_examples():
    s = PriceSchedule(4, (3, 5), (1, 2), (10, 10), (5, 5))
    b = compute_bill([2, 3], [4, 11], s)
    assert verify_bill(b, [2, 3], [4, 11], s)
    assert not verify_bill(Bill(b.user, b.rates, b.x_used, b.total + 1), [2, 3], [4, 11], s)
    swapped = Bill(b.user, (3, 5), b.x_used, 3 * 2 + 5 * 3)
    assert not verify_bill(swapped, [2, 3], [4, 11], s)


@given(schedules(), st.data())
def test_bill_round_trip_and_perturbation(s, data):
    x = [data.draw(st.integers(0, d)) for d in s.delta]
    xs = [data.draw(st.integers(xi, s.n * d)) for xi, d in zip(x, s.delta)]
    b = compute_bill(x, xs, s, user=1)
    assert verify_bill(b, x, xs, s, user=1)
    assert b.total == sum(r * xi for r, xi in zip(b.rates, b.x_used))
    assert Bill.decode(b.encode()) == b
    field = data.draw(st.sampled_from(["user", "rate", "x", "total"]))
    t = data.draw(st.integers(0, s.k - 1))
    if field == "user":
        bad = Bill(b.user + 1, b.rates, b.x_used, b.total)
    elif field == "rate":
        other = s.alpha[t] if b.rates[t] == s.beta[t] else s.beta[t]
        assume(other != b.rates[t])
        rates = list(b.rates)
        rates[t] = other
        bad = Bill(b.user, tuple(rates), b.x_used, b.total)
    elif field == "x":
        xu = list(b.x_used)
        xu[t] += 1
        bad = Bill(b.user, b.rates, tuple(xu), b.total)
    else:
        bad = Bill(b.user, b.rates, b.x_used, b.total - 1)
    assert not verify_bill(bad, x, xs, s, user=1)


def test_worst_case_bill():
    s = PriceSchedule(4, (3, 3), (1, 1), (10, 10), (5, 5))
    x, xs = [2, 2], [6, 8]
    assert worst_case_bill(x, xs, 0, s) == compute_bill(x, xs, s).total
    assert worst_case_bill(x, xs, 3, s) == 3 * 4
    # gamma = n*delta - 1: even n-1 peers at delta plus a small own reading stay below
    tight = PriceSchedule(4, (3,), (1,), (19,), (5,))
    assert worst_case_bill([1], [1], 3, tight) == 1
    with pytest.raises(ValueError):
        worst_case_bill(x, xs, 5, s)


@given(schedules(), st.data())
def test_worst_case_dominates_honest(s, data):
    x = [data.draw(st.integers(0, d)) for d in s.delta]
    xs = [data.draw(st.integers(xi, xi + (s.n - 1) * d)) for xi, d in zip(x, s.delta)]
    a = data.draw(st.integers(0, s.n))
    assert worst_case_bill(x, xs, a, s) >= compute_bill(x, xs, s).total


def test_retailer_cost():
    assert retailer_cost([0, 0]) == 0
    assert retailer_cost([1, 1]) < retailer_cost([2, 0])
    assert retailer_cost([3], 2) == 18
    assert retailer_cost([1, 2], [1, 3]) == 1 + 12
    assert retailer_cost([2], lambda t, s: s**3) == 8


def test_simulator_basics():
    s = PriceSchedule.build(2, 3, 3, 1, 4, 5)
    prof = [DemandProfile((1, 2, 3), ()) for _ in range(2)]
    assert place_loads(prof, FixedStart()) == [[1, 2, 3], [1, 2, 3]]
    res = simulate_loads(prof, FixedStart(), s)
    assert res.demand == [[1, 2, 3], [1, 2, 3]]
    assert res.to_csv().splitlines()[0] == "scheme,user_cost,retailer_cost"
    with pytest.raises(ValueError):
        place_loads([DemandProfile((0, 0), (Load(3, 1, 0),))], FixedStart())


def test_convex_cost_prefers_emptier_period():
    s = PriceSchedule.build(1, 2, 3, 1, 0, 9)
    prof = [DemandProfile((4, 0), (Load(1, 2, 0),))]
    busy = simulate_loads(prof, AllAt(0), s).costs["network"][1]
    quiet = simulate_loads(prof, AllAt(1), s).costs["network"][1]
    assert quiet < busy


def test_ev_scenario_ordering():
    sched, profiles, patterns = ev_charging_scenario()
    res = {k: simulate_loads(profiles, p, sched, peak_periods=range(14, 20)) for k, p in patterns.items()}
    user = {k: r.costs["network"][0] for k, r in res.items()}
    ret = {k: r.costs["network"][1] for k, r in res.items()}
    assert user["split"] < user["evening"]
    assert user["split"] <= user["midnight"]
    assert ret["evening"] > ret["midnight"] > ret["split"]
    assert user == {"evening": 3580, "midnight": 3020, "split": 1580}


def test_config_parsing():
    doc = load_config(
        """
        strategies = { a = "all_at:3", b = "split:0:2", c = "fixed" }
        [schedule]
        n = 2
        k = 4
        alpha = 3
        beta = 1
        gamma = [4, 4, 4, 4]
        delta = 5
        [[profile]]
        must_run = [1, 1, 1, 1]
        loads = [[1, 2, 0]]
        count = 2
        """
    )
    s = schedule_from_config(doc)
    assert s.k == 4 and s.gamma == (4, 4, 4, 4)
    profs = profiles_from_config(doc)
    assert len(profs) == 2 and profs[0].loads[0] == Load(1, 2, 0)
    assert isinstance(strategy_from_config("split:0:2"), SplitHalf)
    with pytest.raises(ValueError):
        strategy_from_config("nonsense")
