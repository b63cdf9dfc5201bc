"""EV charging: when ten households plug in, and what each pricing scheme charges.

Three patterns share the same energy: everyone at the evening peak, everyone
at midnight, or each car split across two off-peak slots.  The split pattern
is the cheapest for users and keeps the retailer's convex cost lowest.
"""

from pptp.cli import EV_PEAK_PERIODS
from pptp.pricing import ev_charging_scenario, simulate_loads


def main():
    sched, profiles, patterns = ev_charging_scenario(10)
    print(f"{'pattern':<10} {'scheme':<10} {'user cost':>10} {'retailer cost':>14}")
    for name, strategy in patterns.items():
        res = simulate_loads(profiles, strategy, sched, peak_periods=EV_PEAK_PERIODS)
        for scheme, (user, retailer) in res.costs.items():
            print(f"{name:<10} {scheme:<10} {user:>10} {retailer:>14}")
        print(f"{'':<10} peak hourly load {max(res.total)}")


if __name__ == "__main__":
    main()
