"""Every way the retailer can cheat, against both variants.

The Merkle runs have two auditors, one of whom rubber-stamps everything;
the honest one is enough to expose the cheat.
"""

from pptp.harness import HarnessConfig, Scenario, TamperSpec, run_cycle
from pptp.pricing import PriceSchedule


def main():
    sched = PriceSchedule.build(8, 4, alpha=3, beta=1, gamma=20, delta=7)
    for variant in ("baseline", "merkle"):
        cfg = HarnessConfig(sched, variant=variant, auditors=2, dishonest_auditors=1, f=1)
        honest = run_cycle(cfg)
        print(f"[{variant}] honest cycle: all accept={honest.all_accept}, fraud reports={honest.fraud_reports()}")
        for scenario in Scenario:
            res = run_cycle(cfg, TamperSpec(scenario, user=3, period=1, magnitude=2))
            rejecting = [c.user for c in res.clients if not c.accepted]
            print(f"[{variant}] {scenario.name:<18} detected={res.detected!s:<5} "
                  f"rejecting users={rejecting} fraud reports={res.fraud_reports()}")


if __name__ == "__main__":
    main()
