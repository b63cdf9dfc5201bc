"""How likely is it that peer spot checks miss every bad leaf?

Ten of a hundred leaves are corrupted.  Fifty honest users each check five
random peers; the run compares the Monte Carlo miss rate against the exact
probability and the closed-form bound, then shrinks the checking effort
until misses become visible.
"""

from pptp.audit import miss_probability_bound, simulate_misses

N, F = 100, 10
BAD = set(range(0, N, N // F))


def main():
    checkers = [i for i in range(N) if i not in BAD]
    trials = 10_000
    print(f"{'h':>3} {'z':>3} {'empirical':>10} {'exact':>10} {'bound':>10}")
    for h, z in ((50, 5), (5, 2), (2, 2), (1, 1)):
        misses = simulate_misses(N, checkers[:h], z, trials, BAD.__contains__, seed=h * 100 + z)
        m = miss_probability_bound(N, F, h, z)
        print(f"{h:>3} {z:>3} {misses / trials:>10.4f} {float(m.exact):>10.4f} {float(m.bound):>10.4f}")


if __name__ == "__main__":
    main()
