import random

from pptp.pricing import PriceSchedule
from pptp.protocol import initialize, slot_secret_gen


def setup(n=8, k=2, gamma=20, delta=7, seed=0, auditors=(), f=0):
    sched = PriceSchedule.build(n, k, alpha=3, beta=1, gamma=gamma, delta=delta)
    rng = random.Random(seed)
    params, k_r = initialize(128, sched, auditors=auditors, f=f, T=1.0, rng=rng)
    x = [rng.randint(0, delta) for _ in range(n)]
    return params, k_r, x, rng


def secrets_for(params, k_r, t=0):
    return slot_secret_gen(params, k_r, t)
