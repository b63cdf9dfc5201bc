"""Command line entry point: ``pptp <subcommand>``."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from . import __version__
from .bulletin import verify_file
from .pricing import (
    ev_charging_scenario,
    load_config,
    profiles_from_config,
    schedule_from_config,
    simulate_loads,
    strategy_from_config,
)

EV_PEAK_PERIODS = range(14, 20)


def _demo_pricing(args) -> int:
    if args.config:
        doc = load_config(Path(args.config))
        sched = schedule_from_config(doc)
        profiles = profiles_from_config(doc)
        patterns = {name: strategy_from_config(s) for name, s in doc["strategies"].items()}
        peak = doc.get("peak_periods", ())
        coeffs = doc.get("cost_coeffs", 1)
    else:
        sched, profiles, patterns = ev_charging_scenario(args.n)
        peak, coeffs = EV_PEAK_PERIODS, 1
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for name, strategy in patterns.items():
        res = simulate_loads(profiles, strategy, sched, peak_periods=peak, cost_coeffs=coeffs)
        text = res.to_csv()
        if out_dir:
            (out_dir / f"{name}.csv").write_text(text)
        print(f"# pattern: {name}")
        print(text, end="")
    return 0


def _load_harness(args):
    from .harness.config import HarnessConfig

    cfg = HarnessConfig.load(args.config)
    if getattr(args, "variant", None):
        cfg = cfg.with_(variant=args.variant)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def _run(args) -> int:
    from .harness import net
    from .harness.retailer import TamperSpec

    cfg = _load_harness(args)
    if args.role == "retailer":
        tamper = None
        if args.tamper:
            tamper = TamperSpec.parse(
                args.tamper, user=args.user, period=args.period, magnitude=args.magnitude
            )
        return asyncio.run(net.run_retailer(cfg, tamper))
    if args.index is None:
        print(f"run {args.role}: --index is required", file=sys.stderr)
        return 2
    if args.role == "client":
        return asyncio.run(net.run_client(cfg, args.index, port=args.port, verdict_path=args.verdict))
    return asyncio.run(net.run_auditor(cfg, args.index, port=args.port))


def _tamper(args) -> int:
    from .harness.config import HarnessConfig
    from .harness.retailer import TamperSpec
    from .harness.sim import run_cycle
    from .pricing import PriceSchedule

    if args.config:
        cfg = _load_harness(args)
    else:
        sched = PriceSchedule.build(8, 4, alpha=3, beta=1, gamma=20, delta=7)
        cfg = HarnessConfig(
            sched, variant=args.variant or "baseline", seed=args.seed or 0,
            auditors=2, dishonest_auditors=1, f=1,
        )
    spec = TamperSpec.parse(args.scenario, user=args.user, period=args.period, magnitude=args.magnitude)
    res = run_cycle(cfg, spec)
    for c in res.clients:
        print(f"user={c.user} evidence={''.join('ok ' if e else 'BAD ' for e in c.evidence_ok).strip()} "
              f"bill={'ok' if c.bill_ok else 'BAD'} verdict={'accept' if c.accepted else 'reject'}")
    for j, row in enumerate(res.auditor_verdicts):
        print(f"auditor={j} verdicts={','.join(v.name for v in row)}")
    print(f"scenario={spec.scenario.name} variant={cfg.variant} detected={res.detected}")
    return 0 if res.detected else 1


def _bench(args) -> int:
    from .harness.bench import bench, to_csv

    rows = bench(
        args.n, args.variant, reps=args.reps, workers=args.workers,
        seed=args.seed or 0, inclusion_only=args.inclusion_only,
    )
    text = to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0


def _board(args) -> int:
    ok, reason = verify_file(args.path)
    print(f"{'OK' if ok else 'CORRUPT'}: {reason}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pptp", description="Privacy-preserving transparent pricing")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("demo-pricing", help="price the EV charging patterns under every scheme")
    d.add_argument("--config", help="TOML with [schedule], [[profile]] and [strategies]")
    d.add_argument("--n", type=int, default=10, help="households in the built-in scenario")
    d.add_argument("--out", help="directory for one CSV per pattern")
    d.set_defaults(func=_demo_pricing)

    r = sub.add_parser("run", help="run one networked party")
    r.add_argument("role", choices=("retailer", "client", "auditor"))
    r.add_argument("--config", required=True)
    r.add_argument("--index", type=int, help="user or auditor index")
    r.add_argument("--port", type=int, help="override the configured port")
    r.add_argument("--variant", choices=("baseline", "merkle"))
    r.add_argument("--seed", type=int)
    r.add_argument("--verdict", help="client: write the verdict record here")
    r.add_argument("--tamper", help="retailer: tamper scenario to apply")
    r.add_argument("--user", type=int, default=0)
    r.add_argument("--period", type=int, default=0)
    r.add_argument("--magnitude", type=int, default=1)
    r.set_defaults(func=_run)

    t = sub.add_parser("tamper", help="run one cycle in-process with a cheating retailer")
    t.add_argument("--scenario", required=True, help="INFLATE_SUM, SUBSTITUTE_LEAF, ...")
    t.add_argument("--config")
    t.add_argument("--variant", choices=("baseline", "merkle"))
    t.add_argument("--seed", type=int)
    t.add_argument("--user", type=int, default=0)
    t.add_argument("--period", type=int, default=0)
    t.add_argument("--magnitude", type=int, default=1)
    t.set_defaults(func=_tamper)

    b = sub.add_parser("bench", help="timings and operation counts as CSV")
    b.add_argument("--n", type=int, nargs="+", required=True)
    b.add_argument("--variant", choices=("baseline", "merkle"), required=True)
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--workers", type=int, nargs="+", default=[1])
    b.add_argument("--seed", type=int)
    b.add_argument("--inclusion-only", action="store_true", help="merkle path checks only")
    b.add_argument("--out")
    b.set_defaults(func=_bench)

    bd = sub.add_parser("board", help="bulletin board tools")
    bsub = bd.add_subparsers(dest="board_command", required=True)
    bv = bsub.add_parser("verify", help="check a board file's hash chain and signatures")
    bv.add_argument("path")
    bv.set_defaults(func=_board)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"pptp: {e}", file=sys.stderr)
        return 2
