"""Ablations around the mobile 100-reader scenario.

    python3 scripts/ablations.py --seeds 3

For each protocol: reads, tag acquisitions, reads/s, tags/s, waiting time in
both scopes and network energy, under the per-protocol message timing and under
a uniform timing where every protocol pays the IE-RAP message costs. --tags
changes the tag density.
IE-RAP is also run with ISP disabled and with SIFT replaced by a uniform draw.
"""
import argparse
from statistics import mean

from dresim.config import preset
from dresim.engine import run_simulation

COLUMNS = ("reads", "acq", "reads/s", "tags/s", "wait_r", "wait_g", "energy_J")


def row(reports):
    return (mean(r.successful_reads for r in reports), mean(r.acquisitions for r in reports),
            mean(r.throughput for r in reports), mean(r.tag_rate for r in reports),
            mean(r.avg_waiting_round for r in reports), mean(r.avg_waiting_global for r in reports),
            mean(r.network_energy for r in reports))


def show(label, values):
    print(f"{label:<24}" + "".join(f"{v:>11.4g}" for v in values))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--readers", type=int, default=100)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--rounds", type=int, default=128)
    ap.add_argument("--tags", type=int, default=1000)
    ap.add_argument("--skip-dmrcp", action="store_true")
    args = ap.parse_args()

    print(f"{'':<24}" + "".join(f"{c:>11}" for c in COLUMNS))
    for profile in ("table1", "uniform"):
        print(f"-- timing profile: {profile}")
        base = preset("scenario3", args.readers, rounds=args.rounds, tags=args.tags, timing_profile=profile)
        for cfg in base:
            if args.skip_dmrcp and cfg.protocol == "dmrcp":
                continue
            reps = [run_simulation(cfg.with_(seed=s)) for s in range(1, args.seeds + 1)]
            show(f"{cfg.protocol}/F{cfg.channels}", row(reps))
        ierap = base[0]
        show("ierap/F4 isp off", row([run_simulation(ierap.with_(isp=False, seed=s))
                                      for s in range(1, args.seeds + 1)]))
        # M = 1 makes the SIFT draw uniform
        show("ierap/F4 uniform slots", row([run_simulation(ierap.with_(sift_m=1, seed=s))
                                            for s in range(1, args.seeds + 1)]))


if __name__ == "__main__":
    main()
