"""Sweep the evaluation presets and write one CSV per scenario.

    python3 scripts/run_figures.py --out results --seeds 20
    python3 scripts/run_figures.py --out quick --seeds 2 --rounds 16 --presets scenario1

Rows follow the CLI sweep schema. A short per-point summary (means over seeds)
is printed for each scenario.
"""
import argparse
import os
import time
from collections import defaultdict
from statistics import mean

from dresim.cli import _workers, emit_csv, run_many, sweep_configs
from dresim.config import PRESET_READERS, PRESETS

# the metric each scenario's figure plots
FIGURE_METRIC = {"scenario1": "throughput", "scenario2": "throughput", "scenario3": "throughput",
                 "scenario4": "avg_waiting_time", "scenario5": "network_energy"}


def summarize(name, reports):
    metric = FIGURE_METRIC[name]
    points = defaultdict(list)
    for r in reports:
        points[r.readers, r.protocol, r.channels].append(getattr(r, metric))
    print(f"\n{name}: mean {metric}")
    protos = sorted({(p, c) for _, p, c in points})
    print("readers " + " ".join(f"{p + '/F' + str(c):>12}" for p, c in protos))
    for n in sorted({n for n, _, _ in points}):
        cells = [f"{mean(points[n, p, c]):12.4g}" if (n, p, c) in points else " " * 12 for p, c in protos]
        print(f"{n:>7} " + " ".join(cells))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--presets", default=",".join(PRESETS))
    ap.add_argument("--readers", default=",".join(map(str, PRESET_READERS)))
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--base-seed", type=int, default=1)
    ap.add_argument("--rounds", type=int)
    ap.add_argument("--profile", choices=["table1", "uniform"], default="table1")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    readers = [int(x) for x in args.readers.split(",")]
    extra = {"timing_profile": args.profile}
    if args.rounds is not None:
        extra["rounds"] = args.rounds
    cache = {}
    for name in args.presets.split(","):
        t0 = time.perf_counter()
        # scenarios 3-5 share their configs; run once and reuse
        key = "mobile" if name in ("scenario3", "scenario4", "scenario5") else name
        if key not in cache:
            configs = sweep_configs(name, readers, args.seeds, args.base_seed, **extra)
            cache[key] = run_many(configs, _workers())
        reports = cache[key]
        path = os.path.join(args.out, f"{name}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(emit_csv(reports))
        summarize(name, reports)
        print(f"wrote {path} ({len(reports)} rows, {time.perf_counter() - t0:.0f} s)")


if __name__ == "__main__":
    main()
