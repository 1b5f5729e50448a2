"""Command-line entry point: simulate, sweep, dist, replay."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import PRESETS, ConfigError, ScenarioConfig, parse_config, preset
from .core import ContractViolation, SimulationFault
from .engine import run_simulation
from .metrics import MetricsReport
from .sift import distribution_table, sift_distribution

CSV_COLUMNS = ("protocol", "readers", "channels", "seed", "rounds", "successful_reads",
               "throughput_rps", "unique_tags_known", "avg_waiting_time_s", "network_energy_j")


def _num(x) -> str:
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".6g")


def csv_row(r: MetricsReport) -> tuple:
    return (r.protocol, r.readers, r.channels, r.seed, r.rounds, r.successful_reads,
            r.throughput, r.unique_tags_known, r.avg_waiting_time, r.network_energy)


def emit_csv(reports) -> str:
    reports = list(reports)
    if not reports:
        raise ValueError("emit_csv needs at least one report")
    rows = sorted((csv_row(r) for r in reports), key=lambda row: row[:4])
    lines = [",".join(CSV_COLUMNS)]
    lines += [",".join(_num(v) if not isinstance(v, str) else v for v in row) for row in rows]
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _reader_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad reader list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dresim", description="Dense-reader RFID anti-collision simulator")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one config file")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--output")

    w = sub.add_parser("sweep", help="run a preset over reader counts and seeds")
    w.add_argument("--preset", required=True, choices=PRESETS)
    w.add_argument("--readers", type=_reader_list, default=[100, 200, 300, 400])
    w.add_argument("--seeds", type=int, default=20)
    w.add_argument("--base-seed", type=int, default=1)
    w.add_argument("--rounds", type=int)
    w.add_argument("--output")

    d = sub.add_parser("dist", help="print a SIFT slot distribution")
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--m", type=int, required=True)

    r = sub.add_parser("replay", help="run one config and dump its event log")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--events", required=True)
    return ap


def _load(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    return parse_config(text)


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _workers() -> int:
    raw = os.environ.get("DRE_SIM_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"DRE_SIM_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ConfigError("DRE_SIM_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def sweep_configs(name: str, readers, seeds: int, base_seed: int = 1, **overrides) -> list[ScenarioConfig]:
    if seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    return [cfg for n in readers for i in range(seeds)
            for cfg in preset(name, n, seed=base_seed + i, **overrides)]


def run_many(configs, workers: int = 1) -> list[MetricsReport]:
    if workers <= 1 or len(configs) <= 1:
        return [run_simulation(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_simulation, configs))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "dist":
            if args.k < 1 or args.m < 1:
                print("dresim: error: --k and --m must be >= 1", file=sys.stderr)
                return 1
            _write(distribution_table(sift_distribution(args.k, args.m)), None)
        elif args.cmd == "simulate":
            cfg = _load(args.config)
            if args.seed is not None:
                cfg = cfg.with_(seed=args.seed)
            _write(emit_csv([run_simulation(cfg)]), args.output)
        elif args.cmd == "replay":
            cfg = _load(args.config).with_(seed=args.seed)
            report, world = run_simulation(cfg, log=True, keep_world=True)
            _write(world.log.to_text(), args.events)
        elif args.cmd == "sweep":
            extra = {} if args.rounds is None else {"rounds": args.rounds}
            configs = sweep_configs(args.preset, args.readers, args.seeds, args.base_seed, **extra)
            _write(emit_csv(run_many(configs, _workers())), args.output)
    except ConfigError as exc:
        print(f"dresim: config error: {exc}", file=sys.stderr)
        return 2
    except (SimulationFault, ContractViolation) as exc:
        print(f"dresim: simulation fault: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
