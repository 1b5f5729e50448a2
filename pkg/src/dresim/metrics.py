"""Throughput, waiting time and the per-reader energy ledger."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TimingParams


@dataclass(frozen=True)
class Powers:
    p_send: float = 2.3
    p_receive: float = 0.5
    p_read: float = 2.3

    def __post_init__(self):
        if min(self.p_send, self.p_receive, self.p_read) < 0:
            raise ValueError("powers must be nonnegative")


def energy_send(p: float, t: float) -> float:
    return p * t


def energy_receive(p: float, t: float) -> float:
    return p * t


def energy_read(p: float, t: float) -> float:
    return p * t


COUNTERS = ("a", "listen", "sh", "beacon", "of", "read")


class EnergyLedger:
    """Per-reader counts of energy-bearing events, priced at read-out time.

    Keeping counts (not running float sums) makes a ledger rebuilt from the
    event log agree bit-for-bit with the live one.
    """

    def __init__(self, n: int, timing: TimingParams, powers: Powers, listen_unit: float | None = None):
        self.timing = timing
        self.powers = powers
        self.listen_unit = timing.msg_c_duration if listen_unit is None else listen_unit
        self.counts = {k: np.zeros(n, dtype=np.int64) for k in COUNTERS}

    @property
    def n(self) -> int:
        return len(self.counts["a"])

    def add(self, kind: str, reader: int, amount: int = 1) -> None:
        self.counts[kind][reader] += amount

    def add_all(self, kind: str, amount: int = 1) -> None:
        self.counts[kind] += amount

    def receive_time(self) -> np.ndarray:
        t, c = self.timing, self.counts
        return c["a"] * t.msg_a_duration + c["listen"] * self.listen_unit + c["sh"] * t.msg_sh_duration

    def send_time(self) -> np.ndarray:
        t, c = self.timing, self.counts
        return c["beacon"] * t.beacon_duration + c["of"] * t.of_duration

    def read_time(self) -> np.ndarray:
        return self.counts["read"] * self.timing.read_duration

    @property
    def e_receive(self) -> np.ndarray:
        return energy_receive(self.powers.p_receive, self.receive_time())

    @property
    def e_send(self) -> np.ndarray:
        return energy_send(self.powers.p_send, self.send_time())

    @property
    def e_read(self) -> np.ndarray:
        return energy_read(self.powers.p_read, self.read_time())

    def per_reader(self) -> np.ndarray:
        return self.e_read + self.e_send + self.e_receive


def reader_energy(ledger: EnergyLedger, reader: int) -> float:
    return float(ledger.e_read[reader] + ledger.e_send[reader] + ledger.e_receive[reader])


# --- event log ---------------------------------------------------------------

EVENT_KINDS = ("msgA", "listen", "beacon", "of", "collision", "win", "read-start", "read-end",
               "skip-known", "release", "sleep", "sh", "isp-merge", "share")


@dataclass(frozen=True)
class Event:
    time: float
    reader: int
    kind: str
    payload: tuple = ()

    def line(self) -> str:
        body = ";".join(f"{k}={v}" for k, v in self.payload)
        return f"{self.time:.9f}\t{self.reader}\t{self.kind}\t{body}"


class EventLog:
    def __init__(self):
        self.events: list[Event] = []

    def add(self, time: float, reader: int, kind: str, **payload) -> None:
        self.events.append(Event(time, reader, kind, tuple(sorted(payload.items()))))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def to_text(self) -> str:
        return "".join(e.line() + "\n" for e in self.events)


def ledger_from_events(events, n: int, timing: TimingParams, powers: Powers,
                       listen_unit: float | None = None) -> EnergyLedger:
    """Rebuild the energy ledger purely from logged events."""
    ledger = EnergyLedger(n, timing, powers, listen_unit)
    for e in events:
        if e.kind == "msgA":
            ledger.add("a", e.reader)
        elif e.kind == "listen":
            ledger.add("listen", e.reader, dict(e.payload)["n"])
        elif e.kind == "sh":
            ledger.add("sh", e.reader)
        elif e.kind == "beacon":
            ledger.add("beacon", e.reader)
        elif e.kind == "of":
            ledger.add("of", e.reader)
        elif e.kind == "read-start":
            ledger.add("read", e.reader)
    return ledger


# --- reports -----------------------------------------------------------------

@dataclass
class RoundResult:
    index: int
    start: float
    duration: float
    successful_reads: int = 0
    tags_read: int = 0
    acquisitions: int = 0
    waiting_sum: float = 0.0
    readers: int = 0
    redundant_reads: int = 0


@dataclass
class MetricsReport:
    protocol: str
    readers: int
    channels: int
    seed: int
    rounds: int
    elapsed: float = 0.0
    successful_reads: int = 0
    tags_read: int = 0
    acquisitions: int = 0
    unique_tags_known: int = 0
    redundant_reads: int = 0
    waiting_scope: str = "round"
    avg_waiting_round: float = 0.0
    avg_waiting_global: float = 0.0
    reader_energy: np.ndarray = field(default_factory=lambda: np.zeros(0))
    per_round: list = field(default_factory=list)

    @property
    def throughput(self) -> float:
        return throughput(self)

    @property
    def tag_rate(self) -> float:
        return tag_rate(self)

    @property
    def avg_waiting_time(self) -> float:
        return avg_waiting_time(self)

    @property
    def network_energy(self) -> float:
        return network_energy(self)


def network_energy(report) -> float:
    """Sum of per-reader energies; accepts a report or an EnergyLedger."""
    if isinstance(report, EnergyLedger):
        return float(np.sum(report.per_reader()))
    return float(np.sum(report.reader_energy))


def throughput(report: MetricsReport, elapsed: float | None = None) -> float:
    """Successful read operations per simulated second, protocol overhead included."""
    elapsed = report.elapsed if elapsed is None else elapsed
    if report.successful_reads == 0:
        return 0.0
    if elapsed <= 0:
        raise ValueError("elapsed must be positive")
    return report.successful_reads / elapsed


def tag_rate(report: MetricsReport, elapsed: float | None = None) -> float:
    """Tag ids acquired per simulated second.

    A radio read counts every tag it interrogates; a shared delivery (ISP or
    DMRCP sharing) counts the ids that were new to the receiving reader.
    """
    elapsed = report.elapsed if elapsed is None else elapsed
    if report.tags_read == 0:
        return 0.0
    if elapsed <= 0:
        raise ValueError("elapsed must be positive")
    return report.tags_read / elapsed


def avg_waiting_time(report: MetricsReport) -> float:
    if report.waiting_scope == "global":
        return report.avg_waiting_global
    return report.avg_waiting_round
