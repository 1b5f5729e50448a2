"""Shared protocol substrate: server frames, timing, reader state, ISP store, protocol contract."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np


class SimulationFault(RuntimeError):
    """A protocol broke the engine contract (e.g. read while asleep)."""


class ContractViolation(SimulationFault):
    pass


@dataclass(frozen=True)
class TimingParams:
    slot_duration: float = 0.005
    read_duration: float = 0.46
    beacon_duration: float = 0.0003
    msg_a_duration: float = 0.00283  # "2.83 Period time", taken as ms
    msg_c_duration: float = 0.002
    msg_sh_duration: float = 0.001
    of_duration: float = 0.0
    slots: int = 128

    def __post_init__(self):
        for name in ("slot_duration", "read_duration", "beacon_duration"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("msg_a_duration", "msg_c_duration", "msg_sh_duration", "of_duration"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.beacon_duration > self.slot_duration:
            raise ValueError("beacon must fit inside a slot")
        if self.slots < 1:
            raise ValueError("slots must be >= 1")

    @property
    def read_slots(self) -> int:
        """Slots a read keeps its channel busy: ceil(read / slot)."""
        return max(1, math.ceil(self.read_duration / self.slot_duration - 1e-9))

    @property
    def slot_step(self) -> float:
        return self.msg_c_duration + self.slot_duration

    @property
    def bare_round(self) -> float:
        """Round length with no reading tail: A + MN (C + slot) + SH."""
        return self.msg_a_duration + self.slots * self.slot_step + self.msg_sh_duration


# Control-packet durations per protocol family (all in seconds). Entries the
# comparison table leaves out keep the shared defaults.
TABLE1_OVERRIDES = {
    "ierap": {},
    "gdra": {"msg_c_duration": 0.001, "msg_sh_duration": 0.0},
    "nfra": {"msg_c_duration": 0.001, "msg_sh_duration": 0.0, "of_duration": 0.0003},
    "frca1": {"msg_c_duration": 0.001, "msg_sh_duration": 0.0},
    "frca2": {"msg_c_duration": 0.001, "msg_sh_duration": 0.0},
    "dmrcp": {"msg_a_duration": 0.0, "msg_c_duration": 0.0, "msg_sh_duration": 0.0,
              "beacon_duration": 0.005},
}


def protocol_timing(protocol: str, base: TimingParams, profile: str = "table1") -> TimingParams:
    if profile == "uniform":
        return base
    return replace(base, **TABLE1_OVERRIDES[protocol])


class MsgKind(str, Enum):
    A = "A"
    C = "C"
    SH = "SH"


@dataclass(frozen=True)
class ServerMessage:
    kind: MsgKind
    max_slot: int = 0
    max_channel: int = 0
    slot: int = 0

    @classmethod
    def a(cls, max_slot: int, max_channel: int) -> "ServerMessage":
        if max_slot < 1 or max_channel < 1:
            raise ValueError("A message needs MN >= 1 and F >= 1")
        return cls(MsgKind.A, max_slot=max_slot, max_channel=max_channel)

    @classmethod
    def c(cls, slot: int) -> "ServerMessage":
        if slot < 1:
            raise ValueError("slot numbers start at 1")
        return cls(MsgKind.C, slot=slot)

    @classmethod
    def sh(cls) -> "ServerMessage":
        return cls(MsgKind.SH)


class Mode(str, Enum):
    IDLE = "idle"
    CONTENDING = "contending"
    READING = "reading"
    LEAVING = "leaving"
    ASLEEP = "asleep"


@dataclass(frozen=True)
class IspRecord:
    tag_id: int
    reporter: int
    s_count: int

    def __post_init__(self):
        if self.s_count < 1:
            raise ValueError("s_count must be >= 1")


@dataclass(slots=True, eq=False)
class ReaderState:
    id: int
    K: int = 0
    F: int = 1
    S: int = 0
    known_tags: set = field(default_factory=set)
    mode: Mode = Mode.IDLE
    pending_isp: list = field(default_factory=list)
    rival_s: dict = field(default_factory=dict)


class IspStore:
    """Per-round shared table of (tag, reporter, S) records."""

    def __init__(self):
        self.records: list[IspRecord] = []
        self._keys: set[tuple[int, int]] = set()
        self.sealed = False
        self._cache = None

    def publish(self, record: IspRecord) -> None:
        if self.sealed:
            raise ContractViolation("ISP publish after SH")
        key = (record.tag_id, record.reporter)
        if key in self._keys:
            return
        self._keys.add(key)
        self.records.append(record)

    def tag_ids(self) -> set[int]:
        if self._cache is not None:
            return self._cache[0]
        return {r.tag_id for r in self.records}

    def s_table(self) -> dict[int, int]:
        if self._cache is not None:
            return self._cache[1]
        out: dict[int, int] = {}
        for r in self.records:
            out[r.reporter] = max(out.get(r.reporter, 0), r.s_count)
        return out

    def seal(self) -> None:
        self.sealed = True
        self._cache = (self.tag_ids(), self.s_table())

    def clear(self) -> None:
        self.records.clear()
        self._keys.clear()
        self.sealed = False
        self._cache = None

    def __len__(self):
        return len(self.records)


def isp_publish(store: IspStore, record: IspRecord) -> IspStore:
    store.publish(record)
    return store


def isp_sync(store: IspStore, reader: ReaderState) -> set[int]:
    """Merge the store into ``reader``; returns the tag ids that were new to it."""
    if not store.sealed:
        raise ContractViolation("ISP sync before SH")
    if not store.records:
        return set()
    tags = store.tag_ids()
    new = tags - reader.known_tags
    reader.known_tags |= new
    for rid, s in store.s_table().items():
        if rid != reader.id:
            reader.rival_s[rid] = s
    return new


class RoundDraws:
    """Uniform draws for one round, one substream row per reader.

    Rows come from a generator keyed on (seed, round, stream), so a reader's
    draws do not depend on how many readers follow it. Readers needing more
    than ``width`` draws spill into a private generator keyed on its id.
    """

    width = 8

    def __init__(self, seed: int, round_index: int, n: int, stream: int = 1):
        self.key = (int(seed), int(round_index), int(stream))
        self.rows = np.random.default_rng(list(self.key)).random((n, self.width))
        self._plain = self.rows.tolist()
        self.used = [0] * n
        self._spill: dict[int, np.random.Generator] = {}

    def column(self, j: int) -> np.ndarray:
        return self.rows[:, j]

    def reserve(self, k: int) -> None:
        """Mark the first ``k`` columns as consumed by vectorised draws."""
        self.used = [max(u, k) for u in self.used]

    def uniform(self, rid: int) -> float:
        i = self.used[rid]
        if i < self.width:
            self.used[rid] = i + 1
            return self._plain[rid][i]
        gen = self._spill.get(rid)
        if gen is None:
            gen = self._spill[rid] = np.random.default_rng([*self.key, rid, 7])
        return float(gen.random())


# --- protocol contract -------------------------------------------------------

class Act(str, Enum):
    BEACON = "beacon"
    RELEASE = "release"


class Res(str, Enum):
    READ = "read"      # won the channel and reads tags
    HOLD = "hold"      # won the channel, nothing new to read; leaves at next C
    OUT = "out"        # done contending this round
    RETRY = "retry"    # contend again at a later slot


@dataclass(frozen=True)
class Outcome:
    kind: Res
    slot: int = 0

    @classmethod
    def retry(cls, slot: int) -> "Outcome":
        out = _RETRY.get(slot)
        if out is None:
            out = _RETRY[slot] = cls(Res.RETRY, slot)
        return out


_RETRY: dict[int, Outcome] = {}


READ = Outcome(Res.READ)
HOLD = Outcome(Res.HOLD)
OUT = Outcome(Res.OUT)


class Protocol:
    """Callbacks the engine drives each round: A, then C for p = 1..MN, then SH.

    Implementations only touch the reader's protocol fields (K, F) and return
    actions or outcomes; the engine owns the clock, channels, energy and
    knowledge.
    """

    name = "base"
    done_mode = Mode.IDLE          # mode after a reader is finished for the round
    sense_before_beacon = False    # CSMA: a busy channel suppresses the beacon
    sense_costs_slot = False       # listening cost per slot is the full slot, not just C
    skip_known = False
    uses_isp = False
    share_distance: float | None = None

    def __init__(self, channels: int = 1, slots: int = 128):
        self.channels = channels
        self.slots = slots

    def draw_round(self, msg: ServerMessage, draws: RoundDraws, n: int):
        """Vectorised slot/channel draws for every reader; returns (K, F) int arrays."""
        raise NotImplementedError

    def on_slot(self, reader: ReaderState, msg: ServerMessage):
        if reader.mode is Mode.LEAVING:
            return Act.RELEASE
        if reader.mode is Mode.CONTENDING and reader.K == msg.slot:
            return Act.BEACON
        return None

    def on_busy(self, reader: ReaderState, p: int, draws: RoundDraws) -> Outcome:
        return OUT

    def resolve(self, groups, world, p: int, draws: RoundDraws) -> dict[int, Outcome]:
        raise NotImplementedError

    def on_round_end(self, reader: ReaderState, msg: ServerMessage, store: IspStore) -> set[int]:
        return set()
