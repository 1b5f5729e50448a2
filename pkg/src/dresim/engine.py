"""Deterministic round/slot scheduler.

A round is: message A, then for p = 1..MN a C message followed by one slot,
then an optional reading tail (reads started late run to completion), then
SH and the information-sharing exchange. Only slots where something happens
are visited; listening energy is charged from per-reader listening spans.
"""
from __future__ import annotations

import heapq
import math
from collections import defaultdict

import numpy as np

from . import radio
from .baselines import Dmrcp, Frca1, Frca2, Gdra, Nfra
from .config import ScenarioConfig
from .core import (Act, IspRecord, IspStore, Mode, Protocol, Res, RoundDraws, ServerMessage,
                   SimulationFault, protocol_timing)
from .geometry import RandomWaypoint, pairwise_distances, place_uniform
from .ierap import IeRap
from .metrics import EnergyLedger, EventLog, MetricsReport, RoundResult
from .radio import BeaconEvent

# substream tags for the master seed
_READERS, _TAGS, _MOBILITY, _NOISE, _DRAWS = 11, 12, 13, 14, 1


def make_protocol(cfg: ScenarioConfig) -> Protocol:
    f, mn = cfg.channels, cfg.slots
    if cfg.protocol == "ierap":
        return IeRap(f, mn, m=cfg.sift_m or None, isp=cfg.isp)
    if cfg.protocol == "nfra":
        return Nfra(f, mn)
    if cfg.protocol == "gdra":
        return Gdra(f, mn, p_g=cfg.gdra_p)
    if cfg.protocol == "frca1":
        return Frca1(f, mn)
    if cfg.protocol == "frca2":
        return Frca2(f, mn)
    if cfg.protocol == "dmrcp":
        return Dmrcp(f, mn, cw=cfg.cw, share_distance=cfg.effective_share_distance)
    raise ValueError(cfg.protocol)


class World:
    """Everything one simulation run mutates: clock, readers, tags, channels, energy."""

    def __init__(self, cfg: ScenarioConfig, protocol: Protocol | None = None, log: bool = False,
                 reader_positions=None, tag_positions=None):
        from .core import ReaderState

        self.cfg = cfg
        self.arena = cfg.arena
        self.protocol = protocol or make_protocol(cfg)
        self.timing = protocol_timing(cfg.protocol, cfg.timing, cfg.timing_profile)
        seed = cfg.seed
        if reader_positions is None:
            reader_positions = place_uniform(cfg.readers, self.arena, np.random.default_rng([seed, _READERS]))
        if tag_positions is None:
            tag_positions = place_uniform(cfg.tags, self.arena, np.random.default_rng([seed, _TAGS]))
        self.positions = np.asarray(reader_positions, dtype=float).reshape(-1, 2)
        self.tags = np.asarray(tag_positions, dtype=float).reshape(-1, 2)
        n = len(self.positions)
        self.readers = [ReaderState(i) for i in range(n)]
        self.clock = 0.0
        self.round_index = 0
        self.isp = IspStore()
        self.log = EventLog() if log else None
        listen_unit = self.timing.msg_c_duration
        if self.protocol.sense_costs_slot:
            listen_unit += self.timing.slot_duration
        self.energy = EnergyLedger(n, self.timing, cfg.powers, listen_unit)
        self.mobility = None
        if cfg.mobility.model != "static" and n:
            self.mobility = RandomWaypoint(n, cfg.mobility, self.arena,
                                           np.random.default_rng([seed, _MOBILITY]))
        # run-wide acquisition bookkeeping for the global waiting scope
        self.acq_count = [0] * n
        self.last_acq = [0.0] * n
        self.occupancy: list[tuple] = []  # (channel, reader, first_slot, last_slot, round)
        self._refresh_geometry()

    # --- geometry caches ---------------------------------------------------
    def _refresh_geometry(self):
        self._xy = self.positions.tolist()
        self._tag_cache: dict[int, frozenset] = {}
        self.adjacency = pairwise_distances(self.positions) <= self.arena.interference_range
        self._adj_rows = self.adjacency.tolist()

    def distance(self, a: int, b: int) -> float:
        (xa, ya), (xb, yb) = self._xy[a], self._xy[b]
        return math.hypot(xa - xb, ya - yb)

    def interferes(self, a: int, b: int) -> bool:
        return self._adj_rows[a][b]

    def tags_in_range(self, rid: int) -> frozenset:
        cached = self._tag_cache.get(rid)
        if cached is None:
            if len(self.tags):
                d = np.hypot(self.tags[:, 0] - self._xy[rid][0], self.tags[:, 1] - self._xy[rid][1])
                cached = frozenset(np.flatnonzero(d <= self.arena.read_range).tolist())
            else:
                cached = frozenset()
            self._tag_cache[rid] = cached
        return cached

    def measured_distance(self, a: int, b: int) -> float:
        sigma = self.cfg.distance_noise
        rng = None
        if sigma > 0:
            rng = np.random.default_rng([self.cfg.seed, self.round_index, _NOISE, min(a, b), max(a, b)])
        return radio.measured_distance(self.cfg.radio, self.distance(a, b), sigma, rng)

    def _event(self, t, rid, kind, **payload):
        if self.log is not None:
            self.log.add(t, rid, kind, **payload)


def run_round(world: World, protocol: Protocol | None = None) -> RoundResult:
    protocol = protocol or world.protocol
    tm = world.timing
    mn = tm.slots
    step = tm.slot_step
    readers = world.readers
    n = len(readers)
    energy = world.energy
    ev = world._event
    logging = world.log is not None
    r0 = world.clock
    ridx = world.round_index
    has_server = tm.msg_a_duration > 0
    sleeper = protocol.done_mode is Mode.ASLEEP
    adj_rows = world._adj_rows

    log_mark = len(world.log) if logging else 0
    draws = RoundDraws(world.cfg.seed, ridx, n, _DRAWS)
    msg_a = ServerMessage.a(mn, world.cfg.channels)
    t_a = r0 + tm.msg_a_duration
    if has_server:
        energy.add_all("a")
        if logging:
            for r in readers:
                ev(r0, r.id, "msgA", mn=mn, f=msg_a.max_channel)
    K, F = protocol.draw_round(msg_a, draws, n) if n else ((), ())
    schedule: dict[int, list[int]] = defaultdict(list)
    for r, k, f in zip(readers, K, F):
        r.K, r.F, r.mode = int(k), int(f), Mode.CONTENDING
        schedule[r.K].append(r.id)

    beacon_counts = energy.counts["beacon"]
    listen_since: list[int | None] = [1] * n
    listened = [0] * n

    def stop_listen(rid, p):
        s = listen_since[rid]
        if s is not None and p >= s:
            listened[rid] += p - s + 1
        listen_since[rid] = None

    heap = sorted(schedule)
    queued = set(heap)

    def push(p):
        if p not in queued:
            queued.add(p)
            heapq.heappush(heap, p)

    holds: dict[int, list[int]] = defaultdict(list)
    active: dict[int, list[tuple[int, int]]] = defaultdict(list)
    reads = []  # (t_end, rid, t_start, first_slot, last_slot, channel)
    redundant = 0

    def slot_time(p):
        return t_a + (p - 1) * step + tm.msg_c_duration

    def finish(rid, p, t):
        """Reader is done contending for this round."""
        r = readers[rid]
        if sleeper:
            stop_listen(rid, p)
            r.mode = Mode.ASLEEP
            if logging:
                ev(t, rid, "sleep")
        else:
            r.mode = Mode.IDLE

    def apply(rid, outcome, p, t):
        nonlocal redundant
        r = readers[rid]
        kind = outcome.kind
        if r.mode is not Mode.CONTENDING:
            raise SimulationFault(f"reader {rid} got {kind.value} while {r.mode.value}")
        if kind is Res.READ:
            last = p + tm.read_slots - 1
            active[r.F].append((rid, last))
            stop_listen(rid, p)
            if not sleeper and last + 1 <= mn:
                listen_since[rid] = last + 1
            r.mode = Mode.READING
            t_start = t + tm.beacon_duration
            if tm.of_duration > 0:
                energy.add("of", rid)
                ev(t_start, rid, "of")
                t_start += tm.of_duration
            energy.add("read", rid)
            unknown = len(world.tags_in_range(rid) - r.known_tags)
            if protocol.skip_known and unknown == 0:
                raise SimulationFault(f"reader {rid} reads with nothing new")
            if unknown == 0:
                redundant += 1
            ev(t, rid, "win", slot=p, channel=r.F)
            ev(t_start, rid, "read-start", slot=p, channel=r.F, unknown=unknown)
            reads.append((t_start + tm.read_duration, rid, t_start, p, last, r.F))
            world.occupancy.append((r.F, rid, p, last, ridx))
        elif kind is Res.HOLD:
            r.mode = Mode.LEAVING
            active[r.F].append((rid, p))
            world.occupancy.append((r.F, rid, p, p, ridx))
            ev(t, rid, "win", slot=p, channel=r.F)
            ev(t, rid, "skip-known", slot=p, channel=r.F)
            holds[p + 1].append(rid)
            if p + 1 <= mn:
                push(p + 1)
        elif kind is Res.OUT:
            finish(rid, p, t)
        elif kind is Res.RETRY:
            if outcome.slot <= p or outcome.slot > mn:
                finish(rid, p, t)
            else:
                r.K = outcome.slot
                schedule[r.K].append(rid)
                push(r.K)
        else:
            raise SimulationFault(f"unknown outcome {outcome!r}")

    while heap:
        p = heapq.heappop(heap)
        if p > mn:
            break
        queued.discard(p)
        t = slot_time(p)
        msg_c = ServerMessage.c(p)
        for rid in holds.pop(p, ()):
            r = readers[rid]
            if protocol.on_slot(r, msg_c) is not Act.RELEASE:
                raise SimulationFault(f"reader {rid} kept a channel it should release")
            active[r.F] = [(q, e) for q, e in active[r.F] if q != rid]
            ev(t - tm.msg_c_duration, rid, "release", slot=p, channel=r.F)
            stop_listen(rid, p)
            r.mode = protocol.done_mode
            if sleeper:
                ev(t, rid, "sleep")
        beacons = []
        for rid in schedule.pop(p, ()):
            r = readers[rid]
            if r.mode is not Mode.CONTENDING or r.K != p:
                continue
            act = protocol.on_slot(r, msg_c)
            if act is Act.BEACON:
                beacons.append(BeaconEvent(rid, p, r.F))
        if not beacons:
            continue
        clear = []
        for b in beacons:
            rid = b.reader_id
            busy = False
            row = adj_rows[rid]
            for q, last in active[b.channel]:
                if last >= p and row[q]:
                    busy = True
                    break
            if not (busy and protocol.sense_before_beacon):
                beacon_counts[rid] += 1
                if logging:
                    ev(t, rid, "beacon", slot=p, channel=b.channel, busy=int(busy))
            if busy:
                apply(rid, protocol.on_busy(readers[rid], p, draws), p, t)
            else:
                clear.append(b)
        groups = radio.detect_beacon_collisions(clear, adjacency=world.adjacency)
        if logging:
            for g in groups:
                if len(g) > 1:
                    members = "+".join(str(b.reader_id) for b in g)
                    for b in g:
                        ev(t, b.reader_id, "collision", size=len(g), group=members)
        outcomes = protocol.resolve(groups, world, p, draws)
        for rid in sorted(outcomes):
            apply(rid, outcomes[rid], p, t)

    # --- reading tail and wrap-up ----------------------------------------
    main_end = t_a + mn * step
    last_slot = max((rd[4] for rd in reads), default=mn)
    t_end = main_end + max(0, last_slot - mn) * tm.slot_duration
    t_end = max([t_end] + [rd[0] for rd in reads])

    for rid in range(n):
        if listen_since[rid] is not None:
            stop_listen(rid, mn)
        if listened[rid]:
            energy.add("listen", rid, listened[rid])
            ev(r0, rid, "listen", n=listened[rid])
    for rid in holds.pop(mn + 1, ()):
        r = readers[rid]
        ev(main_end, rid, "release", slot=mn + 1, channel=r.F)
        r.mode = protocol.done_mode
        if sleeper:
            ev(main_end, rid, "sleep")

    first_acq = [None] * n
    tags_read = acquisitions = 0
    uses_share = protocol.share_distance is not None
    for t_done, rid, _, _, _, ch in sorted(reads):
        r = readers[rid]
        tags = world.tags_in_range(rid)
        new = tags - r.known_tags
        r.known_tags |= new
        r.S += 1
        r.mode = protocol.done_mode
        tags_read += len(tags)
        acquisitions += len(new)
        if tags:
            if first_acq[rid] is None:
                first_acq[rid] = t_done
            _note_acq(world, rid, t_done)
        if protocol.uses_isp:
            for tag in sorted(new):
                r.pending_isp.append(IspRecord(tag, rid, r.S))
        ev(t_done, rid, "read-end", tags=len(tags), new=len(new), s=r.S)
        if uses_share and tags:
            for q in range(n):
                if q != rid and world.distance(rid, q) <= protocol.share_distance:
                    got = tags - readers[q].known_tags
                    if got:
                        readers[q].known_tags |= got
                        tags_read += len(got)
                        acquisitions += len(got)
                        if first_acq[q] is None:
                            first_acq[q] = t_done
                        _note_acq(world, q, t_done)
                        ev(t_done, q, "share", source=rid, new=len(got))

    t_sh = t_end + tm.msg_sh_duration
    if tm.msg_sh_duration > 0 or protocol.uses_isp:
        msg_sh = ServerMessage.sh()
        if tm.msg_sh_duration > 0:
            energy.add_all("sh")
        store = world.isp
        for r in readers:
            for rec in r.pending_isp:
                store.publish(rec)
            r.pending_isp.clear()
        store.seal()
        for r in readers:
            ev(t_end, r.id, "sh")
            new = protocol.on_round_end(r, msg_sh, store)
            if new:
                tags_read += len(new)
                acquisitions += len(new)
                if first_acq[r.id] is None:
                    first_acq[r.id] = t_sh
                _note_acq(world, r.id, t_sh)
                ev(t_sh, r.id, "isp-merge", new=len(new))
        store.clear()
    for r in readers:
        r.mode = Mode.IDLE

    world.clock = t_sh
    if logging:
        # events are emitted in causal order; keep the log chronological (stable within a tick)
        events = world.log.events
        events[log_mark:] = sorted(events[log_mark:], key=lambda e: e.time)
    duration = t_sh - r0
    waiting = sum((fa - r0) if fa is not None else duration for fa in first_acq)
    result = RoundResult(ridx, r0, duration, successful_reads=len(reads), tags_read=tags_read,
                         acquisitions=acquisitions, waiting_sum=waiting, readers=n,
                         redundant_reads=redundant)
    world.round_index += 1
    if world.mobility is not None:
        world.positions = world.mobility.step(world.positions, duration)
        world._refresh_geometry()
    return result


def _note_acq(world: World, rid: int, t: float) -> None:
    world.acq_count[rid] += 1
    world.last_acq[rid] = t


def run_simulation(cfg: ScenarioConfig, log: bool = False, world: World | None = None,
                   keep_world: bool = False):
    """Run ``cfg.rounds`` rounds and aggregate. Returns the report (and world if asked)."""
    world = world or World(cfg, log=log)
    report = MetricsReport(protocol=cfg.protocol, readers=len(world.readers), channels=cfg.channels,
                           seed=cfg.seed, rounds=cfg.rounds, waiting_scope=cfg.waiting_scope)
    waiting_total = 0.0
    for _ in range(cfg.rounds):
        res = run_round(world)
        report.per_round.append(res)
        report.successful_reads += res.successful_reads
        report.tags_read += res.tags_read
        report.acquisitions += res.acquisitions
        report.redundant_reads += res.redundant_reads
        waiting_total += res.waiting_sum
    n = len(world.readers)
    report.elapsed = world.clock
    if n and cfg.rounds:
        report.avg_waiting_round = waiting_total / (n * cfg.rounds)
        # k acquisition events split the run into k + 1 waits
        report.avg_waiting_global = sum(world.clock / (k + 1) for k in world.acq_count) / n
    known = set()
    for r in world.readers:
        known |= r.known_tags
    report.unique_tags_known = len(known)
    report.reader_energy = world.energy.per_reader()
    return (report, world) if keep_world else report
