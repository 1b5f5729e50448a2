"""Comparison protocols: NFRA, GDRA, FRCA1, FRCA2 and DMRCP.

Each runs on the same round/slot grid as IE-RAP. None of them keeps tag
knowledge for its own decisions, so every channel win turns into a read.
"""
from __future__ import annotations

import numpy as np

from .core import OUT, READ, Mode, Outcome, Protocol, RoundDraws
from .sift import geometric_distribution, uniform_distribution

BASELINES = ("nfra", "gdra", "frca1", "frca2", "dmrcp")


class SlottedBaseline(Protocol):
    """Server-driven skeleton: draw a slot (and channel), beacon, read if alone."""

    done_mode = Mode.IDLE

    def __init__(self, channels: int = 1, slots: int = 128):
        super().__init__(channels, slots)
        self.dist = uniform_distribution(slots)

    def draw_round(self, msg, draws: RoundDraws, n: int):
        K = self.dist.slot_from_uniform(draws.column(0))
        f = msg.max_channel
        F = np.minimum((draws.column(1) * f).astype(int) + 1, f)
        draws.reserve(2)
        return K, F

    def resolve(self, groups, world, p, draws):
        out = {}
        for g in groups:
            verdict = READ if len(g) == 1 else OUT
            for b in g:
                out[b.reader_id] = verdict
        return out


class Nfra(SlottedBaseline):
    """Uniform slot from the AC range, single channel, OF before reading."""

    name = "nfra"

    def draw_round(self, msg, draws, n):
        K = self.dist.slot_from_uniform(draws.column(0))
        draws.reserve(2)
        return K, np.ones(n, dtype=int)


class Gdra(SlottedBaseline):
    """Slot drawn from a geometric distribution truncated to [1, MN]."""

    name = "gdra"

    def __init__(self, channels: int = 4, slots: int = 128, p_g: float = 0.5):
        super().__init__(channels, slots)
        self.dist = geometric_distribution(slots, p_g)


class Frca1(SlottedBaseline):
    """NFRA skeleton with a uniform channel draw; beacons collide only within a channel."""

    name = "frca1"


class Frca2(Frca1):
    """FRCA1 plus a reader-to-tag guard across channels.

    Among same-slot winners whose read ranges overlap (distance <= 2 x read
    range), only the lowest id reads; the rest are held back for the round.
    """

    name = "frca2"

    def resolve(self, groups, world, p, draws):
        out = super().resolve(groups, world, p, draws)
        winners = sorted(rid for rid, o in out.items() if o is READ)
        limit = 2 * world.arena.read_range
        kept = []
        for rid in winners:
            if any(world.distance(rid, k) <= limit for k in kept):
                out[rid] = OUT
            else:
                kept.append(rid)
        return out


class Dmrcp(Protocol):
    """Distributed CSMA: backoff in [1, CW] per contention window, sense, beacon, read, share.

    The slot grid is cut into windows of CW slots. A reader that senses a busy
    channel, or collides with another beacon, waits for the next window and
    draws a fresh backoff. After a successful read it shares the tag ids with
    readers within ``share_distance``.
    """

    name = "dmrcp"
    done_mode = Mode.ASLEEP
    sense_before_beacon = True
    sense_costs_slot = True

    def __init__(self, channels: int = 1, slots: int = 128, cw: int = 5,
                 share_distance: float = 20.0):
        super().__init__(channels, slots)
        if cw < 1:
            raise ValueError("cw must be >= 1")
        self.cw = cw
        self.share_distance = share_distance

    def backoff(self, u: float) -> int:
        return min(int(u * self.cw) + 1, self.cw)

    def draw_round(self, msg, draws, n):
        u = draws.column(0)
        K = np.minimum((u * self.cw).astype(int) + 1, self.cw)
        draws.reserve(1)
        return K, np.ones(n, dtype=int)

    def next_window(self, rid: int, p: int, draws: RoundDraws) -> Outcome:
        cw = self.cw
        k = ((p - 1) // cw + 1) * cw + min(int(draws.uniform(rid) * cw) + 1, cw)
        return Outcome.retry(k) if k <= self.slots else OUT

    def on_busy(self, reader, p, draws):
        return self.next_window(reader.id, p, draws)

    def resolve(self, groups, world, p, draws):
        out = {}
        for g in groups:
            if len(g) == 1:
                out[g[0].reader_id] = READ
            else:
                for b in g:
                    out[b.reader_id] = self.next_window(b.reader_id, p, draws)
        return out
