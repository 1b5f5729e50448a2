"""IE-RAP reader state machine."""
from __future__ import annotations

import numpy as np

from .core import (HOLD, OUT, READ, Act, IspStore, Mode, Outcome, Protocol, ReaderState,
                   RoundDraws, ServerMessage, isp_sync)
from .sift import SlotDistribution, sift_distribution


def on_message_A(state: ReaderState, msg: ServerMessage, rng: np.random.Generator,
                 dist: SlotDistribution | None = None) -> ReaderState:
    """Pick a channel uniformly in [1, F] and a slot from SIFT over [1, MN]."""
    dist = dist or sift_distribution(msg.max_slot, msg.max_slot)
    state.F = int(rng.integers(1, msg.max_channel + 1))
    state.K = int(dist.slot_from_uniform(rng.random()))
    state.mode = Mode.CONTENDING
    return state


def on_message_C(state: ReaderState, msg: ServerMessage):
    """A leaving reader releases its channel and sleeps; a contender whose slot came up beacons."""
    if state.mode is Mode.LEAVING:
        state.mode = Mode.ASLEEP
        return Act.RELEASE
    if state.mode is Mode.CONTENDING and state.K == msg.slot:
        return Act.BEACON
    return None


def handle_tag_reading(state: ReaderState, tags_in_range) -> Outcome:
    """Channel winner: read only if some in-range tag is not already known."""
    if any(t not in state.known_tags for t in tags_in_range):
        return READ
    return HOLD


def resolve_contention(group, states, estimated_d: float | None, read_range: float) -> dict:
    """Decide a beacon collision group.

    Returns ``{reader_id: "win" | "out" | "recontend"}``. A lone beacon wins; of
    two colliders the lower S wins (ties to the lower id) and the loser either
    leaves the round (rival within twice the read range) or contends again
    later; three or more colliders all leave.
    """
    ids = [b.reader_id if hasattr(b, "reader_id") else b for b in group]
    if len(ids) == 1:
        return {ids[0]: "win"}
    if len(ids) > 2:
        return {rid: "out" for rid in ids}
    a, b = (states[i] for i in ids)
    winner, loser = (a, b) if (a.S, a.id) < (b.S, b.id) else (b, a)
    far = estimated_d is not None and estimated_d > 2 * read_range
    return {winner.id: "win", loser.id: "recontend" if far else "out"}


def on_message_SH(state: ReaderState, store: IspStore) -> set:
    """Wake up and merge the shared tag ids and S counters."""
    new = isp_sync(store, state)
    state.mode = Mode.IDLE
    return new


class IeRap(Protocol):
    name = "ierap"
    done_mode = Mode.ASLEEP
    skip_known = True
    uses_isp = True

    def __init__(self, channels: int = 4, slots: int = 128, m: int | None = None,
                 isp: bool = True):
        super().__init__(channels, slots)
        self.dist = sift_distribution(slots, m or slots)
        self.uses_isp = isp

    def draw_round(self, msg, draws: RoundDraws, n: int):
        K = self.dist.slot_from_uniform(draws.column(0))
        F = np.minimum((draws.column(1) * msg.max_channel).astype(int) + 1, msg.max_channel)
        draws.reserve(2)
        return K, F

    def recontend_slot(self, reader, p: int, draws: RoundDraws) -> Outcome:
        # redraw via SIFT, then step one slot later; a slot already passed means out
        k = int(self.dist.slot_from_uniform(draws.uniform(reader.id))) + 1
        k = min(k, self.slots)
        return Outcome.retry(k) if k > p else OUT

    def resolve(self, groups, world, p, draws):
        out = {}
        rr = world.arena.read_range
        for g in groups:
            ids = [b.reader_id for b in g]
            d = world.measured_distance(ids[0], ids[1]) if len(ids) == 2 else None
            for rid, verdict in resolve_contention(ids, world.readers, d, rr).items():
                reader = world.readers[rid]
                if verdict == "win":
                    out[rid] = handle_tag_reading(reader, world.tags_in_range(rid))
                elif verdict == "recontend":
                    out[rid] = self.recontend_slot(reader, p, draws)
                else:
                    out[rid] = OUT
        return out

    def on_round_end(self, reader, msg, store):
        if not self.uses_isp:
            return set()
        return isp_sync(store, reader)
