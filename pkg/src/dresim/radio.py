"""Interference-based distance estimation and beacon collision detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import pairwise_distances


@dataclass(frozen=True)
class RadioParams:
    p_reader: float = 2.3  # W EIRP
    g_reader: float = 1.0
    k0: float = 1.0
    path_loss_exponent: float = 2.0

    def __post_init__(self):
        if min(self.p_reader, self.g_reader, self.k0) <= 0:
            raise ValueError("radio parameters must be positive")
        if self.path_loss_exponent < 1:
            raise ValueError("path loss exponent must be >= 1")


@dataclass(frozen=True)
class BeaconEvent:
    reader_id: int
    slot: int
    channel: int


def received_interference(params: RadioParams, true_distance: float) -> float:
    """Interference power a reader picks up from one rival at ``true_distance``."""
    if true_distance <= 0:
        raise ValueError("distance must be positive")
    p = params
    return p.p_reader * p.g_reader * p.g_reader / (p.k0 * true_distance ** p.path_loss_exponent)


def estimate_distance(params: RadioParams, i_r: float) -> float:
    """Invert the path-loss model: ``D = (P G G / (K0 I))^(1/alpha)``."""
    if i_r <= 0:
        raise ValueError("interference must be positive")
    p = params
    return (p.p_reader * p.g_reader * p.g_reader / (p.k0 * i_r)) ** (1.0 / p.path_loss_exponent)


def measured_distance(params: RadioParams, true_distance: float, noise_sigma: float = 0.0,
                      rng: np.random.Generator | None = None) -> float:
    """Distance a reader infers from a rival's beacon, optionally with log-normal RSSI noise."""
    if true_distance <= 0:
        # co-located readers: the estimate is exactly zero
        return 0.0
    i_r = received_interference(params, true_distance)
    if noise_sigma > 0:
        i_r *= float(np.exp(noise_sigma * rng.standard_normal()))
    return estimate_distance(params, i_r)


def detect_beacon_collisions(beacons, positions=None, interference_range: float | None = None,
                             adjacency=None) -> list[list[BeaconEvent]]:
    """Group same-slot beacons into collision groups.

    Beacons are split by channel; within a channel, readers linked through the
    interference graph form one group (connected components). A group of one is
    a clear channel. Pass either ``positions`` with ``interference_range`` or
    ``adjacency``: a boolean matrix indexed by reader id, or a callable
    ``linked(a, b)``.
    """
    beacons = sorted(beacons, key=lambda b: (b.channel, b.reader_id))
    if not beacons:
        return []
    if len({b.slot for b in beacons}) > 1:
        raise ValueError("beacons must share one slot")
    if adjacency is None:
        if positions is None or interference_range is None:
            raise ValueError("need positions and interference_range, or adjacency")
        pos = np.asarray(positions, dtype=float)

        def closeness(ids):
            return pairwise_distances(pos[ids]) <= interference_range
    elif callable(adjacency):
        def closeness(ids):
            m = len(ids)
            close = np.eye(m, dtype=bool)
            for i in range(m):
                for j in range(i + 1, m):
                    close[i, j] = close[j, i] = bool(adjacency(ids[i], ids[j]))
            return close
    else:
        adj = np.asarray(adjacency, dtype=bool)

        def closeness(ids):
            return adj[np.ix_(ids, ids)]

    groups = []
    by_channel: dict[int, list[BeaconEvent]] = {}
    for b in beacons:
        by_channel.setdefault(b.channel, []).append(b)
    for ch in sorted(by_channel):
        members = by_channel[ch]
        if len(members) == 1:
            groups.append(members)
        else:
            groups.extend(_components(members, closeness([b.reader_id for b in members])))
    return groups


def _components(members, close):
    """Connected components of a symmetric boolean adjacency matrix."""
    m = len(members)
    label = np.full(m, -1)
    for i in range(m):
        if label[i] >= 0:
            continue
        reach = np.zeros(m, dtype=bool)
        reach[i] = True
        frontier = reach.copy()
        while frontier.any():
            nxt = close[frontier].any(axis=0) & ~reach
            reach |= nxt
            frontier = nxt
        label[reach] = i
    comps: dict[int, list[BeaconEvent]] = {}
    for b, lab in zip(members, label):
        comps.setdefault(int(lab), []).append(b)
    return list(comps.values())
