"""Positions, ranges and reader motion."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Arena:
    side_x: float = 1000.0
    side_y: float = 1000.0
    read_range: float = 10.0
    interference_range: float = 1000.0

    def __post_init__(self):
        if self.side_x <= 0 or self.side_y <= 0:
            raise ValueError("arena sides must be positive")
        if not 0 < self.read_range <= self.interference_range:
            raise ValueError("need 0 < read_range <= interference_range")


# "1000 square meters" read literally: a square of side sqrt(1000).
LITERAL_ARENA = Arena(side_x=1000.0 ** 0.5, side_y=1000.0 ** 0.5)

MOBILITY_MODELS = ("static", "random-waypoint")


@dataclass(frozen=True)
class MobilityConfig:
    model: str = "static"
    speed_min: float = 1.0
    speed_max: float = 3.0
    pause: float = 0.0

    def __post_init__(self):
        if self.model not in MOBILITY_MODELS:
            raise ValueError(f"unknown mobility model {self.model!r}")
        if not 0 <= self.speed_min <= self.speed_max:
            raise ValueError("need 0 <= speed_min <= speed_max")
        if self.pause < 0:
            raise ValueError("pause must be nonnegative")


def euclidean_distance(a, b) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def pairwise_distances(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Distance matrix between the rows of ``a`` and ``b`` (``b`` defaults to ``a``)."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = a if b is None else np.asarray(b, dtype=float).reshape(-1, 2)
    diff = a[:, None, :] - b[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def place_uniform(n: int, arena: Arena, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform over the arena, returned as an ``(n, 2)`` array."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    u = rng.random((n, 2))
    return u * np.array([arena.side_x, arena.side_y])


def in_read_range(r, t, arena: Arena) -> bool:
    return euclidean_distance(r, t) <= arena.read_range


def in_interference_range(r1, r2, arena: Arena) -> bool:
    return euclidean_distance(r1, r2) <= arena.interference_range


class RandomWaypoint:
    """Per-reader waypoint/speed state for the random-waypoint model.

    Every reader walks toward its own waypoint at a speed drawn uniformly from
    ``[speed_min, speed_max]``; on arrival it pauses, then draws a fresh waypoint
    and speed. Waypoints lie inside the arena, so positions never leave it.
    """

    def __init__(self, n: int, config: MobilityConfig, arena: Arena, rng: np.random.Generator):
        self.config = config
        self.arena = arena
        self.rng = rng
        self.waypoints = place_uniform(n, arena, rng)
        self.speeds = self._draw_speeds(n)
        self.pause_left = np.zeros(n)

    def _draw_speeds(self, n):
        c = self.config
        return c.speed_min + (c.speed_max - c.speed_min) * self.rng.random(n)

    def step(self, positions: np.ndarray, dt: float) -> np.ndarray:
        pos = np.array(positions, dtype=float, copy=True)
        if dt <= 0:
            return pos
        for i in range(len(pos)):
            budget = dt
            while budget > 0:
                if self.pause_left[i] > 0:
                    used = min(budget, self.pause_left[i])
                    self.pause_left[i] -= used
                    budget -= used
                    continue
                delta = self.waypoints[i] - pos[i]
                dist = float(np.hypot(*delta))
                reach = self.speeds[i] * budget
                if reach < dist:
                    pos[i] += delta * (reach / dist)
                    break
                # arrived: spend the travel time, then pause and re-draw
                pos[i] = self.waypoints[i]
                budget -= dist / self.speeds[i] if self.speeds[i] > 0 else budget
                self.pause_left[i] = self.config.pause
                self.waypoints[i] = place_uniform(1, self.arena, self.rng)[0]
                self.speeds[i] = self._draw_speeds(1)[0]
                if self.speeds[i] == 0 and self.config.pause == 0:
                    break
        np.clip(pos[:, 0], 0.0, self.arena.side_x, out=pos[:, 0])
        np.clip(pos[:, 1], 0.0, self.arena.side_y, out=pos[:, 1])
        return pos


def step_mobility(positions, config: MobilityConfig, dt: float, arena: Arena,
                  rng: np.random.Generator, state: RandomWaypoint | None = None) -> np.ndarray:
    """Advance reader positions by ``dt`` seconds.

    ``state`` carries the private waypoints between calls; when omitted a fresh
    one is drawn from ``rng``.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    if config.model == "static" or dt == 0:
        return positions.copy()
    if state is None:
        state = RandomWaypoint(len(positions), config, arena, rng)
    return state.step(positions, dt)
