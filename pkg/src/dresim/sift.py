"""Contention-slot probability distributions.

Slots are 1-based throughout: ``probabilities[k - 1]`` is the probability of
picking slot ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SlotDistribution:
    probabilities: np.ndarray
    alpha: float = 1.0
    cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or len(p) < 1:
            raise ValueError("distribution needs at least one slot")
        if np.any(p < 0):
            raise ValueError("negative slot probability")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probabilities", p)
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        object.__setattr__(self, "cdf", cdf)

    @property
    def K(self) -> int:
        return len(self.probabilities)

    def slot_from_uniform(self, u):
        """Inverse-CDF map of uniform(s) in [0, 1) to slot index(es) in [1, K]."""
        idx = np.searchsorted(self.cdf, u, side="right") + 1
        return np.minimum(idx, self.K)


def uniform_distribution(K: int) -> SlotDistribution:
    if K < 1:
        raise ValueError("K must be >= 1")
    return SlotDistribution(np.full(K, 1.0 / K))


def sift_distribution(K: int, M: int) -> SlotDistribution:
    """SIFT slot distribution, ``P_k = (1-a) a^K / (1-a^K) * a^-k`` with ``a = M^(-1/(K-1))``.

    Degenerates to uniform when ``M == 1`` or ``K == 1`` (the a -> 1 limit).
    """
    if K < 1 or M < 1:
        raise ValueError("K and M must be >= 1")
    if K == 1 or M == 1:
        return uniform_distribution(K)
    alpha = M ** (-1.0 / (K - 1))
    k = np.arange(1, K + 1)
    # alpha^(K-k) form avoids overflow of alpha^-k for large K
    p = (1 - alpha) * alpha ** (K - k) / (1 - alpha ** K)
    p = p / p.sum()
    return SlotDistribution(p, alpha=alpha)


def pstar_recursion(K: int, R: int) -> list[float]:
    """``f_j(R)`` for ``j = 1..K-1``; ``f_1 = 0`` and ``f_j = ((R-1)/(R-f_{j-1}))^(R-1)``."""
    f = [0.0]
    for _ in range(2, K):
        f.append(((R - 1) / (R - f[-1])) ** (R - 1))
    return f


def pstar_distribution(K: int, R: int) -> SlotDistribution:
    """Optimal non-uniform slot distribution for ``R`` known contenders (CSMA/p*).

    Slot ``k < K`` takes ``(1 - f_{K-k}) / (R - f_{K-k})`` of the mass left over
    by slots ``1..k-1``; the last slot receives whatever remains.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if R < 2:
        raise ValueError("R must be >= 2")
    if K == 1:
        return SlotDistribution(np.array([1.0]))
    f = pstar_recursion(K, R)
    p = np.zeros(K)
    remaining = 1.0
    for k in range(1, K):
        fk = f[K - k - 1]
        p[k - 1] = (1 - fk) / (R - fk) * remaining
        remaining -= p[k - 1]
    p[-1] = max(remaining, 0.0)
    return SlotDistribution(p / p.sum())


def geometric_distribution(K: int, p_g: float) -> SlotDistribution:
    """Geometric slot choice ``p_g (1-p_g)^(k-1)`` truncated to ``[1, K]``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0 < p_g <= 1:
        raise ValueError("p_g must lie in (0, 1]")
    k = np.arange(1, K + 1)
    w = p_g * (1 - p_g) ** (k - 1)
    return SlotDistribution(w / w.sum())


def sample_slot(dist: SlotDistribution, rng: np.random.Generator, size=None):
    """Draw slot index(es) in ``[1, K]`` by inverse-CDF sampling."""
    u = rng.random(size)
    s = dist.slot_from_uniform(u)
    return int(s) if size is None else s


def win_probability(K: int, M: int, R: int) -> float:
    """Chance that exactly one of ``R`` SIFT contenders holds the strict minimum slot.

    ``R * sum_{k<K} P_k (1 - sum_{z<=k} P_z)^(R-1)``. The commonly printed
    variant sums the inner term up to ``K``, which is identically 1 and makes
    the whole expression vanish for ``R >= 2``; the cumulative bound ``z <= k``
    is the one that describes a unique winner.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if R < 1:
        raise ValueError("R must be >= 1")
    p = sift_distribution(K, M).probabilities
    tail = np.clip(1.0 - np.cumsum(p), 0.0, 1.0)
    val = R * float(np.sum(p[:-1] * tail[:-1] ** (R - 1)))
    return min(max(val, 0.0), 1.0)


def distribution_table(dist: SlotDistribution) -> str:
    lines = ["k,P_k,cumulative"]
    for k, (pk, c) in enumerate(zip(dist.probabilities, dist.cdf), start=1):
        lines.append(f"{k},{pk:.6g},{c:.6g}")
    return "\n".join(lines) + "\n"
