"""Weitzman indices and the buyer's optimal sequential search with free recall.

A non-prominent seller at price ``p`` carries index ``theta0(c) - p``; a
seller whose value is visible upfront is tagged with its realised utility.
The buyer keeps inspecting the highest nonnegative index until her best
realised utility weakly beats every remaining index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import ValueDistribution
from .errors import DomainError
from .numerics import find_root, integrate


def compute_cbar(dist: ValueDistribution) -> float:
    """Inspection cost at which the zero-price index equals V."""
    return dist.mean() - dist.V


def solve_theta0(dist: ValueDistribution, c: float) -> float:
    """Reservation value ``theta`` solving ``excess(theta) = c``."""
    c = float(c)
    if not (c > 0 and math.isfinite(c)):
        raise DomainError("inspection cost must be positive and finite")
    return _theta0(dist, c)


def _theta0(dist: ValueDistribution, c: float) -> float:
    # c = 0 is the limit of a free inspection: the index is the top of the support
    if c <= 0:
        return dist.hi
    cbar = compute_cbar(dist)
    if c >= cbar:
        # below V the excess is linear: mean - theta
        return dist.mean() - c
    return find_root(lambda th: dist.excess(th) - c, dist.lo, dist.hi, xtol=1e-13)


def index(dist: ValueDistribution, c: float, p: float, theta0: float | None = None) -> float:
    """Weitzman index of a seller at price ``p`` with inspection cost ``c``.

    Nonnegative indices are ``theta0 - p``. Otherwise the defining equation
    ``E[([v - p]^+ - theta)^+] = c`` has the closed-form root
    ``excess(p) - c`` because every term inside the outer positive part is
    already nonnegative.
    """
    th0 = _theta0(dist, float(c)) if theta0 is None else float(theta0)
    shifted = th0 - float(p)
    if shifted >= 0:
        return shifted
    return dist.excess(float(p)) - float(c)


@dataclass(frozen=True)
class MarketConfig:
    """``m`` sellers, inspection cost ``c`` and the common value prior."""

    m: int
    c: float
    dist: ValueDistribution
    theta0: float = field(init=False)
    cbar: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 2:
            raise DomainError("seller count m must be an integer >= 2")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError("inspection cost c must be positive and finite")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "theta0", solve_theta0(self.dist, self.c))
        object.__setattr__(self, "cbar", compute_cbar(self.dist))

    @property
    def nondegenerate(self) -> bool:
        return self.theta0 > 0

    @property
    def main_regime(self) -> bool:
        return self.c < self.cbar

    @property
    def v_at_least_two(self) -> bool:
        return self.dist.V >= 2

    @property
    def regime(self) -> str:
        return "main" if self.main_regime and self.nondegenerate else "degenerate"

    def flags(self) -> dict:
        return {
            "nondegenerate": self.nondegenerate,
            "main_regime": self.main_regime,
            "v_at_least_two": self.v_at_least_two,
        }

    def require_main(self) -> "MarketConfig":
        if self.regime != "main":
            raise DomainError(
                f"requires 0 < c < cbar = {self.cbar:.6g} (got c = {self.c:.6g})")
        return self

    def index(self, p: float) -> float:
        return index(self.dist, self.c, p, theta0=self.theta0)


@dataclass
class SearchOutcome:
    inspected: list[int]
    purchase: int | None
    buyer_utility: float


def seller_indices(dist: ValueDistribution, prices: Sequence[float],
                   inspection_costs: Sequence[float]) -> np.ndarray:
    cache: dict[float, float] = {}
    out = []
    for p, c in zip(prices, inspection_costs):
        c = float(c)
        if c not in cache:
            cache[c] = _theta0(dist, c)
        out.append(index(dist, c, p, theta0=cache[c]))
    return np.asarray(out, dtype=float)


def simulate_search(dist: ValueDistribution, prices, inspection_costs, values, known_mask,
                    indices=None) -> SearchOutcome:
    """Run the index policy on one realisation of values.

    Sellers in ``known_mask`` start with tag ``v - p`` and are never paid for;
    the rest are inspected in decreasing index order (lowest id on ties) while
    their index is nonnegative and strictly above the best realised utility.
    """
    prices = np.asarray(prices, dtype=float)
    costs = np.asarray(inspection_costs, dtype=float)
    values = np.asarray(values, dtype=float)
    known = np.asarray(known_mask, dtype=bool)
    m = len(prices)
    if not (len(costs) == len(values) == len(known) == m):
        raise DomainError("prices, costs, values and known_mask must have equal length")
    if indices is None:
        indices = seller_indices(dist, prices, costs)
    indices = np.asarray(indices, dtype=float)
    if len(indices) != m:
        raise DomainError("indices must have one entry per seller")

    util = values - prices
    best, best_id = -math.inf, None
    for i in np.flatnonzero(known):
        if util[i] > best:
            best, best_id = float(util[i]), int(i)

    order = sorted((i for i in range(m) if not known[i]), key=lambda i: (-indices[i], i))
    inspected: list[int] = []
    paid = 0.0
    for i in order:
        if indices[i] < 0 or best >= indices[i]:
            break
        inspected.append(i)
        paid += costs[i]
        if util[i] > best:
            best, best_id = float(util[i]), i

    if best_id is not None and best >= 0:
        return SearchOutcome(inspected, best_id, best - paid)
    return SearchOutcome(inspected, None, -paid)


def winner_via_kappa(values, prices, indices) -> tuple[int | None, float]:
    """Seller maximising ``min(v - p, theta)`` and the buyer's gross utility.

    No purchase when every ``kappa`` is negative; ties go to the lowest id.
    """
    kappa = np.minimum(np.asarray(values, float) - np.asarray(prices, float),
                       np.asarray(indices, float))
    i = int(np.argmax(kappa))
    if kappa[i] < 0:
        return None, 0.0
    return i, float(kappa[i])


def expected_max_kappa(dist: ValueDistribution, prices, indices) -> float:
    """``E[max_i kappa_i^+]`` as the integral of one minus the cdf of the max.

    ``P[kappa_i <= y]`` is 1 above ``theta_i`` and ``F(y + p_i)`` below it;
    sellers with known values pass an infinite index.
    """
    prices = np.asarray(prices, dtype=float)
    indices = np.asarray(indices, dtype=float)
    caps = np.minimum(indices, dist.hi - prices)
    top = float(np.max(caps))
    if top <= 0:
        return 0.0

    def surv(y):
        y = np.asarray(y, dtype=float)[:, None]
        g = np.where(y >= indices, 1.0, dist.cdf(y + prices))
        return 1.0 - np.prod(g, axis=1)

    bps = list(indices[np.isfinite(indices)]) + list(dist.lo - prices) + list(dist.hi - prices)
    bps += [b - p for b in dist.breakpoints for p in prices]
    return integrate(surv, 0.0, top, bps)


def simulate_batch(values: np.ndarray, prices: np.ndarray, indices: np.ndarray,
                   costs: np.ndarray, known: np.ndarray, priority: np.ndarray | None = None):
    """Vectorised index policy over rows of ``values``.

    ``known`` and ``priority`` have the shape of ``values``; ``priority``
    orders sellers with equal index (smaller first). Without it ties go to
    the lowest id. Returns ``(purchase, utility, welfare)`` where purchase is
    -1 for no sale, utility is net of inspection costs and welfare adds back
    the price paid.
    """
    n, m = values.shape
    rows = np.arange(n)
    util = values - prices
    best = np.where(known, util, -np.inf).max(axis=1)
    best_id = np.where(known, util, -np.inf).argmax(axis=1)
    paid = np.zeros(n)

    keys_idx = np.broadcast_to(-indices, (n, m))
    tie = np.broadcast_to(np.arange(m, dtype=float), (n, m)) if priority is None else priority
    order = np.lexsort((tie, keys_idx), axis=-1)

    active = np.ones(n, dtype=bool)
    for r in range(m):
        s = order[:, r]
        hidden = ~known[rows, s]
        th = indices[s]
        go = active & hidden & (th >= 0) & (best < th)
        # a hidden seller that is not worth inspecting ends the search
        active &= ~(hidden & ~go)
        u = util[rows, s]
        paid = paid + np.where(go, costs[s], 0.0)
        better = go & (u > best)
        best = np.where(better, u, best)
        best_id = np.where(better, s, best_id)

    bought = best >= 0
    purchase = np.where(bought, best_id, -1)
    utility = np.where(bought, best, 0.0) - paid
    welfare = utility + np.where(bought, prices[best_id], 0.0)
    return purchase, utility, welfare
