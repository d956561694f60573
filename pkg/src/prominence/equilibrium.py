"""Implementable symmetric-equilibrium prices and deviation witnesses.

At a symmetric profile ``(t, ..., t)`` each seller earns ``t/m``. A deviation
by ``x`` earns ``(t + x) D(x)``, so ``t`` is an equilibrium price iff

* ``t >= x D(x) / (1/m - D(x))`` for every raise ``x > 0``, and
* ``t <= (-x) D(x) / (D(x) - 1/m)`` for every cut ``x < 0`` with ``D(x) > 1/m``.

The first family gives the lower endpoint, the second the upper endpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .demand import (demand_deviation_dictator, demand_deviation_threshold, demand_mc)
from .errors import DomainError, UnsupportedError
from .mechanisms import Mechanism
from .numerics import golden_section_max, grid_then_refine, one_sided_limit
from .search import MarketConfig

EMPTY_SLACK = 1e-9
VIOLATION_TOL = 1e-9


@dataclass(frozen=True)
class PriceInterval:
    lo: float
    hi: float
    empty: bool

    @classmethod
    def from_bounds(cls, lo: float, hi: float, slack: float = EMPTY_SLACK) -> "PriceInterval":
        return cls(float(lo), float(hi), bool(lo > hi + slack))

    def __contains__(self, t: float) -> bool:
        return not self.empty and self.lo <= t <= self.hi

    def contains_interval(self, other: "PriceInterval", tol: float = 0.0) -> bool:
        if other.empty:
            return True
        return not self.empty and self.lo <= other.lo + tol and other.hi <= self.hi + tol


@dataclass(frozen=True)
class DeviationWitness:
    seller: int
    price: float
    baseline_revenue: float
    deviation_revenue: float
    gain: float
    stderr: float = 0.0

    def to_dict(self) -> dict:
        return {
            "seller": self.seller,
            "price": self.price,
            "baseline_revenue": self.baseline_revenue,
            "deviation_revenue": self.deviation_revenue,
            "gain": self.gain,
            "stderr": self.stderr,
        }


def _raise_objective(cfg: MarketConfig, demand: Callable[[MarketConfig, float], float]):
    share = 1.0 / cfg.m

    def obj(x: float) -> float:
        d = demand(cfg, x)
        if d >= share:
            return math.inf
        return x * d / (share - d)

    return obj


def _cut_objective(cfg: MarketConfig, demand: Callable[[MarketConfig, float], float]):
    share = 1.0 / cfg.m

    def obj(x: float) -> float:
        d = demand(cfg, x)
        if d <= share:
            return math.inf
        return -x * d / (d - share)

    return obj


def t_star(cfg: MarketConfig, n_grid: int = 2000) -> float:
    """Smallest price no upward deviation can beat (sup of the raise bound)."""
    cfg.require_main()
    top = cfg.theta0 - cfg.dist.V
    if top <= 0:
        return 0.0
    _, val = grid_then_refine(_raise_objective(cfg, demand_deviation_dictator), 0.0, top,
                              n=n_grid, maximize=True)
    return max(float(val), 0.0)


def _upper_bound(cfg: MarketConfig, demand, n_grid: int) -> float:
    cfg.require_main()
    obj = _cut_objective(cfg, demand)
    m = cfg.m
    # every cut of at least a full support width wins the whole market
    best = m / (m - 1.0)
    split = cfg.theta0 - cfg.dist.V - 1.0
    pieces = [(-1.0, split), (split, 0.0)] if -1.0 < split < 0.0 else [(-1.0, 0.0)]
    for a, b in pieces:
        _, val = grid_then_refine(obj, a, b, n=max(n_grid // len(pieces), 10), maximize=False)
        best = min(best, val)
    candidates = [obj(split)] if -1.0 < split < 0.0 else []
    # the infimum may sit at the open end x -> 0-
    candidates.append(one_sided_limit(obj, 0.0, -1.0))
    for v in candidates:
        if np.isfinite(v) and v >= 0:
            best = min(best, float(v))
    return float(best)


def t_bar(cfg: MarketConfig, n_grid: int = 2000) -> float:
    """Largest dictated price no undercut can beat."""
    return _upper_bound(cfg, demand_deviation_dictator, n_grid)


def t_hat(cfg: MarketConfig, n_grid: int = 2000) -> float:
    """Largest threshold price no undercut can beat (the undercutter stays eligible)."""
    return _upper_bound(cfg, demand_deviation_threshold, n_grid)


def dictator_range(cfg: MarketConfig, n_grid: int = 2000) -> PriceInterval:
    return PriceInterval.from_bounds(t_star(cfg, n_grid), t_bar(cfg, n_grid))


def threshold_range(cfg: MarketConfig, n_grid: int = 2000) -> PriceInterval:
    return PriceInterval.from_bounds(t_star(cfg, n_grid), t_hat(cfg, n_grid))


def _deviation_demand_for(mech: Mechanism):
    if mech.kind == "dictator":
        return demand_deviation_dictator
    if mech.kind == "threshold":
        return demand_deviation_threshold
    raise UnsupportedError(
        f"analytic verification covers dictator and threshold mechanisms, not {mech.kind!r}; "
        "use find_undercut_deviation for a simulated scan")


def verify_symmetric_equilibrium(cfg: MarketConfig, mech: Mechanism, t: float,
                                 resolution: int = 2000) -> tuple[bool, DeviationWitness | None]:
    """Scan deviations ``x`` in ``[max(-1, -t), theta0 - V]`` for a profitable one.

    Returns ``(True, None)`` when no deviation gains more than 1e-9, else
    ``(False, witness)`` for the largest gain found.
    """
    cfg.require_main()
    t = float(t)
    if not t > 0:
        raise DomainError("symmetric price t must be positive")
    demand = _deviation_demand_for(mech)
    if abs(mech.t - t) > 1e-12:
        raise UnsupportedError("the mechanism's target price must equal the symmetric price")
    base = t / cfg.m

    def gain(x: float) -> float:
        return (t + x) * demand(cfg, x) - base

    lo = max(-1.0, -t)
    hi = cfg.theta0 - cfg.dist.V
    best_x, best_gain = None, -math.inf
    for a, b in ((lo, 0.0), (0.0, hi)):
        if b <= a:
            continue
        n_side = max(int(resolution * (b - a) / (hi - lo)), 20)
        grid = np.linspace(a, b, n_side)
        if b == 0.0:
            grid = grid[:-1]
        if a == 0.0:
            grid = grid[1:]
        vals = np.array([gain(float(x)) for x in grid])
        i = int(np.argmax(vals))
        xa = float(grid[max(i - 1, 0)])
        xb = float(grid[min(i + 1, len(grid) - 1)])
        x_ref, g_ref = golden_section_max(gain, xa, xb, xtol=1e-10)
        x_side, g_side = (x_ref, g_ref) if g_ref > vals[i] else (float(grid[i]), float(vals[i]))
        if g_side > best_gain:
            best_x, best_gain = x_side, g_side
    if best_gain <= VIOLATION_TOL:
        return True, None
    dev_rev = best_gain + base
    return False, DeviationWitness(0, t + best_x, base, dev_rev, best_gain)


def find_undercut_deviation(cfg: MarketConfig, mech: Mechanism, prices, n: int = 100_000,
                            seed: int = 0, workers: int | None = None,
                            n_grid: int = 21) -> DeviationWitness | None:
    """Simulated best-response scan for a profitable unilateral deviation.

    Every seller is tried against a coarse price grid plus points just around
    the incumbent prices. A witness is reported only when its gain exceeds four
    combined standard errors; ``None`` is inconclusive, never a proof of
    equilibrium. All revenues share one seed so comparisons use common random
    numbers.
    """
    prices = np.asarray(prices, dtype=float)
    m = cfg.m
    if prices.shape != (m,):
        raise DomainError(f"price profile must have {m} entries")
    base = demand_mc(cfg, prices, mech.allocate(prices), n=n, seed=seed, workers=workers)

    candidates = set(np.linspace(0.0, cfg.dist.hi, n_grid).round(12).tolist())
    anchors = set(prices.tolist())
    if mech.t is not None:
        anchors.add(mech.t)
    for q in anchors:
        for step in (1e-3, 1e-2, 0.05, 0.1, 0.25):
            candidates.update((q - step, q + step))
    candidates = sorted(p for p in candidates if p >= 0.0)

    best = None
    for i in range(m):
        base_rev = prices[i] * base.demand[i]
        base_se = prices[i] * base.stderr[i]
        for p_new in candidates:
            if p_new == prices[i]:
                continue
            trial = prices.copy()
            trial[i] = p_new
            est = demand_mc(cfg, trial, mech.allocate(trial), n=n, seed=seed, workers=workers)
            rev = p_new * est.demand[i]
            se = math.hypot(p_new * est.stderr[i], base_se)
            g = rev - base_rev
            if g > 4.0 * se and (best is None or g > best.gain):
                best = DeviationWitness(i, float(p_new), float(base_rev), float(rev), float(g), float(se))
    return best


@dataclass(frozen=True)
class EpsilonBound:
    delta: float
    x_star: float
    r_star: float
    p_a: float
    p_ba: float


def epsilon_bound(cfg: MarketConfig, n_grid: int = 2000) -> EpsilonBound:
    """Gap ``Delta`` below which approximate equilibria survive in a plain presentation.

    ``r(x) = x D_c(x)`` over raises; ``A`` is the event that at least two
    sellers clear ``theta0`` and ``B`` that a fixed seller does.
    """
    cfg.require_main()
    top = cfg.theta0 - cfg.dist.V
    x_star, r_star = grid_then_refine(lambda x: x * demand_deviation_dictator(cfg, x),
                                      0.0, top, n=n_grid, maximize=True)
    q = float(cfg.dist.cdf(cfg.theta0))
    m = cfg.m
    p_a = 1.0 - q ** m - m * (1.0 - q) * q ** (m - 1)
    p_ba = (1.0 - q) * (1.0 - q ** (m - 1))
    delta = min(r_star / m, (m - 1) * r_star * (p_ba - p_a / m))
    return EpsilonBound(float(delta), float(x_star), float(r_star), float(p_a), float(p_ba))


def monopoly_price_equilibrium_check(cfg: MarketConfig) -> tuple[float, bool]:
    """Monopoly price ``p*`` and whether ``c > E[v] - p*/m`` makes it an equilibrium."""
    d = cfg.dist

    def revenue(p: float) -> float:
        return p * (1.0 - float(d.cdf(p)))

    p_star, _ = grid_then_refine(revenue, 0.0, d.hi, n=4001, maximize=True,
                                 xtol=1e-10, include_ends=True)
    return float(p_star), bool(cfg.c > d.mean() - p_star / cfg.m)
