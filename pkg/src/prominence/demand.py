"""Seller demand under price deviations: quadrature fast paths and a Monte Carlo oracle.

A deviator posts ``t + x`` while every other seller posts ``t``. As long as
``t <= V`` every buyer purchases and the deviator's demand depends on ``x``
only. Per-seller demand from simulation is the empirical purchase frequency
of the exact index policy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .mechanisms import Mechanism
from .montecarlo import mean_and_stderr, run_sharded
from .numerics import integrate
from .search import MarketConfig, simulate_batch


@dataclass(frozen=True)
class ProminenceAssignment:
    prominent: int | None = None

    def allocation(self, m: int) -> np.ndarray:
        x = np.zeros(m)
        if self.prominent is not None:
            if not 0 <= self.prominent < m:
                raise DomainError(f"prominent seller {self.prominent} outside 0..{m - 1}")
            x[self.prominent] = 1.0
        return x


@dataclass
class DemandEstimate:
    demand: np.ndarray
    stderr: np.ndarray
    n: int
    seed: int
    purchase_rate: float
    utility_mean: float
    utility_stderr: float
    welfare_mean: float
    welfare_stderr: float

    def to_dict(self) -> dict:
        return {
            "demand": self.demand.tolist(),
            "stderr": self.stderr.tolist(),
            "n": self.n,
            "seed": self.seed,
            "purchase_rate": self.purchase_rate,
            "utility_mean": self.utility_mean,
            "utility_stderr": self.utility_stderr,
            "welfare_mean": self.welfare_mean,
            "welfare_stderr": self.welfare_stderr,
        }


def _allocation_vector(prom, m: int) -> np.ndarray:
    if prom is None:
        return np.zeros(m)
    if isinstance(prom, ProminenceAssignment):
        return prom.allocation(m)
    if isinstance(prom, (int, np.integer)):
        return ProminenceAssignment(int(prom)).allocation(m)
    x = np.asarray(prom, dtype=float)
    if x.shape != (m,) or np.any(x < 0) or np.any(x > 1) or x.sum() > 1 + 1e-12:
        raise DomainError("allocation vector must have m entries in [0, 1] summing to <= 1")
    return x


def demand_mc(cfg: MarketConfig, prices: Sequence[float], prom=None, n: int = 100_000,
              seed: int | None = None, workers: int | None = None) -> DemandEstimate:
    """Empirical purchase frequencies under the index policy.

    ``prom`` is a ``ProminenceAssignment``, a seller id, an allocation vector
    (the prominent seller is drawn per buyer from it) or None for a plain
    presentation. Sellers with equal indices are inspected in a uniformly
    random order.
    """
    m = cfg.m
    prices = np.asarray(prices, dtype=float)
    if prices.shape != (m,):
        raise DomainError(f"price profile must have {m} entries")
    alloc = _allocation_vector(prom, m)
    cum = np.cumsum(alloc)
    indices = np.array([cfg.index(p) for p in prices])
    costs = np.full(m, cfg.c)
    dist = cfg.dist

    def shard(rng: np.random.Generator, k: int):
        values = dist.sample(rng, (k, m))
        prom_draw = np.searchsorted(cum, rng.random(k), side="right")
        known = prom_draw[:, None] == np.arange(m)[None, :]
        priority = rng.random((k, m))
        purchase, utility, welfare = simulate_batch(values, prices, indices, costs, known, priority)
        counts = np.bincount(purchase + 1, minlength=m + 1)
        return (counts, utility.sum(), np.dot(utility, utility),
                welfare.sum(), np.dot(welfare, welfare))

    parts = run_sharded(shard, n, seed, workers)
    counts = np.zeros(m + 1, dtype=np.int64)
    u_sum = u_sq = w_sum = w_sq = 0.0
    for cnt, us, uq, ws, wq in parts:
        counts += cnt
        u_sum += us
        u_sq += uq
        w_sum += ws
        w_sq += wq
    d = counts[1:] / n
    u_mean, u_se = mean_and_stderr(u_sum, u_sq, n)
    w_mean, w_se = mean_and_stderr(w_sum, w_sq, n)
    return DemandEstimate(
        demand=d, stderr=np.sqrt(d * (1.0 - d) / n), n=int(n), seed=int(seed),
        purchase_rate=float(1.0 - counts[0] / n),
        utility_mean=u_mean, utility_stderr=u_se,
        welfare_mean=w_mean, welfare_stderr=w_se,
    )


def _bps(cfg: MarketConfig, x: float) -> list[float]:
    d = cfg.dist
    pts = [cfg.theta0, d.lo - x, d.hi - x, cfg.theta0 - x]
    for b in d.breakpoints:
        pts += [b, b - x]
    return pts


def _upward_demand(cfg: MarketConfig, x: float) -> float:
    """Deviator who raises the price (``0 <= x``): inspected last, if at all."""
    d, m, th = cfg.dist, cfg.m, cfg.theta0

    def g(v):
        Fv = d.cdf(v)
        return (1.0 - d.cdf(v + x)) * (m - 1) * Fv ** (m - 2) * d.pdf(v)

    return integrate(g, d.lo, th - x, _bps(cfg, x))


def _stop_after_deviator(cfg: MarketConfig, x: float) -> float:
    # the buyer inspects the cheaper deviator right after the prominent seller
    # and stops there because its utility clears every remaining index
    d, th = cfg.dist, cfg.theta0

    def g(v2):
        return (1.0 - d.cdf(np.maximum(th, v2) + x)) * d.pdf(v2)

    return integrate(g, d.lo, min(th - x, d.hi), _bps(cfg, x))


def _win_full_comparison(cfg: MarketConfig, x: float) -> float:
    # the buyer inspects everyone and the deviator's utility is the best;
    # the inner integral over the prominent seller's value is done in closed form
    d, m, th = cfg.dist, cfg.m, cfg.theta0

    def g(u):
        return d.cdf(u) ** (m - 1) * d.pdf(u + x)

    return integrate(g, max(d.lo, d.lo - x), min(th, d.hi - x), _bps(cfg, x))


def demand_deviation_dictator(cfg: MarketConfig, x: float) -> float:
    """Demand of a non-prominent seller deviating by ``x`` from the dictated price."""
    cfg.require_main()
    x = float(x)
    if x <= -1.0:
        return 1.0
    if x >= cfg.theta0 - cfg.dist.V:
        return 0.0
    if x >= 0.0:
        val = _upward_demand(cfg, x)
    else:
        val = _stop_after_deviator(cfg, x) + _win_full_comparison(cfg, x)
    return float(min(max(val, 0.0), 1.0))


def demand_bb(cfg: MarketConfig, x: float) -> float:
    """Demand of the prominent seller priced ``x`` above everyone else.

    The prominent seller wins iff ``v1 - x >= min(W, theta0)`` with ``W`` the
    best of the other ``m - 1`` values.
    """
    cfg.require_main()
    x = float(x)
    if x <= -1.0:
        return 1.0
    if x >= 1.0:
        return 0.0
    d = cfg.dist
    val = 1.0 - float(d.cdf(cfg.theta0 + x)) + _win_full_comparison(cfg, x)
    return float(min(max(val, 0.0), 1.0))


def demand_deviation_threshold(cfg: MarketConfig, x: float) -> float:
    """Deviation demand under a threshold mechanism.

    Undercutting keeps the deviator eligible, so it wins prominence with
    probability ``1/m``; raising the price forfeits prominence. At ``x = 0``
    the right limit is returned, as for the dictator demand.
    """
    cfg.require_main()
    x = float(x)
    if x >= 0.0:
        return demand_deviation_dictator(cfg, x)
    m = cfg.m
    return demand_bb(cfg, x) / m + (1.0 - 1.0 / m) * demand_deviation_dictator(cfg, x)


def right_limit_at_zero(cfg: MarketConfig) -> float:
    """Closed form of ``D_c(0+) = F^{m-1}(theta0) - (m-1)/m F^m(theta0)``."""
    q = float(cfg.dist.cdf(cfg.theta0))
    m = cfg.m
    return q ** (m - 1) - (m - 1) / m * q ** m


DEVIATION_KINDS = ("dictator", "threshold", "bb")


def deviation_profile(cfg: MarketConfig, x: float, kind: str, t: float | None = None):
    """Price profile and allocation for seller 0 deviating by ``x`` from ``t``.

    ``x = 0`` is simulated as a raise of 1e-9 so that the profile realises the
    right limit used by the analytic demands.
    """
    if kind not in DEVIATION_KINDS:
        raise DomainError(f"deviation kind must be one of {DEVIATION_KINDS}")
    if x == 0 and kind != "bb":
        x = 1e-9
    t = min(1.0, cfg.dist.V) if t is None else float(t)
    prices = np.full(cfg.m, t)
    prices[0] = t + x
    if kind == "bb":
        alloc = ProminenceAssignment(0).allocation(cfg.m)
    else:
        alloc = Mechanism(kind, t).allocate(prices)
    return prices, alloc


def deviation_demand_mc(cfg: MarketConfig, x: float, kind: str = "dictator", n: int = 100_000,
                        seed: int | None = None, t: float | None = None,
                        workers: int | None = None) -> tuple[float, float]:
    """Simulated demand of the deviating seller; returns ``(demand, stderr)``."""
    prices, alloc = deviation_profile(cfg, x, kind, t)
    est = demand_mc(cfg, prices, alloc, n=n, seed=seed, workers=workers)
    return float(est.demand[0]), float(est.stderr[0])
