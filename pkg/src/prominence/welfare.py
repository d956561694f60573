"""Social welfare and consumer surplus at symmetric equilibria.

With two sellers welfare has the closed form
``E[v] + integral_V^theta0 F(s)(1 - F(s)) ds`` and does not depend on the
common price; for other seller counts it is estimated by simulation.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass
from typing import Iterable, Sequence

import numpy as np

from .demand import demand_mc
from .distributions import ValueDistribution
from .equilibrium import t_star
from .errors import DomainError, UnsupportedError
from .numerics import forward_derivative, integrate
from .search import MarketConfig

CSV_HEADER = ("c", "theta0", "t_star", "sw", "cs_at_tstar", "sw_stderr")


@dataclass(frozen=True)
class WelfareRow:
    c: float
    theta0: float
    t_star: float
    sw: float
    cs_at_tstar: float
    sw_stderr: float


def social_welfare_closed_form(cfg: MarketConfig) -> float:
    if cfg.m != 2:
        raise UnsupportedError("the closed-form welfare holds for two sellers only")
    d = cfg.dist
    top = min(max(cfg.theta0, d.lo), d.hi)
    gain = integrate(lambda s: d.cdf(s) * (1.0 - d.cdf(s)), d.lo, top, d.breakpoints)
    return d.mean() + gain


def social_welfare(cfg: MarketConfig, t: float = 0.0, method: str = "closed-form",
                   n: int = 1_000_000, seed: int | None = None,
                   workers: int | None = None) -> tuple[float, float]:
    """Expected purchased value net of inspection costs; returns ``(sw, stderr)``.

    ``method="mc"`` simulates the symmetric profile at price ``t`` with a
    uniformly random prominent seller.
    """
    if method == "closed-form":
        return social_welfare_closed_form(cfg), 0.0
    if method != "mc":
        raise DomainError(f"unknown welfare method {method!r}")
    est = _symmetric_mc(cfg, t, n, seed, workers)
    return est.welfare_mean, est.welfare_stderr


def _symmetric_mc(cfg: MarketConfig, t: float, n: int, seed, workers):
    m = cfg.m
    return demand_mc(cfg, np.full(m, float(t)), np.full(m, 1.0 / m), n=n, seed=seed,
                     workers=workers)


def consumer_surplus(cfg: MarketConfig, t: float, method: str = "closed-form",
                     n: int = 1_000_000, seed: int | None = None,
                     workers: int | None = None) -> float:
    """Welfare minus the common price paid by every buyer."""
    sw, _ = social_welfare(cfg, t, method, n, seed, workers)
    return sw - float(t)


def surplus_curve(dist: ValueDistribution, m: int, c_grid: Iterable[float],
                  method: str | None = None, n: int = 200_000, seed: int | None = None,
                  workers: int | None = None, n_grid: int = 2000) -> list[WelfareRow]:
    """One ``WelfareRow`` per cost, sorted by cost.

    Welfare uses the closed form for two sellers and simulation otherwise
    (simulation needs ``seed``). The ``cs_at_tstar`` column is the best
    consumer surplus any symmetric equilibrium attains at that cost.
    """
    if method is None:
        method = "closed-form" if m == 2 else "mc"
    rows = []
    for c in sorted(float(c) for c in c_grid):
        cfg = MarketConfig(m, c, dist).require_main()
        ts = t_star(cfg, n_grid)
        sw, se = social_welfare(cfg, ts, method, n, seed, workers)
        rows.append(WelfareRow(c, cfg.theta0, ts, sw, sw - ts, se))
    return rows


def format_number(x: float) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return f"{x:.12g}"


def rows_to_csv(rows: Sequence[WelfareRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([format_number(v) for v in astuple(row)])
    return buf.getvalue()


@dataclass(frozen=True)
class SurplusConditionReport:
    f_at_V: float
    fprime_at_V: float | None
    theorem_condition: bool | None
    proof_condition: bool | None
    differentiable: bool

    def to_dict(self) -> dict:
        return {
            "f_at_V": self.f_at_V,
            "fprime_at_V": self.fprime_at_V,
            "theorem_condition": self.theorem_condition,
            "proof_condition": self.proof_condition,
            "differentiable": self.differentiable,
        }


def surplus_condition(dist: ValueDistribution, h: float = 1e-6) -> SurplusConditionReport:
    """Density conditions at ``V+`` under which consumer surplus peaks at an interior cost.

    ``theorem_condition`` is ``f < f'/13`` and ``proof_condition`` is
    ``13 f^2 < f'``; both are reported as computed. Families without a
    closed-form slope use a one-sided difference, and if two step sizes
    disagree the density is flagged as not differentiable at ``V``.
    """
    f0 = float(dist.pdf(dist.V))
    slope = dist.pdf_slope_at_lower()
    differentiable = True
    if slope is None:
        pdf = lambda v: float(dist.pdf(v))
        s1 = forward_derivative(pdf, dist.V, h)
        s2 = forward_derivative(pdf, dist.V, 10 * h)
        differentiable = abs(s1 - s2) <= 1e-3 * max(1.0, abs(s1))
        slope = s1 if differentiable else None
    if slope is None:
        return SurplusConditionReport(f0, None, None, None, False)
    return SurplusConditionReport(f0, float(slope), bool(f0 < slope / 13.0),
                                  bool(13.0 * f0 * f0 < slope), differentiable)


def find_interior_optimum(rows_or_dist, m: int | None = None,
                          c_grid: Iterable[float] | None = None,
                          **kwargs) -> tuple[float, float, bool]:
    """Cost maximising the frontier ``SW(c) - t*(c)`` on a sweep.

    Accepts precomputed rows or ``(dist, m, c_grid)``. The optimum counts as
    interior only when it is at least two grid steps away from both ends.
    """
    if isinstance(rows_or_dist, ValueDistribution):
        rows = surplus_curve(rows_or_dist, m, c_grid, **kwargs)
    else:
        rows = list(rows_or_dist)
    if not rows:
        raise DomainError("empty cost grid")
    cs = np.array([r.cs_at_tstar for r in rows])
    i = int(np.argmax(cs))
    interior = 2 <= i <= len(rows) - 3
    return rows[i].c, float(cs[i]), bool(interior)
