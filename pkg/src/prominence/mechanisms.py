"""Prominence mechanisms: maps from price profiles to allocation vectors.

Randomised tie-breaking is represented by fractional allocations; sampling a
prominent seller happens only inside the Monte Carlo drivers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PRICE_TOL = 1e-12
KINDS = ("plain", "lpf", "dictator", "threshold")


@dataclass(frozen=True)
class Mechanism:
    kind: str
    t: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown mechanism {self.kind!r}")
        if self.kind in ("dictator", "threshold"):
            if self.t is None or not (self.t > 0 and math.isfinite(self.t)):
                raise DomainError(f"{self.kind} mechanism needs a target price t > 0")
            object.__setattr__(self, "t", float(self.t))
        elif self.t is not None:
            raise DomainError(f"{self.kind} mechanism takes no target price")

    def allocate(self, prices) -> np.ndarray:
        p = np.asarray(prices, dtype=float)
        if p.ndim != 1 or not np.all(np.isfinite(p)):
            raise DomainError("price profile must be a finite 1-d sequence")
        if self.kind == "plain":
            chosen = np.zeros(len(p), dtype=bool)
        elif self.kind == "lpf":
            chosen = p == p.min()
        elif self.kind == "dictator":
            chosen = np.abs(p - self.t) <= PRICE_TOL
        else:
            chosen = p <= self.t
        count = int(chosen.sum())
        if count == 0:
            return np.zeros(len(p))
        return np.where(chosen, 1.0 / count, 0.0)

    def __str__(self) -> str:
        return self.kind if self.t is None else f"{self.kind}:{self.t:g}"


def parse_mechanism(spec: str) -> Mechanism:
    """Parse ``plain``, ``lpf``, ``dictator:<t>`` or ``threshold:<t>``."""
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    if name in ("dictator", "threshold"):
        try:
            t = float(arg)
        except ValueError:
            raise DomainError(f"mechanism {spec!r} needs a numeric target price") from None
        return Mechanism(name, t)
    if arg:
        raise DomainError(f"mechanism {name!r} takes no argument")
    return Mechanism(name)


def check_anonymous(mech, trials: int = 200, seed: int = 0, m: int = 3) -> bool:
    """True iff relabelling sellers relabels the allocation, on random profiles.

    Profiles are drawn from a small price set (including the mechanism's
    target when it has one) so that ties, the interesting case, are common.
    Works for any object with an ``allocate`` method.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    palette = [0.3, 0.5, 0.7, 1.1]
    t = getattr(mech, "t", None)
    if t is not None:
        palette.append(float(t))
    palette = np.array(palette)
    for _ in range(trials):
        p = rng.choice(palette, size=m)
        perm = rng.permutation(m)
        x = np.asarray(mech.allocate(p), dtype=float)
        x_perm = np.asarray(mech.allocate(p[perm]), dtype=float)
        if not np.array_equal(x_perm, x[perm]):
            return False
    return True


def check_allocating_at(mech, t: float, m: int = 2) -> bool:
    """True iff the symmetric profile ``(t, ..., t)`` is fully allocated."""
    total = float(np.sum(mech.allocate(np.full(m, float(t)))))
    return abs(total - 1.0) <= 1e-12
