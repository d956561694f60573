"""Continuous value priors supported on [V, V + 1].

Every family exposes vectorised ``cdf``/``pdf``, inverse-cdf ``quantile``,
``mean`` and the excess expectation ``excess(theta) = E[(v - theta)^+]``,
which defines the buyer's reservation values.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError
from .numerics import forward_derivative, integrate


class ValueDistribution:
    """Base class for priors on ``[V, V + 1]``.

    Subclasses implement ``cdf``, ``pdf`` and ``quantile``; closed forms for
    ``excess`` and ``mean`` are optional overrides of the quadrature defaults.
    """

    V: float
    family: str = "custom"

    @property
    def lo(self) -> float:
        return self.V

    @property
    def hi(self) -> float:
        return self.V + 1.0

    # interior points where the pdf is not smooth
    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def cdf(self, v):
        raise NotImplementedError

    def pdf(self, v):
        raise NotImplementedError

    def quantile(self, u):
        raise NotImplementedError

    def excess(self, theta: float) -> float:
        """``E[(v - theta)^+]``, equal to the integral of ``1 - F`` above theta."""
        theta = float(theta)
        if theta >= self.hi:
            return 0.0
        below = max(self.lo - theta, 0.0)
        start = max(theta, self.lo)
        tail = integrate(lambda v: 1.0 - self.cdf(v), start, self.hi, self.breakpoints)
        return below + tail

    def mean(self) -> float:
        return self.V + self.excess(self.V)

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-cdf draws using the caller's generator."""
        return self.quantile(rng.random(size))

    def pdf_slope_at_lower(self) -> float | None:
        """Closed-form ``f'(V+)`` when the family has one."""
        return None

    def pdf_slope_numeric(self, h: float = 1e-6) -> float:
        return forward_derivative(lambda v: float(self.pdf(v)), self.V, h)

    def _check_u(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0)) or np.any(np.isnan(u)):
            raise DomainError("quantile argument must lie in [0, 1]")
        return u


def _support_mask(v, lo, hi):
    return (v >= lo) & (v <= hi)


@dataclass(frozen=True)
class Uniform(ValueDistribution):
    V: float = 2.0
    family: str = field(default="uniform", init=False)

    def __post_init__(self):
        if not self.V > 0:
            raise DomainError("support lower bound V must be positive")

    def cdf(self, v):
        return np.clip(np.asarray(v, dtype=float) - self.V, 0.0, 1.0)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(_support_mask(v, self.lo, self.hi), 1.0, 0.0)

    def quantile(self, u):
        return self.V + self._check_u(u)

    def excess(self, theta: float) -> float:
        theta = float(theta)
        if theta >= self.hi:
            return 0.0
        if theta <= self.lo:
            return self.mean() - theta
        return 0.5 * (self.hi - theta) ** 2

    def mean(self) -> float:
        return self.V + 0.5

    def pdf_slope_at_lower(self) -> float:
        return 0.0


@dataclass(frozen=True)
class TiltedExponential(ValueDistribution):
    """Density proportional to ``exp(k (v - V))`` on ``[V, V + 1]``."""

    k: float = 1.0
    V: float = 2.0
    family: str = field(default="tiltedexp", init=False)

    def __post_init__(self):
        if not self.V > 0:
            raise DomainError("support lower bound V must be positive")
        if self.k == 0 or not math.isfinite(self.k):
            raise DomainError("tilt k must be finite and non-zero (use Uniform for k = 0)")

    @property
    def _norm(self) -> float:
        return math.expm1(self.k)

    def cdf(self, v):
        s = np.clip(np.asarray(v, dtype=float) - self.V, 0.0, 1.0)
        return np.clip(np.expm1(self.k * s) / self._norm, 0.0, 1.0)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        dens = self.k * np.exp(self.k * (v - self.V)) / self._norm
        return np.where(_support_mask(v, self.lo, self.hi), dens, 0.0)

    def quantile(self, u):
        u = self._check_u(u)
        return self.V + np.log1p(u * self._norm) / self.k

    def excess(self, theta: float) -> float:
        theta = float(theta)
        if theta >= self.hi:
            return 0.0
        if theta <= self.lo:
            return self.mean() - theta
        k, ek = self.k, math.exp(self.k)
        s = theta - self.V
        # integral of (e^k - e^{k u}) / (e^k - 1) over u in [s, 1]
        return (ek * (1.0 - s) - (ek - math.exp(k * s)) / k) / self._norm

    def mean(self) -> float:
        k = self.k
        return self.V + math.exp(k) / math.expm1(k) - 1.0 / k

    def pdf_slope_at_lower(self) -> float:
        return self.k * self.k / self._norm


@dataclass(frozen=True)
class PiecewiseLinearCdf(ValueDistribution):
    """Prior whose cdf interpolates linearly between user-supplied knots.

    ``knots`` is a sequence of ``(v, F(v))`` pairs starting at ``(V, 0)`` and
    ending at ``(V + 1, 1)``, strictly increasing in both coordinates.
    """

    knots: tuple[tuple[float, float], ...] = ((2.0, 0.0), (3.0, 1.0))
    family: str = field(default="pwl", init=False)
    V: float = field(init=False)

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.knots)
        if len(pts) < 2:
            raise DomainError("a piecewise-linear cdf needs at least two knots")
        v = np.array([p[0] for p in pts])
        F = np.array([p[1] for p in pts])
        if not (np.all(np.diff(v) > 0) and np.all(np.diff(F) > 0)):
            raise DomainError("knots must be strictly increasing in both coordinates")
        if F[0] != 0.0 or F[-1] != 1.0:
            raise DomainError("knot cdf values must start at 0 and end at 1")
        if not math.isclose(v[-1] - v[0], 1.0, rel_tol=0, abs_tol=1e-12):
            raise DomainError("knots must span a support of width exactly 1")
        if not v[0] > 0:
            raise DomainError("support lower bound V must be positive")
        object.__setattr__(self, "knots", pts)
        object.__setattr__(self, "V", float(v[0]))
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_F", F)
        object.__setattr__(self, "_slopes", np.diff(F) / np.diff(v))

    @classmethod
    def from_json(cls, path: str | Path) -> "PiecewiseLinearCdf":
        """Load ``{"V": number, "knots": [[v, F], ...]}``."""
        doc = json.loads(Path(path).read_text())
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "PiecewiseLinearCdf":
        try:
            knots = tuple((float(a), float(b)) for a, b in doc["knots"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed piecewise prior document: {exc}") from exc
        dist = cls(knots=knots)
        if "V" in doc and not math.isclose(float(doc["V"]), dist.V, abs_tol=1e-12):
            raise DomainError("declared V does not match the first knot")
        return dist

    def to_dict(self) -> dict:
        return {"V": self.V, "knots": [list(p) for p in self.knots]}

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self._v[1:-1])

    def cdf(self, v):
        return np.interp(np.asarray(v, dtype=float), self._v, self._F)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        seg = np.clip(np.searchsorted(self._v, v, side="right") - 1, 0, len(self._slopes) - 1)
        return np.where(_support_mask(v, self.lo, self.hi), self._slopes[seg], 0.0)

    def quantile(self, u):
        return np.interp(self._check_u(u), self._F, self._v)

    def excess(self, theta: float) -> float:
        # exact trapezoid integration of the linear survival function
        theta = float(theta)
        if theta >= self.hi:
            return 0.0
        if theta <= self.lo:
            return self.mean() - theta
        v, F = self._v, self._F
        j = int(np.searchsorted(v, theta, side="right"))
        xs = np.concatenate([[theta], v[j:]])
        surv = 1.0 - np.concatenate([[float(self.cdf(theta))], F[j:]])
        return float(np.sum(0.5 * (surv[1:] + surv[:-1]) * np.diff(xs)))

    def mean(self) -> float:
        v, F = self._v, self._F
        surv = 1.0 - F
        return self.V + float(np.sum(0.5 * (surv[1:] + surv[:-1]) * np.diff(v)))

    def pdf_slope_at_lower(self) -> float:
        return 0.0


def make_distribution(family: str, V: float = 2.0, k: float = 1.0,
                      knots: Sequence[Sequence[float]] | None = None) -> ValueDistribution:
    """Build a prior from a family tag."""
    if family == "uniform":
        return Uniform(V=V)
    if family == "tiltedexp":
        return TiltedExponential(k=k, V=V)
    if family == "pwl":
        if knots is None:
            raise DomainError("pwl family requires knots")
        return PiecewiseLinearCdf(knots=tuple(tuple(p) for p in knots))
    raise DomainError(f"unknown distribution family {family!r}")
