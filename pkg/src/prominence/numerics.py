"""Quadrature, bracketed root finding and golden-section search.

All integrators take vectorised integrands (accepting and returning numpy
arrays) and a list of breakpoints at which the integrand may be non-smooth.
"""
from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

from .errors import NumericalError

ArrayFn = Callable[[np.ndarray], np.ndarray]

_GL16 = np.polynomial.legendre.leggauss(16)
_GL32 = np.polynomial.legendre.leggauss(32)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def split_points(a: float, b: float, breakpoints: Iterable[float] = ()) -> list[float]:
    """Sorted unique points ``a = s_0 < ... < s_k = b`` including breakpoints inside (a, b)."""
    inner = sorted({float(p) for p in breakpoints if a < p < b})
    pts = [a]
    for p in inner:
        if p - pts[-1] > 1e-15:
            pts.append(p)
    if b - pts[-1] > 1e-15:
        pts.append(b)
    elif len(pts) > 1:
        pts[-1] = b
    else:
        pts.append(b)
    return pts


def _gl(fn: ArrayFn, a: float, b: float, rule) -> float:
    nodes, weights = rule
    half = 0.5 * (b - a)
    x = half * nodes + 0.5 * (a + b)
    return half * float(np.dot(weights, fn(x)))


def gauss_legendre(fn: ArrayFn, a: float, b: float, breakpoints: Iterable[float] = (),
                   tol: float = 1e-12, max_depth: int = 30) -> float:
    """Composite adaptive Gauss-Legendre quadrature of ``fn`` over [a, b].

    Each smooth piece is integrated with 16- and 32-point rules; pieces whose
    two estimates differ by more than their share of ``tol`` are bisected.
    """
    if b <= a:
        return 0.0
    total_width = b - a
    pts = split_points(a, b, breakpoints)
    result = 0.0
    stack = [(lo, hi, 0) for lo, hi in zip(pts[:-1], pts[1:])]
    while stack:
        lo, hi, depth = stack.pop()
        coarse = _gl(fn, lo, hi, _GL16)
        fine = _gl(fn, lo, hi, _GL32)
        share = tol * (hi - lo) / total_width
        if abs(fine - coarse) <= max(share, 1e-15) or depth >= max_depth:
            if depth >= max_depth and abs(fine - coarse) > 1e3 * max(share, 1e-15):
                raise NumericalError(f"quadrature did not converge on [{lo}, {hi}]")
            result += fine
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    return result


def adaptive_simpson(fn: ArrayFn, a: float, b: float, breakpoints: Iterable[float] = (),
                     tol: float = 1e-9, max_levels: int = 40) -> float:
    """Adaptive Simpson quadrature with Richardson correction.

    Panels are refined level by level so that every level is a single
    vectorised call to ``fn``. A panel is accepted once
    ``|S(left) + S(right) - S(whole)| <= 15 * tol * width / (b - a)``.
    """
    if b <= a:
        return 0.0
    pts = np.asarray(split_points(a, b, breakpoints))
    lo, hi = pts[:-1], pts[1:]
    total_width = b - a
    mid = 0.5 * (lo + hi)
    f_lo, f_mid, f_hi = fn(lo), fn(mid), fn(hi)
    whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
    result = 0.0
    for _ in range(max_levels):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        f_lm, f_rm = fn(lm), fn(rm)
        left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid)
        right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi)
        err = left + right - whole
        done = np.abs(err) <= 15.0 * tol * (hi - lo) / total_width
        result += float(np.sum((left + right + err / 15.0)[done]))
        keep = ~done
        if not keep.any():
            return result
        # children of unfinished panels become the next level
        lo = np.concatenate([lo[keep], mid[keep]])
        hi_new = np.concatenate([mid[keep], hi[keep]])
        new_mid = np.concatenate([lm[keep], rm[keep]])
        f_lo_new = np.concatenate([f_lo[keep], f_mid[keep]])
        f_hi_new = np.concatenate([f_mid[keep], f_hi[keep]])
        f_mid = np.concatenate([f_lm[keep], f_rm[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        hi, mid, f_lo, f_hi = hi_new, new_mid, f_lo_new, f_hi_new
    raise NumericalError("adaptive Simpson exceeded its refinement budget")


def integrate(fn: ArrayFn, a: float, b: float, breakpoints: Iterable[float] = (),
              method: str = "gauss", tol: float | None = None) -> float:
    """Integrate ``fn`` over [a, b] (zero when b <= a)."""
    if method == "gauss":
        return gauss_legendre(fn, a, b, breakpoints, tol=1e-12 if tol is None else tol)
    if method == "simpson":
        return adaptive_simpson(fn, a, b, breakpoints, tol=1e-9 if tol is None else tol)
    raise ValueError(f"unknown quadrature method {method!r}")


def find_root(fn: Callable[[float], float], lo: float, hi: float,
              xtol: float = 1e-12, max_iter: int = 500) -> float:
    """Root of a continuous function bracketed by [lo, hi].

    Illinois-modified regula falsi, falling back to a bisection step whenever
    the bracket fails to shrink by half.
    """
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise NumericalError(f"root not bracketed on [{lo}, {hi}]")
    side = 0
    for _ in range(max_iter):
        width = hi - lo
        if width <= xtol:
            break
        x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = fn(x)
        if fx == 0.0:
            return x
        if np.sign(fx) == np.sign(f_hi):
            hi, f_hi = x, fx
            if side == 1:
                f_lo *= 0.5
            side = 1
        else:
            lo, f_lo = x, fx
            if side == -1:
                f_hi *= 0.5
            side = -1
        if hi - lo > 0.5 * width:
            m = 0.5 * (lo + hi)
            fm = fn(m)
            if fm == 0.0:
                return m
            if np.sign(fm) == np.sign(f_hi):
                hi, f_hi = m, fm
            else:
                lo, f_lo = m, fm
            side = 0
    else:
        raise NumericalError("root finder did not converge")
    return 0.5 * (lo + hi)


def golden_section_max(fn: Callable[[float], float], a: float, b: float,
                       xtol: float = 1e-8) -> tuple[float, float]:
    """Maximise a unimodal ``fn`` on [a, b]; returns ``(x, fn(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def grid_then_refine(fn: Callable[[float], float], lo: float, hi: float, n: int = 2000,
                     maximize: bool = True, xtol: float = 1e-8,
                     include_ends: bool = False) -> tuple[float, float]:
    """Global extremum of a piecewise-smooth ``fn`` on [lo, hi].

    The extremum over an ``n``-point grid is bracketed by its neighbours and
    polished with golden-section search. Non-finite values are treated as
    infeasible. Returns ``(x, value)``; value is ``-inf``/``inf`` when no grid
    point is feasible.
    """
    sign = 1.0 if maximize else -1.0
    grid = np.linspace(lo, hi, n if include_ends else n + 2)
    if not include_ends:
        grid = grid[1:-1]
    vals = np.array([fn(float(x)) for x in grid], dtype=float)
    scored = np.where(np.isfinite(vals), sign * vals, -np.inf)
    i = int(np.argmax(scored))
    if not np.isfinite(scored[i]):
        return float("nan"), -sign * float("inf")
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, len(grid) - 1)])

    def signed(x: float) -> float:
        v = fn(x)
        return sign * v if np.isfinite(v) else -np.inf

    x_ref, v_ref = golden_section_max(signed, a, b, xtol=xtol)
    if v_ref >= scored[i]:
        return x_ref, sign * v_ref
    return float(grid[i]), float(vals[i])


def one_sided_limit(fn: Callable[[float], float], x0: float, direction: float,
                    h: float = 1e-4) -> float:
    """Linear extrapolation of ``fn`` to ``x0`` from one side (direction +1 or -1)."""
    f1 = fn(x0 + direction * h)
    f2 = fn(x0 + 2.0 * direction * h)
    return 2.0 * f1 - f2


def central_difference(fn: Callable[[float], float], x: float, h: float = 1e-5) -> float:
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def forward_derivative(fn: Callable[[float], float], x: float, h: float = 1e-6) -> float:
    """Second-order one-sided (forward) first derivative."""
    return (-3.0 * fn(x) + 4.0 * fn(x + h) - fn(x + 2.0 * h)) / (2.0 * h)
