"""Asymmetric wormhole data from the curves ``U~0^(n)(w0)`` at fixed ``r0 < 1``.

``U0^(n)(w0)`` is the regular-orbit value of ``U0`` with ``n`` forward zeros,
found by shooting upwards from the crashing ``E0 = 0`` datum. Data with
``w0 < 0`` and large ``U0`` already cross ``w = 0`` once, so the curves are
reindexed as ``U~^(n)(w0) = U0^(n + [w0 < 0])(w0)``.

The backward orbit of ``(w0, U0)`` is the forward orbit of ``(-w0, U0)`` with
``w`` negated, so an intersection ``U~^(n)(w0) = U~^(m-1)(-w0)`` at ``w0 > 0``
is a wormhole with ``n`` zeros for ``rho > 0`` and ``m`` for ``rho <= 0``.
Intersections at ``w0 < 0`` belong to the pair ``(n + 1, m - 1)`` instead.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from phantomeym.classifier import ClassifyPolicy
from phantomeym.errors import DomainError, PhantomEYMError
from phantomeym.integrator import IntegrationControls
from phantomeym.model import InitialData
from phantomeym.shooting import DEFAULT_TOL, Ladder, ShotResult, admissible_floor, escape_anchor

DEFAULT_GRID = 65
DEFAULT_PAIR_TOL = 1e-10


def u0_min(r0: float, w0: float) -> float:
    """``U0`` at which ``E0 = 0``."""
    return math.sqrt(max(0.0, ((1.0 - w0 * w0) ** 2 / r0**2 - 1.0) / 2.0))


def half_width(r0: float) -> float:
    return math.sqrt(1.0 - r0)


@dataclass(frozen=True)
class CurveSample:
    w0: float
    n: int
    value: float | None
    shot: ShotResult | None = field(default=None, repr=False)
    error: str | None = None


@dataclass(frozen=True)
class AsymPair:
    n: int
    m: int
    w0: float
    U0: float
    bracket: tuple
    forward_zeros: int | None = None
    backward_zeros: int | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "w0": self.w0,
            "U0": self.U0,
            "bracket": list(self.bracket),
            "forward_zeros": self.forward_zeros,
            "backward_zeros": self.backward_zeros,
        }


class CurveFamily:
    """Lazily computed ``U~^(n)(w0)`` for one ``r0``, cached per ``w0``.

    Safe to share between threads; each ``w0`` line is built once.
    """

    def __init__(self, r0, tol=DEFAULT_TOL, controls=None, policy=None):
        if not 0 < r0 < 1:
            raise DomainError(f"asymmetric search needs 0 < r0 < 1, got {r0}")
        self.r0 = float(r0)
        self.tol = tol
        self.controls = controls
        self.policy = policy
        self._ladders: dict[float, Ladder] = {}
        self._locks: dict[float, threading.Lock] = {}
        self._guard = threading.Lock()

    def _check(self, w0):
        if not (math.isfinite(w0) and w0 * w0 <= 1.0 - self.r0 + 1e-15):
            raise DomainError(f"w0={w0} outside [-sqrt(1-r0), sqrt(1-r0)]")

    def ladder(self, w0: float) -> Ladder:
        self._check(w0)
        w0 = float(w0)
        with self._guard:
            lock = self._locks.setdefault(w0, threading.Lock())
        with lock:
            if w0 not in self._ladders:
                r0 = self.r0

                def datum(u, w0=w0):
                    return InitialData(r0, w0, u)

                def evaluate(u):
                    from phantomeym.classifier import classify

                    return classify(datum(u), self.controls, self.policy)

                p_min = admissible_floor(datum, u0_min(r0, w0))
                p_max = escape_anchor(evaluate, max(1.0, 2.0 * p_min))
                self._ladders[w0] = Ladder(datum, p_min, p_max, self.tol, self.controls, self.policy)
            ladder = self._ladders[w0]
        return ladder

    def shot(self, n: int, w0: float) -> ShotResult:
        """Shooting record behind ``U~^(n)(w0)``."""
        ladder = self.ladder(w0)
        with self._locks[float(w0)]:
            return ladder.level(n + (1 if w0 < 0 else 0))

    def value(self, n: int, w0: float) -> float:
        return self.shot(n, w0).value

    def sample(self, n: int, w0: float) -> CurveSample:
        try:
            s = self.shot(n, w0)
            return CurveSample(float(w0), n, s.value, s)
        except PhantomEYMError as exc:
            return CurveSample(float(w0), n, None, error=str(exc))


def default_grid(r0: float, points: int = DEFAULT_GRID) -> np.ndarray:
    a = half_width(r0)
    g = np.linspace(-a, a, points)
    g[points // 2] = 0.0 if points % 2 else g[points // 2]
    return g


def _workers(workers):
    if workers is None:
        return min(8, os.cpu_count() or 1)
    return max(1, int(workers))


def _map(fn, items, workers):
    items = list(items)
    w = _workers(workers)
    if w == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))


def u0_curve(
    r0: float,
    n: int,
    grid=None,
    tol: float = DEFAULT_TOL,
    controls: IntegrationControls | None = None,
    policy: ClassifyPolicy | None = None,
    family: CurveFamily | None = None,
    workers: int | None = None,
) -> list[CurveSample]:
    """``U~^(n)`` sampled on ``grid`` (default: 65 points across the admissible strip).

    Failed points carry their error message instead of a value.
    """
    family = family or CurveFamily(r0, tol, controls, policy)
    grid = default_grid(r0) if grid is None else np.asarray(grid, dtype=float)
    for w0 in grid:
        family._check(float(w0))
    return _map(lambda w0: family.sample(n, float(w0)), grid, workers)


def _g(family, n, m, w0):
    return family.value(n, w0) - family.value(m - 1, -w0)


def find_asym_pairs(
    r0: float,
    n: int,
    m: int,
    tol: float = DEFAULT_PAIR_TOL,
    grid=None,
    shoot_tol: float = DEFAULT_TOL,
    controls: IntegrationControls | None = None,
    policy: ClassifyPolicy | None = None,
    family: CurveFamily | None = None,
    workers: int | None = None,
    verify: bool = True,
    diagnostics: list | None = None,
) -> list[AsymPair]:
    """Data ``(w0, U0)`` of wormholes with ``n`` forward and ``m`` backward zeros.

    Sign changes of ``g(w0) = U~^(n)(w0) - U~^(m-1)(-w0)`` on ``grid`` are
    located, each bracketing interval is split in three to separate close
    roots, and every root is refined by bisection to ``tol``. With
    ``verify`` each candidate is built and kept only if its zero counts are
    ``(n, m)``. Dropped candidates are appended to ``diagnostics``.
    """
    if not (0 <= n < m and m - n >= 2):
        raise DomainError(f"need 0 <= n < m with m - n >= 2, got (n, m) = ({n}, {m})")
    if not tol > 0:
        raise DomainError("tol must be positive")
    family = family or CurveFamily(r0, shoot_tol, controls, policy)
    grid = default_grid(r0) if grid is None else np.sort(np.asarray(grid, dtype=float))
    for w0 in grid:
        family._check(float(w0))
    diagnostics = diagnostics if diagnostics is not None else []

    def g_safe(w0):
        try:
            return _g(family, n, m, float(w0))
        except PhantomEYMError as exc:
            diagnostics.append(f"g({w0!r}) failed: {exc}")
            return math.nan

    # only w0 > 0 intersections carry (n, m)
    grid = grid[grid >= 0]
    vals = _map(g_safe, grid, workers)
    brackets = []
    for i in range(len(grid) - 1):
        a, b, ga, gb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if not (np.isfinite(ga) and np.isfinite(gb)) or (ga > 0) == (gb > 0):
            continue
        pts = np.linspace(a, b, 4)
        gs = [ga] + _map(g_safe, pts[1:3], workers) + [gb]
        for j in range(3):
            if np.isfinite(gs[j]) and np.isfinite(gs[j + 1]) and (gs[j] > 0) != (gs[j + 1] > 0):
                brackets.append((pts[j], pts[j + 1], gs[j]))

    def refine(br):
        lo, hi, glo = br
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            gm = g_safe(mid)
            if not np.isfinite(gm):
                return None
            if (gm > 0) == (glo > 0):
                lo, glo = mid, gm
            else:
                hi = mid
        w0 = 0.5 * (lo + hi)
        return AsymPair(n, m, float(w0), family.value(n, w0), (float(lo), float(hi)))

    pairs = [p for p in _map(refine, brackets, workers) if p is not None]
    if verify:
        from phantomeym.wormhole import build

        kept = []
        for p in pairs:
            try:
                sol = build(InitialData(r0, p.w0, p.U0), controls, policy)
            except PhantomEYMError as exc:
                diagnostics.append(f"pair at w0={p.w0!r} failed to build: {exc}")
                continue
            p = AsymPair(p.n, p.m, p.w0, p.U0, p.bracket, sol.n_forward, sol.n_backward)
            if (sol.n_forward, sol.n_backward) != (n, m):
                diagnostics.append(f"pair at w0={p.w0!r} built with zeros ({sol.n_forward}, {sol.n_backward})")
                continue
            kept.append(p)
        pairs = kept
    return sorted(pairs, key=lambda p: p.w0)
