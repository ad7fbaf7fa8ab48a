"""Bisection shooting for the even (``U0 = 0``) and odd (``w0 = 0``) regular orbits.

Along either axis the parameter ``p`` grows towards orbits with fewer zeros:
large ``p`` escapes with ``n`` or fewer zeros, small ``p`` escapes with more
zeros, crashes, or oscillates. The regular orbit with ``n`` zeros sits on the
boundary between the two and is isolated by bisection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from phantomeym.classifier import ClassifyPolicy, OrbitClass, OrbitKind, classify
from phantomeym.errors import BracketError, DomainError
from phantomeym.integrator import IntegrationControls
from phantomeym.model import InitialData

DEFAULT_TOL = 1e-11


class Axis(enum.Enum):
    EVEN = "even"  # vary w0, U0 = 0
    ODD = "odd"  # vary U0, w0 = 0

    def datum(self, r0: float, p: float) -> InitialData:
        return InitialData(r0, p, 0.0) if self is Axis.EVEN else InitialData(r0, 0.0, p)


@dataclass(frozen=True)
class ShotResult:
    n: int
    value: float
    lo: float
    hi: float
    lo_class: OrbitClass
    hi_class: OrbitClass
    evidence: OrbitClass  # class of the bracket midpoint
    iterations: int = 0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "value": self.value,
            "lo": self.lo,
            "hi": self.hi,
            "lo_class": self.lo_class.label,
            "hi_class": self.hi_class.label,
            "midpoint_class": self.evidence.label,
            "iterations": self.iterations,
        }


def is_hi_side(c: OrbitClass, n: int) -> bool:
    """True when ``c`` lies on the few-zeros side of the ``n``-th regular orbit.

    Unresolved orbits are judged by the zeros they picked up before the cap.
    """
    if c.kind in (OrbitKind.ESCAPING, OrbitKind.REGULAR):
        return c.n <= n
    if c.kind is OrbitKind.UNRESOLVED:
        z = c.zeros
        return z is not None and z <= n
    return False


def bisect_boundary(
    evaluate: Callable[[float], OrbitClass],
    lo: float,
    hi: float,
    n: int,
    tol: float = DEFAULT_TOL,
    lo_class: OrbitClass | None = None,
    hi_class: OrbitClass | None = None,
) -> ShotResult:
    """Shrink ``[lo, hi]`` around the boundary of the hi side for ``n`` zeros.

    ``hi`` must be on the hi side and ``lo`` off it; both endpoints keep that
    property through every step.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    lo_class = lo_class or evaluate(lo)
    hi_class = hi_class or evaluate(hi)
    if not is_hi_side(hi_class, n) or is_hi_side(lo_class, n):
        raise BracketError(
            f"bracket [{lo!r}, {hi!r}] does not straddle the n={n} boundary "
            f"(lo: {lo_class.label}, hi: {hi_class.label})",
            lo_class.label,
            hi_class.label,
        )
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        c = evaluate(mid)
        if is_hi_side(c, n):
            hi, hi_class = mid, c
        else:
            lo, lo_class = mid, c
        it += 1
    if hi_class.is_(OrbitKind.REGULAR):
        # the endpoint is itself a regular orbit (the w = 1 anchor)
        return ShotResult(n, hi, lo, hi, lo_class, hi_class, hi_class, it)
    mid = 0.5 * (lo + hi)
    return ShotResult(n, mid, lo, hi, lo_class, hi_class, evaluate(mid), it)


def admissible_floor(datum, p: float) -> float:
    """Smallest float ``>= p`` whose datum is admissible (guards ``E0 = -1e-17``)."""
    for _ in range(64):
        if datum(p).admissible:
            return p
        p = math.nextafter(p, math.inf)
    raise DomainError(f"no admissible parameter near {p}")


def escape_anchor(evaluate, start: float = 1.0) -> float:
    """Double ``start`` until the orbit escapes with ``w`` monotone."""
    u = start
    for _ in range(61):
        c = evaluate(u)
        if c.is_(OrbitKind.ESCAPING) and c.n <= 1 and c.diagnostics.monotone_w:
            return u
        u *= 2.0
    raise BracketError(f"no monotone escape for U0 up to 2^60 (last: {c.label})", None, c.label)


def bracket_axis(
    r0: float,
    axis: Axis,
    controls: IntegrationControls | None = None,
    policy: ClassifyPolicy | None = None,
) -> tuple[float, float]:
    """``(p_min, p_max)``: the ``E0 = 0`` (or zero) end and the escaping end."""
    if not (math.isfinite(r0) and r0 > 0):
        raise DomainError(f"r0 must be positive, got {r0}")
    if axis is Axis.EVEN:
        return (math.sqrt(1.0 - r0) if r0 < 1 else 0.0), 1.0
    p_min = math.sqrt((1.0 / r0**2 - 1.0) / 2.0) if r0 < 1 else 0.0
    p_min = admissible_floor(lambda u: axis.datum(r0, u), p_min)
    return p_min, escape_anchor(lambda u: classify(axis.datum(r0, u), controls, policy))


class Ladder:
    """Regular-orbit parameters level by level along one line of data.

    ``datum(p)`` maps the parameter to initial data. Levels start at the zero
    count of the ``p_max`` orbit and are computed lazily; level ``k + 1`` is
    searched below level ``k``.
    """

    def __init__(self, datum, p_min, p_max, tol=DEFAULT_TOL, controls=None, policy=None):
        if tol < 1e-12:
            raise DomainError(f"tol below 1e-12 is not resolvable, got {tol}")
        self.datum = datum
        self.p_min = p_min
        self.p_max = p_max
        self.tol = tol
        self.controls = controls
        self.policy = policy
        self.lo_class = self.evaluate(p_min)
        self.top_class = self.evaluate(p_max)
        z = self.top_class.zeros
        self.first = 0 if z is None else z
        self.results: list[ShotResult] = []

    def evaluate(self, p) -> OrbitClass:
        return classify(self.datum(p), self.controls, self.policy)

    def level(self, n: int) -> ShotResult:
        if n < self.first:
            raise DomainError(f"level {n} below the first level {self.first} on this line")
        while self.first + len(self.results) <= n:
            k = self.first + len(self.results)
            if self.results:
                hi, hi_class = self.results[-1].lo, self.results[-1].lo_class
            else:
                hi, hi_class = self.p_max, self.top_class
            self.results.append(
                bisect_boundary(self.evaluate, self.p_min, hi, k, self.tol, self.lo_class, hi_class)
            )
        return self.results[n - self.first]


def find_sequence(
    r0: float,
    axis: Axis,
    n_max: int,
    tol: float = DEFAULT_TOL,
    controls: IntegrationControls | None = None,
    policy: ClassifyPolicy | None = None,
) -> list[ShotResult]:
    """Regular-orbit parameters for ``n = 0..n_max`` along ``axis``.

    Level ``n + 1`` is searched below level ``n``: its hi endpoint is the lo
    endpoint of the previous bracket, so the values decrease strictly.
    """
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    p_min, p_max = bracket_axis(r0, axis, controls, policy)
    ladder = Ladder(lambda p: axis.datum(r0, p), p_min, p_max, tol, controls, policy)
    return [ladder.level(n) for n in range(n_max + 1)]
