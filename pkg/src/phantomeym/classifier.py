"""Orbit classification: Escaping(n), Crashing, Oscillatory, Regular(n), Unresolved."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from phantomeym.errors import DomainError, IntegrationFailure
from phantomeym.integrator import EventKind, IntegrationControls, Termination, Trajectory, integrate
from phantomeym.model import InitialData, OrbitState, energies, initial_state


class OrbitKind(enum.Enum):
    ESCAPING = "Escaping"
    CRASHING = "Crashing"
    OSCILLATORY = "Oscillatory"
    REGULAR = "Regular"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class ClassifyPolicy:
    """Discriminant threshold and horizon growth for undecided orbits.

    ``shadow_eps`` bounds ``|1-w^2|`` and ``|rU|`` on the stretch where an
    orbit is considered to follow a regular one. Regular orbits repel their
    neighbours like ``e^{2 rho}`` while being approached like ``e^{-rho}``,
    so a datum ``d`` away from one gets no closer than about ``d^{1/3}``;
    ``1e-3`` therefore flags data within roughly ``1e-9`` of a regular datum.
    """

    eps: float = 1e-4
    growth: float = 2.0
    cap: float = 400.0
    shadow_eps: float = 1e-3

    def __post_init__(self):
        if not (self.eps > 0 and self.growth > 1 and self.cap > 0 and self.shadow_eps > 0):
            raise DomainError(f"invalid classify policy {self}")


@dataclass(frozen=True)
class ShadowWindow:
    """Stretch where the orbit sits near ``|w| = 1, w' = 0``, i.e. follows a regular one."""

    rho_start: float
    rho_end: float
    rho_best: float
    best: float  # min of max(|1-w^2|, |rU|) over the window
    zeros: int = 0  # zeros of w before rho_best


@dataclass(frozen=True)
class Diagnostics:
    rho_end: float
    final: OrbitState
    termination: Termination | None
    zero_count: int
    winding_count: int
    F_end: float
    potential_end: float  # (1 - w^2)^2
    monotone_w: bool
    left_strip: bool
    entered_singular_region: bool
    shadow: ShadowWindow | None = None
    asymptote: str | None = None  # "flat" or "cylindrical" for oscillatory orbits


@dataclass(frozen=True)
class OrbitClass:
    kind: OrbitKind
    n: int | None = None
    reason: str | None = None
    diagnostics: Diagnostics | None = None
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    @property
    def zeros(self) -> int | None:
        if self.n is not None:
            return self.n
        return None if self.diagnostics is None else self.diagnostics.zero_count

    @property
    def label(self) -> str:
        if self.kind in (OrbitKind.ESCAPING, OrbitKind.REGULAR):
            return f"{self.kind.value}({self.n})"
        return self.kind.value

    def __str__(self):
        return self.label

    def is_(self, kind: OrbitKind, n: int | None = None) -> bool:
        return self.kind is kind and (n is None or self.n == n)

    def to_dict(self) -> dict:
        d = self.diagnostics
        out = {"class": self.label, "kind": self.kind.value, "n": self.n, "reason": self.reason}
        if d is not None:
            out.update(
                zeros=d.zero_count,
                winding=d.winding_count,
                rho_end=d.rho_end,
                termination=d.termination.value if d.termination else None,
                monotone_w=d.monotone_w,
                F_end=d.F_end,
                potential_end=d.potential_end,
                asymptote=d.asymptote,
            )
        return out


def _theta(traj: Trajectory, subdivide: int = 8):
    """Unwrapped polar angle of ``(w, w')`` on a refinement of the node grid."""
    rho = traj.rho
    if len(rho) > 1:
        frac = np.arange(subdivide) / subdivide
        grid = (rho[:-1, None] + frac[None, :] * np.diff(rho)[:, None]).ravel()
        grid = np.append(grid, rho[-1])
        Y = traj.sample_many(grid)
    else:
        Y = traj.states
    w = Y[:, 2]
    wdot = Y[:, 0] * Y[:, 3]
    theta = np.unwrap(np.arctan2(wdot, w))
    if theta[0] > 0:
        theta -= 2 * math.pi
    return theta


def count_w_zeros(traj: Trajectory) -> tuple[int, int]:
    """Zeros of ``w`` for ``rho > rho_start``: ``(from events, from winding)``.

    The winding count uses the polar angle of ``(w, w')`` started in
    ``(-2 pi, 0]``; each zero of ``w`` is a downward crossing of a level
    ``pi/2 + j pi``.
    """
    w = traj.column("w")
    U = traj.column("U")
    if not np.any(w) and not np.any(U):
        return 0, 0
    events = sum(1 for e in traj.events if e.kind is EventKind.W_ZERO and e.rho > traj.rho_start)
    theta = _theta(traj)
    b = (theta[0] - math.pi / 2) / math.pi
    if w[0] == 0.0:
        b = round(b)
    a = (theta[-1] - math.pi / 2) / math.pi
    winding = max(0, math.ceil(b) - math.floor(a) - 1)
    return events, winding


def _monotone(U) -> bool:
    s = np.sign(U[np.abs(U) > 0])
    return bool(s.size == 0 or np.all(s == s[0]))


def shadow_window(traj: Trajectory, eps: float) -> ShadowWindow | None:
    """Last stretch of nodes with ``max(|1-w^2|, |rU|) <= eps`` and ``|w| <= 1``."""
    Y = traj.states
    score = np.maximum(np.abs(1.0 - Y[:, 2] ** 2), np.abs(Y[:, 0] * Y[:, 3]))
    good = (score <= eps) & (np.abs(Y[:, 2]) <= 1.0)
    idx = np.nonzero(good)[0]
    if idx.size == 0:
        return None
    hi = lo = int(idx[-1])
    while lo > 0 and good[lo - 1]:
        lo -= 1
    i = lo + int(np.argmin(score[lo : hi + 1]))
    rho = traj.rho
    zeros = sum(1 for e in traj.events if e.kind is EventKind.W_ZERO and traj.rho_start < e.rho < rho[i])
    return ShadowWindow(float(rho[lo]), float(rho[hi]), float(rho[i]), float(score[i]), zeros)


def diagnose(traj: Trajectory, policy: ClassifyPolicy) -> Diagnostics:
    fin = traj.final
    events, winding = count_w_zeros(traj)
    left = any(e.kind is EventKind.W_EXIT and e.direction > 0 for e in traj.events)
    singular = any(e.kind is EventKind.N_PLUS_ZETA and e.direction < 0 for e in traj.events)
    return Diagnostics(
        rho_end=traj.rho_end,
        final=fin,
        termination=traj.termination,
        zero_count=events,
        winding_count=winding,
        F_end=energies(fin).F,
        potential_end=(1.0 - fin.w**2) ** 2,
        monotone_w=_monotone(traj.column("U")[1:]),
        left_strip=left,
        entered_singular_region=singular or fin.N + fin.zeta < 0,
        shadow=shadow_window(traj, policy.shadow_eps),
    )


def classify_trajectory(traj: Trajectory, policy: ClassifyPolicy) -> OrbitClass | None:
    """Class of a finished trajectory, or ``None`` when the horizon was too short."""
    d = diagnose(traj, policy)
    fin = d.final
    n = d.zero_count
    term = traj.termination
    if term is Termination.ESCAPED_LATCH:
        return OrbitClass(OrbitKind.ESCAPING, n, diagnostics=d, trajectory=traj)
    if term.singular:
        escaped = abs(fin.w) > 1.0 and fin.w * fin.U > 0.0
        if escaped or d.left_strip and abs(fin.w) > 1.0:
            return OrbitClass(OrbitKind.ESCAPING, n, diagnostics=d, trajectory=traj)
        return OrbitClass(OrbitKind.CRASHING, diagnostics=d, trajectory=traj)
    wdot = fin.r * fin.U
    if d.potential_end <= policy.eps and abs(wdot) <= policy.eps:
        return OrbitClass(OrbitKind.REGULAR, n, diagnostics=d, trajectory=traj)
    if fin.w**2 + wdot**2 <= policy.eps:
        w_max = float(np.max(np.abs(traj.column("w"))))
        flat = w_max == 0.0 and traj.states[0, 0] > 1.0
        d = _with(d, asymptote="flat" if flat else "cylindrical")
        return OrbitClass(OrbitKind.OSCILLATORY, diagnostics=d, trajectory=traj)
    return None


def _with(d: Diagnostics, **changes) -> Diagnostics:
    fields_ = dict(d.__dict__)
    fields_.update(changes)
    return Diagnostics(**fields_)


def classify(
    data: InitialData,
    controls: IntegrationControls | None = None,
    policy: ClassifyPolicy | None = None,
) -> OrbitClass:
    """Integrate ``data`` forward and return its orbit class.

    A trajectory that reaches the horizon undecided is re-run with the
    horizon multiplied by ``policy.growth`` until ``policy.cap``; past that it
    is ``Unresolved`` with its zero count so far in the diagnostics.
    """
    controls = controls or IntegrationControls()
    policy = policy or ClassifyPolicy()
    state0 = initial_state(data)
    rho_max = controls.rho_max
    while True:
        c = controls.with_(rho_max=rho_max)
        try:
            traj = integrate(state0, c)
        except IntegrationFailure as exc:
            d = diagnose(exc.trajectory, policy) if exc.trajectory is not None and len(exc.trajectory.rho) > 1 else None
            return OrbitClass(OrbitKind.UNRESOLVED, reason=str(exc), diagnostics=d, trajectory=exc.trajectory)
        result = classify_trajectory(traj, policy)
        if result is not None:
            return result
        if rho_max >= policy.cap:
            d = diagnose(traj, policy)
            return OrbitClass(
                OrbitKind.UNRESOLVED,
                reason=f"undecided at rho={traj.rho_end:g} with {d.zero_count} zeros",
                diagnostics=d,
                trajectory=traj,
            )
        rho_max = min(rho_max * policy.growth, policy.cap)
