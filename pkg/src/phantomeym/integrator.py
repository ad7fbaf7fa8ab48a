"""Adaptive DOP853 integration with dense output, events and termination latches."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from phantomeym import kernels
from phantomeym.errors import DomainError, IntegrationFailure
from phantomeym.model import OrbitState


class Termination(enum.Enum):
    REACHED_RHO_MAX = "ReachedRhoMax"
    COLLAPSED = "Collapsed"
    BLOW_UP = "BlowUp"
    ESCAPED_LATCH = "EscapedLatch"

    @property
    def singular(self) -> bool:
        return self in (Termination.COLLAPSED, Termination.BLOW_UP)


class EventKind(enum.IntEnum):
    W_ZERO = kernels.EV_W_ZERO
    N_ZERO = kernels.EV_N_ZERO
    W_EXIT = kernels.EV_W_EXIT  # |w| - 1 changes sign
    N_PLUS_ZETA = kernels.EV_N_PLUS_ZETA


@dataclass(frozen=True)
class Event:
    rho: float
    kind: EventKind
    direction: int  # sign of the event function just after the crossing


@dataclass(frozen=True)
class IntegrationControls:
    """Tolerances, horizon and latches for :func:`integrate`.

    ``n_floor`` only triggers a blow-up stop once ``N + zeta < 0`` as well, the
    region from which no orbit returns. ``escape_latch=False`` disables the
    ``|w| >= 1 + exit_band`` stop so an escaping orbit runs into its
    singularity.
    """

    rtol: float = 1e-12
    atol: float = 1e-12
    rho_max: float = 50.0
    r_floor: float = 1e-8
    n_floor: float = -10.0
    h_min: float = 1e-14
    exit_band: float = 0.05
    escape_latch: bool = True
    max_steps: int = 2_000_000

    def __post_init__(self):
        for name in ("rtol", "atol", "rho_max", "r_floor", "h_min"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v}")
        if not (math.isfinite(self.n_floor) and self.n_floor < 0):
            raise DomainError(f"n_floor must be negative, got {self.n_floor}")
        if not 0 < self.exit_band <= 0.5:
            raise DomainError(f"exit_band must lie in (0, 0.5], got {self.exit_band}")
        if self.max_steps < 1:
            raise DomainError("max_steps must be positive")

    @property
    def tol(self) -> float:
        return max(self.rtol, self.atol)

    def with_(self, **changes) -> IntegrationControls:
        fields_ = dict(self.__dict__)
        fields_.update(changes)
        return IntegrationControls(**fields_)


_STATUS = {
    kernels.REACHED: Termination.REACHED_RHO_MAX,
    kernels.COLLAPSED: Termination.COLLAPSED,
    kernels.BLOWUP: Termination.BLOW_UP,
    kernels.UNDERFLOW: Termination.BLOW_UP,
    kernels.ESCAPED: Termination.ESCAPED_LATCH,
}


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Immutable record of one forward integration.

    ``rho`` and ``states`` hold the accepted nodes, ``dense[i]`` the continuous
    extension coefficients of step ``i``. ``underflow`` distinguishes a
    step-size blow-up from an ``n_floor`` one.
    """

    rho: np.ndarray
    states: np.ndarray
    dense: np.ndarray
    events: tuple
    termination: Termination
    controls: IntegrationControls
    underflow: bool = False
    n_rejected: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("rho", "states", "dense"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def rho_start(self) -> float:
        return float(self.rho[0])

    @property
    def rho_end(self) -> float:
        return float(self.rho[-1])

    @property
    def final(self) -> OrbitState:
        return OrbitState.from_array(self.rho[-1], self.states[-1])

    @property
    def initial(self) -> OrbitState:
        return OrbitState.from_array(self.rho[0], self.states[0])

    def column(self, name: str) -> np.ndarray:
        from phantomeym.model import STATE_FIELDS

        return self.states[:, STATE_FIELDS.index(name)]

    def events_of(self, kind: EventKind) -> list:
        return [e for e in self.events if e.kind == kind]

    def _check_span(self, q):
        lo, hi = self.rho[0], self.rho[-1]
        if np.any(~np.isfinite(q)) or np.any(q < lo) or np.any(q > hi):
            raise DomainError(f"rho outside trajectory span [{lo}, {hi}]")

    def sample_many(self, rho) -> np.ndarray:
        """States at each ``rho`` as an ``(m, 6)`` array."""
        q = np.atleast_1d(np.asarray(rho, dtype=float))
        self._check_span(q)
        if len(self.rho) == 1:
            return np.repeat(self.states[:1], len(q), axis=0)
        return kernels.sample_kernel(self.rho, self.states, self.dense, q)

    def derivative_many(self, rho) -> np.ndarray:
        """Derivative of the continuous extension (not of the vector field)."""
        q = np.atleast_1d(np.asarray(rho, dtype=float))
        self._check_span(q)
        return kernels.sample_derivative_kernel(self.rho, self.states, self.dense, q)

    def sample(self, rho: float) -> OrbitState:
        return OrbitState.from_array(rho, self.sample_many([rho])[0])

    def constraint_residuals(self) -> np.ndarray:
        if "constraint" not in self._cache:
            self._cache["constraint"] = np.array([kernels.constraint(y) for y in self.states])
        return self._cache["constraint"]

    def constraint_bound(self) -> float:
        """Allowed drift ``100 tol (1 + max |state|)``."""
        return 100.0 * self.controls.tol * (1.0 + float(np.max(np.abs(self.states))))


def integrate(state0: OrbitState, controls: IntegrationControls | None = None) -> Trajectory:
    """Integrate forward from ``state0`` to ``state0.rho + controls.rho_max``.

    Stops early on collapse (``r < r_floor``), blow-up (``N < n_floor`` inside
    ``N + zeta < 0``, or step underflow) and the escape latch. Raises
    :class:`IntegrationFailure` on non-finite states or an exhausted step
    budget, carrying the nodes computed so far.
    """
    controls = controls or IntegrationControls()
    y0 = state0.as_array()
    if not (np.all(np.isfinite(y0)) and math.isfinite(state0.rho)):
        raise DomainError(f"non-finite initial state {state0}")
    if y0[0] <= 0:
        raise DomainError(f"r must be positive, got {y0[0]}")
    exit_band = controls.exit_band if controls.escape_latch else math.inf
    rho, Y, Fs, ev_rho, ev_kind, ev_dir, status, n_rej = kernels.integrate_kernel(
        y0,
        controls.rho_max,
        controls.rtol,
        controls.atol,
        controls.r_floor,
        controls.n_floor,
        controls.h_min,
        exit_band,
        controls.max_steps,
    )
    shift = state0.rho
    events = tuple(
        Event(float(r + shift), EventKind(int(k)), int(d)) for r, k, d in zip(ev_rho, ev_kind, ev_dir)
    )
    status = int(status)
    term = _STATUS.get(status, Termination.BLOW_UP)
    traj = Trajectory(rho + shift, Y, Fs, events, term, controls, status == kernels.UNDERFLOW, int(n_rej))
    if status == kernels.NONFINITE:
        raise IntegrationFailure("non-finite state during integration", traj)
    if status == kernels.MAXSTEPS:
        raise IntegrationFailure(f"step budget {controls.max_steps} exhausted at rho={traj.rho_end}", traj)
    return traj


@dataclass(frozen=True)
class BoundViolation:
    rho: float
    name: str
    excess: float


def bound_violations(traj: Trajectory, E0: float, tol: float | None = None) -> list:
    """Check ``kappa >= tanh``, ``N <= tanh``, ``0 <= zeta <= sqrt(E0) sech`` and
    ``kappa + N <= 2 + sqrt(E0) sech`` at every node; returns the violations.

    Assumes the trajectory starts at ``rho = 0`` with ``N = kappa = 0``.
    """
    tol = 100.0 * traj.controls.tol if tol is None else tol
    rho = traj.rho
    t = np.tanh(rho)
    sech = 1.0 / np.cosh(rho)
    s = math.sqrt(max(E0, 0.0))
    N, kap, zeta = traj.states[:, 1], traj.states[:, 4], traj.states[:, 5]
    checks = {
        "kappa>=tanh": t - kap,
        "N<=tanh": N - t,
        "zeta>=0": -zeta,
        "zeta<=sqrtE0*sech": zeta - s * sech,
        "kappa+N<=2+sqrtE0*sech": kap + N - 2.0 - s * sech,
    }
    out = []
    for name, excess in checks.items():
        bad = np.nonzero(excess > tol)[0]
        out.extend(BoundViolation(float(rho[i]), name, float(excess[i])) for i in bad)
    return out
