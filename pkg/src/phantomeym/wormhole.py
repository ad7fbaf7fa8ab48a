"""Two-ended wormhole solutions assembled from forward orbits.

The backward half of the datum ``(r0, w0, U0)`` is the forward orbit of
``(r0, w0, -U0)`` read with ``rho -> -rho`` and ``(N, U, kappa)`` negated.
For even (``U0 = 0``) and odd (``w0 = 0``) data it is also the plain
reflection of the forward half.

Regular orbits repel their neighbours, so a shooting value only follows the
true regular orbit up to some finite radius. Each half is therefore cut at
the point where it is closest to ``|w| = 1, w' = 0`` (or where ``r`` reaches
``r_cap``), and the charges at infinity are extrapolated from there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from phantomeym import kernels
from phantomeym.classifier import ClassifyPolicy, OrbitClass, OrbitKind, classify, shadow_window
from phantomeym.errors import AsymptoticsUnconverged, BuildError, DomainError, PhantomFreeError
from phantomeym.integrator import EventKind, IntegrationControls, Trajectory
from phantomeym.model import InitialData

SQRT2 = math.sqrt(2.0)
ASYMPTOTICS_TOL = 1e-6

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

# parity of (r, N, w, U, kappa, zeta) under rho -> -rho
_TRANSFORM = np.array([1.0, -1.0, 1.0, -1.0, -1.0, 1.0])
_EVEN = np.array([1.0, -1.0, 1.0, -1.0, -1.0, 1.0])
_ODD = np.array([1.0, -1.0, -1.0, 1.0, -1.0, 1.0])


@dataclass(frozen=True, eq=False)
class Half:
    """One end of a wormhole: a forward trajectory cut at ``rho_cut``.

    ``parity`` maps the trajectory's states onto the solution at ``-rho``
    for the backward half and is all ones for the forward half.
    """

    trajectory: Trajectory
    orbit_class: OrbitClass
    rho_cut: float
    zeros: int
    parity: np.ndarray
    sign: int  # +1 forward, -1 backward

    def states_at(self, s) -> np.ndarray:
        """Solution states at ``rho = sign * s`` for ``s >= 0``."""
        return self.trajectory.sample_many(s) * self.parity


@dataclass(frozen=True)
class EndAsymptotics:
    alpha: float
    beta: float
    beta_integral: float
    m_infty: float
    tau_infty: float | None
    w_infty: int
    rho_cut: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Throat:
    rho: float
    kind: str  # "throat", "belly" or "degenerate"
    r: float
    Ndot: float


@dataclass(frozen=True, eq=False)
class WormholeSolution:
    data: InitialData
    rho: np.ndarray
    states: np.ndarray
    m: np.ndarray
    n_forward: int
    n_backward: int
    forward: Half = field(repr=False)
    backward: Half = field(repr=False)
    route: str
    tau: np.ndarray | None = None
    phi: np.ndarray | None = None
    pi0: float | None = None
    normalize_end: str = "+"
    phantom_factor: float = SQRT2
    ends: dict = field(default_factory=dict)
    throats: tuple = ()

    def __post_init__(self):
        for name in ("rho", "states", "m", "tau", "phi"):
            a = getattr(self, name)
            if a is not None:
                a = np.ascontiguousarray(a, dtype=float)
                a.flags.writeable = False
                object.__setattr__(self, name, a)

    def column(self, name: str) -> np.ndarray:
        from phantomeym.model import STATE_FIELDS

        if name in STATE_FIELDS:
            return self.states[:, STATE_FIELDS.index(name)]
        return getattr(self, name)

    def table(self) -> np.ndarray:
        """Columns ``rho r N w U kappa zeta tau phi m``."""
        nan = np.full_like(self.rho, np.nan)
        tau = self.tau if self.tau is not None else nan
        phi = self.phi if self.phi is not None else nan
        return np.column_stack([self.rho, self.states, tau, phi, self.m])

    def summary(self) -> dict:
        return {
            "r0": self.data.r0,
            "w0": self.data.w0,
            "U0": self.data.U0,
            "n_forward": self.n_forward,
            "n_backward": self.n_backward,
            "route": self.route,
            "pi0": self.pi0,
            "normalize_end": self.normalize_end,
            "phantom_factor": self.phantom_factor,
            "rho_min": float(self.rho[0]),
            "rho_max": float(self.rho[-1]),
            "ends": {k: v.to_dict() for k, v in self.ends.items()},
            "throats": [t.__dict__ for t in self.throats],
        }


def _cut_point(traj: Trajectory, rho_hint: float, r_cap: float) -> float:
    r = traj.column("r")
    over = np.nonzero(r >= r_cap)[0]
    cut = min(rho_hint, traj.rho_end)
    if over.size:
        cut = min(cut, float(traj.rho[over[0]]))
    return cut


def _make_half(c: OrbitClass, parity, sign, shadow_tol, r_cap) -> Half:
    traj = c.trajectory
    if c.kind is OrbitKind.REGULAR:
        n, hint = c.n, traj.rho_end
    elif c.kind is OrbitKind.OSCILLATORY and c.diagnostics.asymptote == "flat":
        n, hint = 0, traj.rho_end
    else:
        sh = shadow_window(traj, shadow_tol) if traj is not None else None
        if sh is None:
            raise BuildError(f"{'forward' if sign > 0 else 'backward'} half is {c.label}, not regular", c.label)
        n, hint = sh.zeros, sh.rho_best
    cut = _cut_point(traj, hint, r_cap)
    zeros = sum(1 for e in traj.events if e.kind is EventKind.W_ZERO and 0 < e.rho <= cut)
    if zeros != n:
        raise BuildError(f"zero count {zeros} before the cut disagrees with {n}", c.label)
    return Half(traj, c, cut, n, np.asarray(parity, dtype=float), sign)


def _quad_cumulative(traj: Trajectory, g, s):
    """``int_0^s g(state)`` at each ``s`` (sorted, within the span) by 8-point Gauss."""
    nodes = traj.rho
    s = np.asarray(s, dtype=float)
    a, b = nodes[:-1], nodes[1:]
    pts = (a[:, None] + (b - a)[:, None] * _GL_X[None, :]).ravel()
    vals = g(traj.sample_many(pts)).reshape(len(a), -1)
    steps = (vals * _GL_W[None, :]).sum(axis=1) * (b - a)
    cum = np.concatenate([[0.0], np.cumsum(steps)])
    j = np.clip(np.searchsorted(nodes, s, side="right") - 1, 0, len(nodes) - 2)
    lo = nodes[j]
    pts = (lo[:, None] + (s - lo)[:, None] * _GL_X[None, :]).ravel()
    part = (g(traj.sample_many(pts)).reshape(len(s), -1) * _GL_W[None, :]).sum(axis=1) * (s - lo)
    return cum[j] + part


def _zeta(Y):
    return Y[:, 5]


def mass_integrand(Y):
    """``dm/drho`` times two: ``N (2 r U^2 + (1-w^2)^2 / r - r zeta^2)``."""
    r, N, w, U, z = Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3], Y[:, 5]
    return N * (2.0 * r * U * U + (1.0 - w * w) ** 2 / r - r * z * z)


def _extrapolate(x, q):
    """Intercept of a quadratic least-squares fit of ``q`` against ``x = 1/r``."""
    deg = min(2, len(x) - 1)
    return float(np.polyfit(x, q, deg)[-1])


def _end_charges(half: Half, r0: float, tol: float):
    traj = half.trajectory
    cut = half.rho_cut
    sel = (traj.rho <= cut) & (traj.rho >= cut - math.log(10.0))
    s = traj.rho[sel]
    if s.size < 4:
        s = np.linspace(max(cut - math.log(10.0), 0.0), cut, 6)
    Y = traj.sample_many(s)
    r, N = Y[:, 0], Y[:, 1]
    x = 1.0 / r
    alpha = _extrapolate(x, r * Y[:, 5])
    beta = _extrapolate(x, r * (1.0 - N) * (1.0 + N))
    beta_int = _extrapolate(x, r0 + _quad_cumulative(traj, mass_integrand, s))
    if not abs(beta - beta_int) <= tol:
        raise AsymptoticsUnconverged(
            f"beta estimates disagree at the {'+' if half.sign > 0 else '-'} end: "
            f"{beta!r} vs {beta_int!r}; try a larger rho_max"
        )
    w_inf = int(np.rint(Y[-1, 2] * half.parity[2]))
    return alpha, beta, beta_int, w_inf


def asymptotics(solution: WormholeSolution, tol: float = ASYMPTOTICS_TOL) -> dict:
    """Per-end ``(alpha, beta, m_infty, tau_infty, w_infty)`` keyed ``"+"`` and ``"-"``.

    ``alpha = lim r zeta`` and ``beta = lim r (1 - N^2)`` are extrapolated in
    ``1/r`` over the last decade of ``r``; ``beta`` is checked against
    ``r0`` plus the integrated mass flux.
    """
    out = {}
    C = None if solution.pi0 is None else math.log(solution.pi0)
    for key, half in (("+", solution.forward), ("-", solution.backward)):
        alpha, beta, beta_int, w_inf = _end_charges(half, solution.data.r0, tol)
        tau_inf = None if C is None else C - math.log(alpha)
        out[key] = EndAsymptotics(alpha, beta, beta_int, 0.5 * beta, tau_inf, w_inf, half.rho_cut)
    return out


def metric_and_phantom(
    solution: WormholeSolution,
    normalize_end: str = "+",
    phantom_factor: float = SQRT2,
    tol: float = ASYMPTOTICS_TOL,
) -> WormholeSolution:
    """Fill in ``tau = C - log(r zeta)``, ``phi = factor * int_0^rho zeta`` and ``pi0 = e^C``.

    ``C`` makes ``tau`` vanish at the ``normalize_end`` (``"+"`` or ``"-"``).
    """
    if normalize_end not in ("+", "-"):
        raise DomainError(f"normalize_end must be '+' or '-', got {normalize_end!r}")
    if solution.data.E0 <= 0:
        raise PhantomFreeError("E0 = 0: zeta vanishes and does not determine tau")
    half = solution.forward if normalize_end == "+" else solution.backward
    alpha = _end_charges(half, solution.data.r0, tol)[0]
    C = math.log(alpha)
    r, z = solution.states[:, 0], solution.states[:, 5]
    tau = C - np.log(r * z)
    phi = np.empty_like(solution.rho)
    pos = solution.rho >= 0
    phi[pos] = _quad_cumulative(solution.forward.trajectory, _zeta, solution.rho[pos])
    neg = ~pos
    phi[neg] = -_quad_cumulative(solution.backward.trajectory, _zeta, -solution.rho[neg])
    sol = replace(
        solution,
        tau=tau,
        phi=phantom_factor * phi,
        pi0=math.exp(C),
        normalize_end=normalize_end,
        phantom_factor=phantom_factor,
    )
    return replace(sol, ends=asymptotics(sol, tol))


def throats_and_bellies(solution: WormholeSolution, tol: float = 1e-8) -> list[Throat]:
    """Zeros of ``N`` inside the built window, labelled by the sign of ``N'``."""
    found = [(0.0, solution.forward, 0.0)]
    for half in (solution.forward, solution.backward):
        for e in half.trajectory.events:
            if e.kind is EventKind.N_ZERO and 0 < e.rho <= half.rho_cut:
                found.append((half.sign * e.rho, half, e.rho))
    out = []
    for rho, half, s in sorted(found, key=lambda t: t[0]):
        y = half.states_at([s])[0]
        Ndot = float(kernels.rhs(y)[1])
        if abs(Ndot) <= tol * (1.0 + float(np.max(np.abs(y)))):
            kind = "degenerate"
        else:
            kind = "throat" if Ndot > 0 else "belly"
        out.append(Throat(float(rho), kind, float(y[0]), Ndot))
    return out


def _backward_route(data: InitialData, route: str) -> str:
    symmetric = data.U0 == 0.0 or data.w0 == 0.0
    if route == "auto":
        return "reflect" if symmetric else "transform"
    if route == "reflect" and not symmetric:
        raise DomainError("reflection needs U0 = 0 or w0 = 0")
    if route not in ("reflect", "transform"):
        raise DomainError(f"unknown backward route {route!r}")
    return route


def build(
    data: InitialData,
    controls: IntegrationControls | None = None,
    policy: ClassifyPolicy | None = None,
    h: float = 0.01,
    route: str = "auto",
    normalize_end: str = "+",
    phantom_factor: float = SQRT2,
    shadow_tol: float = 1e-2,
    r_cap: float = 1e6,
    asymptotics_tol: float = ASYMPTOTICS_TOL,
) -> WormholeSolution:
    """Assemble the two-ended solution of ``data`` on a uniform grid of step ``h``.

    Each half must be regular, a flat oscillatory (abelian) orbit, or follow
    a regular orbit to within ``shadow_tol``; otherwise :class:`BuildError`.
    """
    data.validate()
    if not h > 0:
        raise DomainError("h must be positive")
    route = _backward_route(data, route)
    fwd_class = classify(data, controls, policy)
    fwd = _make_half(fwd_class, np.ones(6), +1, shadow_tol, r_cap)
    if route == "reflect":
        parity = _EVEN if data.U0 == 0.0 else _ODD
        bwd = Half(fwd.trajectory, fwd_class, fwd.rho_cut, fwd.zeros, parity, -1)
    else:
        bwd_class = classify(data.mirrored(), controls, policy)
        bwd = _make_half(bwd_class, _TRANSFORM, -1, shadow_tol, r_cap)

    kf = int(math.floor(fwd.rho_cut / h + 1e-9))
    kb = int(math.floor(bwd.rho_cut / h + 1e-9))
    s_f = h * np.arange(kf + 1)
    s_b = h * np.arange(kb, 0, -1)
    rho = np.concatenate([-s_b, s_f])
    states = np.vstack([bwd.states_at(s_b), fwd.states_at(s_f)])
    r, N = states[:, 0], states[:, 1]
    m = 0.5 * r * (1.0 - N) * (1.0 + N)
    sol = WormholeSolution(data, rho, states, m, fwd.zeros, bwd.zeros, fwd, bwd, route)
    sol = metric_and_phantom(sol, normalize_end, phantom_factor, asymptotics_tol)
    return replace(sol, throats=tuple(throats_and_bellies(sol)))


def mass_flux_integral(solution: WormholeSolution) -> np.ndarray:
    """``int_0^rho N (2 r U^2 + (1-w^2)^2/r - r zeta^2)`` on the solution grid."""
    rho = solution.rho
    out = np.empty_like(rho)
    pos = rho >= 0
    out[pos] = _quad_cumulative(solution.forward.trajectory, mass_integrand, rho[pos])
    neg = ~pos
    # the backward trajectory runs in s = -rho with N reversed, so the flux
    # integral picks up two sign flips and keeps its form
    out[neg] = _quad_cumulative(solution.backward.trajectory, mass_integrand, -rho[neg])
    return out
