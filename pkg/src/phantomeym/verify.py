"""Quick oracle and invariant checks behind ``phantomeym verify``."""

from __future__ import annotations

import numpy as np

from phantomeym import kernels
from phantomeym.classifier import OrbitKind, classify
from phantomeym.integrator import IntegrationControls, integrate, bound_violations
from phantomeym.model import InitialData, initial_state, second_order_residuals
from phantomeym.oracle import OracleKind, oracle_states
from phantomeym.shooting import Axis, find_sequence
from phantomeym.wormhole import build


def _oracle_error(kind: OracleKind, rho_max=10.0):
    traj = integrate(initial_state(kind.data), IntegrationControls(rho_max=rho_max))
    exact = oracle_states(kind, traj.rho)
    scale = np.maximum(np.abs(exact), 1.0)
    return float(np.max(np.abs(traj.states - exact) / scale))


def _random_data(rng, count):
    out = []
    while len(out) < count:
        d = InitialData(float(rng.uniform(0.2, 3.0)), float(rng.uniform(-1, 1)), float(rng.uniform(-3, 3)))
        if d.admissible:
            out.append(d)
    return out


def _check_oracles():
    worst = max(
        [_oracle_error(OracleKind.ellis_bronnikov(r0)) for r0 in (0.3, 1.0, 2.0)]
        + [_oracle_error(OracleKind.abelian(r0)) for r0 in (1.0, 1.5, 3.0)]
    )
    return worst <= 1e-8, f"max relative error {worst:.3e}"


def _check_sweep():
    rng = np.random.default_rng(7)
    bad = []
    for d in _random_data(rng, 20):
        traj = integrate(initial_state(d))
        if np.max(np.abs(traj.constraint_residuals())) > traj.constraint_bound():
            bad.append(("constraint", d))
        if bound_violations(traj, d.E0, 1e-9):
            bad.append(("bounds", d))
    return not bad, f"{len(bad)} violations in 20 random orbits"


def _check_energy_brackets():
    crash = classify(InitialData(0.75, 0.5, 0.0)).kind is OrbitKind.CRASHING
    esc = all(
        (c := classify(InitialData(r0, 0.0, 1e3))).is_(OrbitKind.ESCAPING, 0) and c.diagnostics.monotone_w
        for r0 in (0.5, 0.75, 2.0)
    )
    return crash and esc, f"crashing={crash}, monotone escape={esc}"


def backward_rk4(y0, s_max, h):
    """Classical RK4 for ``dy/ds = -rhs(y)``, i.e. the orbit at ``rho = -s``."""
    n = max(1, int(round(s_max / h)))
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    for _ in range(n):
        k1 = -kernels.rhs(y)
        k2 = -kernels.rhs(y + 0.5 * h * k1)
        k3 = -kernels.rhs(y + 0.5 * h * k2)
        k4 = -kernels.rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y.copy())
    return h * np.arange(n + 1), np.array(out)


def backward_rk4_at(y0, s_points, h_max=2.5e-4):
    """Backward orbit at the increasing points ``s_points`` (starting at 0),
    landing on each one exactly with substeps no longer than ``h_max``."""
    s_points = np.asarray(s_points, dtype=float)
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    for a, b in zip(s_points[:-1], s_points[1:]):
        k = max(1, int(np.ceil((b - a) / h_max)))
        y = backward_rk4(y, b - a, (b - a) / k)[1][-1]
        out.append(y.copy())
    return np.array(out)


FLIP = np.array([1.0, -1.0, 1.0, -1.0, -1.0, 1.0])


def _check_symmetry():
    rng = np.random.default_rng(11)
    worst = 0.0
    for d in _random_data(rng, 5):
        traj = integrate(initial_state(d.mirrored()), IntegrationControls(rho_max=1.0))
        if traj.rho_end < 1.0:
            continue
        # compare at accepted steps; the dense interpolant is looser than tol
        back = backward_rk4_at(initial_state(d).as_array(), traj.rho, 1e-3)
        mirrored = traj.states * FLIP
        worst = max(worst, float(np.max(np.abs(mirrored - back) / np.maximum(1.0, np.abs(back)))))
    return worst <= 1e-10, f"max deviation {worst:.3e}"


def _check_build():
    seq = find_sequence(2.0, Axis.ODD, 0)
    sol = build(Axis.ODD.datum(2.0, seq[0].value), h=1e-3)
    res = second_order_residuals(sol.rho, sol.tau, sol.column("r"), sol.column("w")).max_abs()
    eb = build(InitialData(2.0, 1.0, 0.0))
    e = eb.ends["+"]
    ok = res <= 1e-6 and abs(e.alpha - 2.0) <= 1e-8 and abs(e.beta) <= 1e-8
    ok = ok and sol.n_forward == 0 and len(sol.throats) == 1
    return ok, f"residual {res:.3e}, EB alpha={e.alpha:.12g}, beta={e.beta:.3e}"


def _check_solution_file(path):
    cols = np.loadtxt(path, comments="#")
    rho, r, w, tau = cols[:, 0], cols[:, 1], cols[:, 3], cols[:, 7]
    res = second_order_residuals(rho, tau, r, w).max_abs()
    h = float(rho[1] - rho[0])
    bound = max(h * h, 1e-6)  # finite-difference budget O(h^2)
    return res <= bound, f"{path}: second-order residual {res:.3e} (bound {bound:.1e})"


CHECKS = [
    ("oracle equivalence", _check_oracles),
    ("constraint drift and bounds", _check_sweep),
    ("energy brackets", _check_energy_brackets),
    ("symmetry round trip", _check_symmetry),
    ("built solution", _check_build),
]


def run_checks(solution_file=None) -> list[dict]:
    checks = list(CHECKS)
    if solution_file:
        checks.append(("solution file", lambda: _check_solution_file(solution_file)))
    out = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append({"name": name, "passed": bool(ok), "detail": detail})
    return out

