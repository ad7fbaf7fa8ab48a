import math

import numpy as np
import pytest

from phantomeym import (
    DomainError,
    InadmissibleDataError,
    InitialData,
    OracleKind,
    OrbitState,
    constraint_residual,
    energies,
    initial_state,
    oracle_states,
    rhs,
    second_order_residuals,
)
from phantomeym.model import STATE_FIELDS, energy


def hand_rhs(r, N, w, U, k, z):
    q = (1 - w * w) / r
    return np.array([r * N, 1 - q * q - k * N, r * U, -(k - N) * U - w * q, 1 + 2 * U * U - k * k, -k * z])


def test_state_roundtrip_and_immutability():
    y = np.array([1.5, 0.1, -0.2, 0.3, 0.4, 0.5])
    s = OrbitState.from_array(0.7, y)
    np.testing.assert_array_equal(s.as_array(), y)
    assert s.replace(w=0.9).w == 0.9 and s.w == -0.2
    with pytest.raises(Exception):
        s.r = 2.0
    assert STATE_FIELDS == ("r", "N", "w", "U", "kappa", "zeta")


def test_rhs_matches_hand_formula(rng):
    for _ in range(50):
        y = rng.uniform(-2, 2, 6)
        y[0] = abs(y[0]) + 0.1
        np.testing.assert_allclose(rhs(OrbitState.from_array(0.0, y)), hand_rhs(*y), rtol=1e-14, atol=1e-14)


def test_rhs_rejects_bad_states():
    with pytest.raises(DomainError):
        rhs(OrbitState(0.0, -1.0, 0, 0, 0, 0, 0))
    with pytest.raises(DomainError):
        rhs(OrbitState(0.0, 1.0, math.nan, 0, 0, 0, 0))


def test_energy_and_admissibility():
    assert energy(2.0, 1.0, 0.0) == 1.0
    d = InitialData(0.75, 0.5, 0.0)
    assert d.E0 == pytest.approx(0.0, abs=1e-15)
    assert InitialData(0.5, 0.0, 0.0).E0 == pytest.approx(-3.0)
    assert not InitialData(0.5, 0.0, 0.0).admissible
    assert not InitialData(1.0, 1.1, 0.0).admissible
    for bad in (InitialData(0.5, 0.0, 0.0), InitialData(-1, 0, 0), InitialData(1, math.inf, 0), InitialData(1, 1.5, 0)):
        with pytest.raises(InadmissibleDataError):
            bad.validate()
    assert InitialData(2.0, 0.3, -1.2).mirrored() == InitialData(2.0, 0.3, 1.2)


def test_initial_state_satisfies_constraint(rng):
    for _ in range(50):
        d = InitialData(rng.uniform(0.2, 3), rng.uniform(-1, 1), rng.uniform(-3, 3))
        if not d.admissible:
            continue
        s = initial_state(d)
        assert (s.rho, s.N, s.kappa) == (0.0, 0.0, 0.0)
        assert s.zeta == pytest.approx(math.sqrt(d.E0))
        assert abs(constraint_residual(s)) < 1e-13
        E, F = energies(s)
        assert E == pytest.approx(d.E0) and F == pytest.approx(d.r0**2 * (d.E0 - 1))


def test_second_order_residuals_on_closed_forms():
    h = 1e-3
    rho = np.arange(-2000, 2001) * h
    for kind in (OracleKind.ellis_bronnikov(1.3), OracleKind.abelian(1.5)):
        Y = oracle_states(kind, rho)
        r, w, z = Y[:, 0], Y[:, 2], Y[:, 5]
        tau = -np.log(r * z) + math.log(kind.r0 * math.sqrt(kind.E0))  # tau(0) = 0, pi0 = r0 sqrt(E0)
        res = second_order_residuals(rho, tau, r, w)
        assert res.max_abs() < 1e-7
        assert res.rho[0] == rho[2]


def test_second_order_residuals_detects_wrong_solution():
    rho = np.linspace(-1, 1, 201)
    r = 1.3 * np.cosh(rho)
    res = second_order_residuals(rho, np.zeros_like(rho), r, 0.9 * np.ones_like(rho))
    assert res.max_abs() > 1e-3


def test_second_order_residuals_validates_grid():
    rho = np.linspace(0, 1, 11)
    with pytest.raises(DomainError):
        second_order_residuals(rho**2, rho, rho + 1, rho)
    with pytest.raises(DomainError):
        second_order_residuals(rho[:4], rho[:4], rho[:4] + 1, rho[:4])
    with pytest.raises(DomainError):
        second_order_residuals(rho, rho, rho - 0.5, rho)
    with pytest.raises(DomainError):
        second_order_residuals(rho + 0.05, rho, rho + 1, rho)  # no rho = 0 for pi0
