import numpy as np
import pytest
from conftest import sequence

from phantomeym import (
    ClassifyPolicy,
    InadmissibleDataError,
    InitialData,
    IntegrationControls,
    OrbitKind,
    classify,
    count_w_zeros,
    initial_state,
    integrate,
)
from phantomeym.classifier import shadow_window


def test_ellis_bronnikov_is_regular():
    for r0 in (0.3, 1.0, 2.0):
        c = classify(InitialData(r0, 1.0, 0.0))
        assert c.is_(OrbitKind.REGULAR, 0), c.label
        assert c.label == "Regular(0)" and c.zeros == 0


def test_abelian_is_flat_oscillatory_and_cylinder_is_cylindrical():
    c = classify(InitialData(1.5, 0.0, 0.0))
    assert c.kind is OrbitKind.OSCILLATORY and c.diagnostics.asymptote == "flat"
    c = classify(InitialData(1.0, 0.0, 0.0))
    assert c.kind is OrbitKind.OSCILLATORY and c.diagnostics.asymptote == "cylindrical"


def test_large_u0_escapes_monotonically():
    for r0 in (0.5, 0.75, 2.0):
        c = classify(InitialData(r0, 0.0, 1e3))
        assert c.is_(OrbitKind.ESCAPING, 0) and c.diagnostics.monotone_w


def test_zero_energy_crashes():
    assert classify(InitialData(0.75, 0.5, 0.0)).kind is OrbitKind.CRASHING


def test_inadmissible_data_raises():
    with pytest.raises(InadmissibleDataError):
        classify(InitialData(0.5, 0.0, 0.0))


def test_event_and_winding_counts_agree(rng):
    for _ in range(40):
        d = InitialData(rng.uniform(0.3, 3), rng.uniform(-1, 1), rng.uniform(-3, 3))
        if not d.admissible:
            continue
        c = classify(d)
        if c.kind in (OrbitKind.ESCAPING, OrbitKind.REGULAR):
            ev, wind = count_w_zeros(c.trajectory)
            assert ev == wind == c.n, (d, ev, wind)


def test_escaping_counts_follow_shooting_levels():
    seq = sequence(2.0, "odd")
    for s in seq:
        c = classify(InitialData(2.0, 0.0, s.hi))
        assert c.is_(OrbitKind.ESCAPING, s.n) or c.is_(OrbitKind.REGULAR, s.n)
        c = classify(InitialData(2.0, 0.0, s.lo))
        assert c.is_(OrbitKind.ESCAPING, s.n + 1)


def test_shadow_window_of_near_regular_orbit():
    s = sequence(0.75, "odd")[1]
    c = classify(InitialData(0.75, 0.0, s.value))
    sh = shadow_window(c.trajectory, 1e-3)
    assert sh is not None and sh.zeros == 1 and sh.best < 1e-3
    assert sh.rho_start <= sh.rho_best <= sh.rho_end


def test_unresolved_when_horizon_capped():
    # a near-regular orbit cannot be decided by rho = 1
    c = classify(InitialData(2.0, 0.0, 0.259529185296), IntegrationControls(rho_max=0.5), ClassifyPolicy(cap=1.0))
    assert c.kind is OrbitKind.UNRESOLVED
    assert "undecided" in c.reason and c.diagnostics.rho_end == pytest.approx(1.0)
    assert c.zeros == 0


def test_policy_validation():
    with pytest.raises(Exception):
        ClassifyPolicy(growth=1.0)


def test_to_dict_is_serialisable():
    import json

    c = classify(InitialData(2.0, 0.3, 0.2))
    d = c.to_dict()
    json.dumps(d)
    assert d["class"] == c.label


def test_winding_count_at_start_on_axis():
    traj = integrate(initial_state(InitialData(2.0, 0.0, 0.3)), IntegrationControls(rho_max=1e-3))
    assert count_w_zeros(traj) == (0, 0)
    assert np.isclose(traj.initial.w, 0.0)


def test_spec_examples():
    c = classify(InitialData(0.75, 0.0, 100.0))
    assert c.kind is OrbitKind.ESCAPING and c.diagnostics.monotone_w
    ev, wind = count_w_zeros(integrate(initial_state(InitialData(1.2, 0.0, 0.5))))
    assert ev == wind
