import pytest
from conftest import sequence

from phantomeym import Axis, BracketError, DomainError, InitialData, OrbitKind, bracket_axis, classify
from phantomeym.shooting import Ladder, admissible_floor, bisect_boundary, is_hi_side

# frozen values at tol 1e-11 (bracket midpoints)
FROZEN = {
    (0.75, "even"): [1.0, 0.754658133395, 0.654491674211, 0.630231347288],
    (0.75, "odd"): [2.829260510985, 2.049370662135, 1.879026239513, 1.849178736098],
    (2.0, "even"): [1.0, 0.182300554191, 0.029947293111, 0.004883398465],
    (2.0, "odd"): [0.259529185296, 0.042819142909, 0.006982687681, 0.001138419495],
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_sequences(key):
    got = [s.value for s in sequence(*key)]
    assert got == pytest.approx(FROZEN[key], abs=2e-11)


def test_axis_datum():
    assert Axis.EVEN.datum(2.0, 0.5) == InitialData(2.0, 0.5, 0.0)
    assert Axis.ODD.datum(2.0, 0.5) == InitialData(2.0, 0.0, 0.5)


def test_bracket_axis_endpoints():
    lo, hi = bracket_axis(0.75, Axis.EVEN)
    assert lo == pytest.approx(0.5) and hi == 1.0
    lo, hi = bracket_axis(0.75, Axis.ODD)
    assert InitialData(0.75, 0.0, lo).admissible
    assert classify(InitialData(0.75, 0.0, hi)).is_(OrbitKind.ESCAPING)
    with pytest.raises(DomainError):
        bracket_axis(-1.0, Axis.ODD)


def test_admissible_floor_nudges_up():
    p = admissible_floor(lambda u: InitialData(0.5, 0.0, u), 1.5**0.5)
    assert InitialData(0.5, 0.0, p).admissible and p - 1.5**0.5 < 1e-15


def test_bisect_rejects_bad_bracket():
    ev = lambda u: classify(InitialData(2.0, 0.0, u))  # noqa: E731
    with pytest.raises(BracketError):
        bisect_boundary(ev, 0.5, 1.0, 0)  # both sides escape with 0 zeros
    with pytest.raises(DomainError):
        bisect_boundary(ev, 0.0, 1.0, 0, tol=0.0)


def test_results_straddle_the_boundary():
    for s in sequence(2.0, "odd"):
        assert s.width <= 1e-11
        assert is_hi_side(s.hi_class, s.n) and not is_hi_side(s.lo_class, s.n)
        assert s.to_dict()["n"] == s.n


def test_ladder_levels_are_lazy_and_ordered():
    lad = Ladder(lambda u: InitialData(2.0, 0.0, u), 0.0, 8.0, tol=1e-9)
    assert lad.first == 0 and not lad.results
    s2 = lad.level(2)
    assert len(lad.results) == 3
    assert lad.level(0).value > lad.level(1).value > s2.value
    with pytest.raises(DomainError):
        Ladder(lambda u: InitialData(2.0, 0.0, u), 0.0, 8.0, tol=1e-13)


def test_even_ground_state_is_the_ellis_bronnikov_anchor():
    s = sequence(2.0, "even")[0]
    assert s.value == 1.0 and s.hi_class.is_(OrbitKind.REGULAR, 0)
