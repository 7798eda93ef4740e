from __future__ import annotations

import pytest

from hjred.expr import (
    Assumption,
    NoAdmissiblePointError,
    ZeroTest,
    is_zero,
    parse,
    sample_points,
)


def test_cancellation_is_provably_zero():
    assert is_zero(parse("(p^2 + m^2) - p^2 - m^2")) is ZeroTest.ZERO


def test_mass_shell_with_positive_mass_is_nonzero():
    assert is_zero(parse("(1/2)*(p^2 + m^2)"), [Assumption("m", ">", 0)]) is ZeroTest.NONZERO


def test_structural_zero():
    assert is_zero(parse("q2*0 + (q2^2 - q2*q2)")) is ZeroTest.ZERO


def test_tiny_nonzero_values_are_undecided():
    # nonzero in normal form, yet below the sampling threshold everywhere in the box
    assert is_zero(parse("q1^2/100000000000")) is ZeroTest.UNDECIDED


def test_assumption_controls_verdict():
    e = parse("2*q2")
    assert is_zero(e, [Assumption("q2", ">", 0)]) is ZeroTest.NONZERO


def test_zero_test_is_deterministic():
    e = parse("q1*q2 - 1/10")
    first = [is_zero(e, seed=7) for _ in range(3)]
    assert len(set(first)) == 1
    assert sample_points(["a", "b"], seed=3) == sample_points(["a", "b"], seed=3)


def test_samples_respect_assumptions():
    cons = [Assumption("q2", ">", 0), Assumption("R", "<", 1), Assumption("x", "!=", 0)]
    for pt in sample_points(["q2", "R", "x"], cons, count=50, seed=1):
        assert pt["q2"] > 0 and pt["R"] < 1 and pt["x"] != 0


def test_no_admissible_point_after_bounded_retries():
    with pytest.raises(NoAdmissiblePointError):
        sample_points(["x"], accept=lambda pt: False, seed=1)


def test_excluded_region_is_resampled():
    # sqrt(q) is only defined for q >= 0; negative draws are redrawn
    assert is_zero(parse("sqrt(q) + 1")) is ZeroTest.NONZERO


def test_assumption_text_round_trip():
    a = Assumption.parse("q2 > 0")
    assert str(a) == "q2 > 0"
    with pytest.raises(ValueError):
        Assumption("q2", ">=", 0)
