from __future__ import annotations

import json

import pytest

from hjred.chain import (
    CENTRAL,
    FIRST_CLASS,
    INCONSISTENT,
    INTEGRABLE,
    SECOND_CLASS,
    UNDECIDED,
    BranchSolveError,
    ChainError,
    ChainReport,
    Constraint,
    analyze,
    classify,
    dirac_bracket,
    run_chain,
    total_differential,
)
from hjred.expr import ZERO, ZeroTest, eval_num, is_zero, parse, substitute, symbol
from hjred.legendre import build_hj_system
from hjred.model import builtin_models, loads
from hjred.report import chain_dict


def _system(text):
    return build_hj_system(loads(text))


def test_differential_of_primary_constraint(relativistic):
    _, sys, _ = relativistic
    d = total_differential(sys.extended[1], sys)
    assert d == {"tau": parse("-(1/2)*(-p0^2 + p1^2 + p2^2 + p3^2 + m^2)"), "e": ZERO}


def test_differential_of_disc_circle(disc):
    _, sys, _ = disc
    d = total_differential(parse("p1^2 + q1^2 + q2^2 - R^2"), sys)
    assert d == {"t": ZERO, "q2": parse("2*q2")}


def test_differential_of_constant(disc):
    _, sys, _ = disc
    assert all(v == ZERO for v in total_differential(parse("R^2 + 3"), sys).values())


def test_relativistic_chain(relativistic):
    _, _, report = relativistic
    assert report.status == INTEGRABLE
    assert [c.label for c in report.constraints] == ["H'_1", "H'_2"]
    gen = report.generated
    assert len(gen) == 1
    assert gen[0].expr == parse("(1/2)*(-p0^2 + p1^2 + p2^2 + p3^2 + m^2)")
    assert gen[0].provenance == "generated-from(H'_1, tau)"
    assert report.frozen == () and report.branches == ()
    assert {c.classification for c in report.constraints} == {FIRST_CLASS}


def test_disc_chain(disc):
    _, _, report = disc
    assert report.status == INTEGRABLE
    assert report.constraint("H'_2").expr == parse("p1^2 + q1^2 + q2^2 - R^2")
    assert report.frozen_names == ("q2",)
    assert report.frozen[0].coefficient == parse("2*q2")
    assert "q2 > 0" in report.frozen[0].reason
    plus, minus = report.branches
    assert plus.value == parse("sqrt(R^2 - p1^2 - q1^2)")
    assert minus.value == parse("-sqrt(R^2 - p1^2 - q1^2)")
    assert plus.admissible and not minus.admissible
    assert report.reduced_for("+") == parse("-(2/3)*(R^2 - p1^2 - q1^2)^(3/2)")
    assert report.reduced_for("-") == parse("(2/3)*(R^2 - p1^2 - q1^2)^(3/2)")
    (d,) = report.discrepancies
    assert (d.branch, d.verdict) == ("+", "opposite-sign")
    assert d.reference == parse("(2/3)*(R^2 - p1^2 - q1^2)^(3/2)")


def test_punctured_plane_chain(punctured):
    _, _, report = punctured
    assert report.status == INTEGRABLE
    assert report.constraint("H'_2").expr == parse("p1^2 + q1^2 - q2^2 - R^2")
    plus, minus = report.branches
    assert plus.value == parse("sqrt(p1^2 + q1^2 - R^2)")
    assert minus.value == parse("-sqrt(p1^2 + q1^2 - R^2)")
    assert report.reduced_for("+") == parse("(2/3)*(p1^2 + q1^2 - R^2)^(3/2)")
    assert [d.verdict for d in report.discrepancies] == ["match"]


@pytest.mark.parametrize("name", ["disc", "punctured"])
def test_branches_satisfy_their_source(name, request):
    _, sys, report = request.getfixturevalue(name)
    for b in report.branches:
        source = report.constraint(b.source).expr
        assert substitute(source, {b.parameter: b.value}).is_zero_constant()


@pytest.mark.parametrize("name", ["disc", "punctured"])
def test_frozen_coefficients_are_provably_nonzero(name, request):
    _, sys, report = request.getfixturevalue(name)
    for f in report.frozen:
        assert is_zero(f.coefficient, sys.assumptions) is ZeroTest.NONZERO


def test_disc_classification(disc):
    _, _, report = disc
    verdicts = {(b.first, b.second): (b.bracket, b.verdict) for b in report.brackets}
    assert verdicts[("H'_1", "H'_2")] == (parse("-2*q2"), "second-class")
    assert verdicts[("H'_1", "H'_1")] == (ZERO, "zero")
    assert verdicts[("H'_2", "H'_2")] == (ZERO, "zero")
    assert {c.classification for c in report.constraints} == {SECOND_CLASS}


@pytest.mark.parametrize("index", [0, 1, 2])
def test_chain_is_deterministic(index):
    model = builtin_models()[index]
    first = json.dumps(chain_dict(analyze(build_hj_system(model))), sort_keys=True)
    second = json.dumps(chain_dict(analyze(build_hj_system(model))), sort_keys=True)
    assert first == second


def test_inconsistent_chain():
    sys = _system("coordinate q y\ntime t\nlagrangian q_d^2/2 - y\n")
    report = analyze(sys)
    assert report.status == INCONSISTENT
    assert report.offending == parse("-1")
    with pytest.raises(ChainError):
        classify(report, sys)


def test_undecided_chain():
    sys = _system("coordinate q y\ntime t\nconstant k\nlagrangian q_d^2/2 - y*k^2/100000000000\n")
    report = run_chain(sys)
    assert report.status == UNDECIDED
    assert report.offending == parse("-k^2/100000000000")


def test_frozen_reason_records_the_assumptions(disc):
    _, sys, _ = disc
    report = run_chain(sys, assumptions=[])
    assert report.frozen_names == ("q2",)
    assert "no assumptions" in report.frozen[0].reason


def test_linear_constraint_in_frozen_parameter_is_not_branch_solved():
    sys = _system("coordinate x y\ntime t\nlagrangian y*x_d - x^2/2 - y^2/2\n")
    with pytest.raises(BranchSolveError):
        run_chain(sys)


def _central_setup():
    sys = _system("coordinate x y\ntime t\nlagrangian y*x_d - x^2/2 - y^2/2\n")
    cons = (Constraint("H'_1", parse("p_x - y")), Constraint("H'_2", parse("p_y")))
    return sys, ChainReport(cons, (), (), (), INTEGRABLE)


def test_central_bracket_classification():
    sys, report = _central_setup()
    classified = classify(report, sys)
    verdicts = {(b.first, b.second): (b.bracket, b.verdict) for b in classified.brackets}
    assert verdicts[("H'_1", "H'_2")] == (parse("-1"), "central")
    assert {c.classification for c in classified.constraints} == {CENTRAL}


def test_dirac_bracket_for_central_constraints():
    sys, report = _central_setup()
    cons = [c.expr for c in report.constraints]
    pairs = [("x", "p_x"), ("y", "p_y")]
    assert dirac_bracket(symbol("x"), symbol("y"), cons, pairs) == parse("1")
    assert dirac_bracket(symbol("x"), symbol("p_y"), cons, pairs) == ZERO
    assert dirac_bracket(symbol("x"), symbol("p_x"), cons, pairs) == parse("1")


def test_dirac_bracket_rejects_phase_dependent_matrix(disc):
    _, sys, report = disc
    with pytest.raises(ChainError):
        dirac_bracket(symbol("q1"), symbol("p1"), [c.expr for c in report.constraints], sys.pairs)


def test_self_bracket_is_zero(relativistic):
    _, _, report = relativistic
    for b in report.brackets:
        if b.first == b.second:
            assert b.bracket == ZERO


def test_reduced_hamiltonian_matches_full_on_surface(disc):
    _, sys, report = disc
    point = {"R": 1.0, "q1": 0.3, "p1": -0.4}
    q2 = eval_num(report.branches[0].value, point)
    full = eval_num(sys.h0, dict(point, q2=q2))
    assert abs(full - eval_num(report.reduced_for("+"), point)) < 1e-14
