from __future__ import annotations

import pytest

from hjred.expr import ZERO, differentiate, parse, substitute, symbol, velocity_name
from hjred.legendre import (
    UnsupportedVelocityForm,
    build_hj_system,
    energy_identity,
    equations_of_motion,
    hessian_partition,
    velocity_hessian,
)
from hjred.model import ACTION, builtin_models, loads


def test_relativistic_partition():
    part = hessian_partition(builtin_models()[0])
    assert (part.rank, part.dynamical, part.degenerate) == (4, ("x0", "x1", "x2", "x3"), ("e",))


def test_disc_partition_and_hessian():
    model = builtin_models()[1]
    part = hessian_partition(model)
    assert (part.rank, part.dynamical, part.degenerate) == (1, ("q1",), ("q2",))
    w = velocity_hessian(model)
    assert w == [[parse("1/(2*q2)"), ZERO], [ZERO, ZERO]]


def test_regular_lagrangian_has_no_degenerate_coordinates():
    model = loads("coordinate q1\ntime t\nlagrangian q1_d^2/2\n")
    part = hessian_partition(model)
    assert (part.rank, part.degenerate) == (1, ())
    sys = build_hj_system(model)
    assert sys.parameter_names == ("t",)
    assert sys.h0 == parse("p1^2/2")


def test_relativistic_momenta_and_hamiltonians(relativistic):
    _, sys, _ = relativistic
    assert sys.momenta["x0"] == parse("-x0_d/e")
    for i in (1, 2, 3):
        assert sys.momenta[f"x{i}"] == parse(f"x{i}_d/e")
    assert sys.momenta["e"] == ZERO
    assert sys.h0 == parse("(e/2)*(-p0^2 + p1^2 + p2^2 + p3^2 + m^2)")
    assert tuple(sys.extended) == (parse("p_tau") + sys.h0, parse("p_e"))


def test_disc_hamiltonians(disc):
    _, sys, _ = disc
    assert sys.h0 == parse("q2*p1^2 + q2*(q1^2 + q2^2/3 - R^2)")
    assert sys.extended[1] == parse("p2")
    assert [d.velocity for d in sys.dynamical] == [parse("2*p1*q2")]


def test_punctured_plane_hamiltonian(punctured):
    _, sys, _ = punctured
    assert sys.h0 == parse("q2*p1^2 + q2*(q1^2 - q2^2/3 - R^2)")


def test_disc_flow_coefficients(disc):
    _, sys, _ = disc
    eom = equations_of_motion(sys)
    assert eom[("q1", "t")] == parse("2*p1*q2")
    assert eom[("p1", "t")] == parse("-2*q1*q2")
    assert eom[("p2", "t")] == parse("-(p1^2 + q1^2 + q2^2 - R^2)")
    assert eom[("q1", "q2")] == ZERO


def test_relativistic_flow_coefficients(relativistic):
    _, sys, _ = relativistic
    eom = equations_of_motion(sys)
    # dx^mu = e p^mu dtau with the index raised by diag(-1, 1, 1, 1)
    metric = {"0": -1, "1": 1, "2": 1, "3": 1}
    for k, sign in metric.items():
        assert eom[(f"x{k}", "tau")] == parse(f"{sign}*e*p{k}")
        assert eom[(f"p{k}", "tau")] == ZERO
        assert eom[(f"x{k}", "e")] == ZERO
    assert eom[("p_e", "tau")] == parse("-(1/2)*(-p0^2 + p1^2 + p2^2 + p3^2 + m^2)")


def test_relativistic_action_integrand(relativistic):
    _, sys, _ = relativistic
    eom = equations_of_motion(sys)
    assert eom[(ACTION, "tau")] == parse("(e/2)*(-p0^2 + p1^2 + p2^2 + p3^2 - m^2)")
    assert eom[(ACTION, "e")] == ZERO


@pytest.mark.parametrize("index", [0, 1, 2])
def test_action_coefficient_at_zero_momenta(index):
    sys = build_hj_system(builtin_models()[index])
    eom = equations_of_motion(sys)
    zero_p = {p: 0 for p in sys.momentum_names}
    for alpha, ham in zip(sys.parameter_names, sys.hamiltonians):
        assert substitute(eom[(ACTION, alpha)], zero_p) == substitute(-ham, zero_p)


@pytest.mark.parametrize("index", [0, 1, 2])
def test_legendre_identity(index):
    model = builtin_models()[index]
    sys = build_hj_system(model)
    for d in sys.dynamical:
        dl = differentiate(model.lagrangian, velocity_name(d.coordinate))
        back = substitute(dl, {velocity_name(x.coordinate): x.velocity for x in sys.dynamical})
        assert (back - symbol(d.momentum)).is_zero_constant()


@pytest.mark.parametrize("index", [0, 1, 2])
def test_h0_is_velocity_free_and_energy_identity_holds(index):
    model = builtin_models()[index]
    sys = build_hj_system(model)
    assert not (sys.h0.free_symbols & set(model.velocities))
    assert energy_identity(sys).is_zero_constant()
    assert len(sys.parameters) - 1 == len(model.coordinates) - sys.rank


def test_nonlinear_velocity_dependence_is_unsupported():
    model = loads("coordinate q\ntime t\nlagrangian q_d^4\n")
    with pytest.raises(UnsupportedVelocityForm):
        build_hj_system(model)
