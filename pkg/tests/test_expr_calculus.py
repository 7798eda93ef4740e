from __future__ import annotations

import random
from fractions import Fraction

import pytest

from hjred.expr import (
    Const,
    differentiate,
    eval_num,
    parse,
    poisson_bracket,
    polynomial_coefficients,
    reduce_power,
    sqrt,
    substitute,
    symbol,
)

NAMES = ("x", "y", "z")


def _random_expr(rng: random.Random, depth: int):
    """Polynomial/sqrt corpus whose radicands stay positive on [-2, 2]^3."""
    if depth == 0:
        if rng.random() < 0.3:
            return Const(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        return symbol(rng.choice(NAMES))
    a = _random_expr(rng, depth - 1)
    b = _random_expr(rng, depth - 1)
    kind = rng.choice(["add", "mul", "pow", "sqrt", "sub"])
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "pow":
        return a ** rng.randint(2, 3)
    return sqrt(1 + a * a)


def test_derivative_of_kinetic_term():
    e = parse("q1_d^2/(4*q2)")
    assert differentiate(e, "q1_d") == parse("q1_d/(2*q2)")


def test_derivative_of_constant():
    assert differentiate(parse("R^2"), "q1").is_zero_constant()


def test_derivative_of_half_integer_power():
    e = parse("(2/3)*(R^2 - p1^2 - q1^2)^(3/2)")
    assert differentiate(e, "p1") == parse("-2*p1*(R^2 - p1^2 - q1^2)^(1/2)")


@pytest.mark.parametrize("seed", range(12))
def test_derivative_matches_central_difference(seed):
    rng = random.Random(seed)
    e = _random_expr(rng, 3)
    h = 1e-5
    for _ in range(20):
        point = {n: rng.uniform(-2.0, 2.0) for n in NAMES}
        for s in NAMES:
            exact = eval_num(differentiate(e, s), point)
            hi, lo = dict(point), dict(point)
            hi[s] += h
            lo[s] -= h
            fd = (eval_num(e, hi) - eval_num(e, lo)) / (2 * h)
            assert abs(exact - fd) <= 1e-6 * (1 + abs(exact)), (str(e), s, point)


def test_substitute_onto_constraint_surface():
    # disc H0 with q2^2 replaced by R^2 - q1^2 - p1^2 equals -(2/3)*q2^3 on the surface
    surface = parse("R^2 - q1^2 - p1^2")
    h0 = parse("q2*p1^2 + q2*(q1^2 + q2^2/3 - R^2)")
    reduced = reduce_power(h0, "q2", 2, surface)
    assert reduced == parse("-(2/3)*q2*(R^2 - p1^2 - q1^2)")
    assert reduce_power(parse("-(2/3)*q2^3"), "q2", 2, surface) == reduced
    assert reduce_power(reduced, "q2", 2, surface) == reduced


def test_substitute_identity_and_constant_binding():
    e = parse("x^2 + 3*x*y")
    assert substitute(e, {"x": symbol("x")}) == e
    assert substitute(parse("(e/2)*(p^2 + m^2)"), {"m": 0}) == parse("(e/2)*p^2")


def test_substitution_is_simultaneous():
    e = parse("x - y")
    assert substitute(e, {"x": symbol("y"), "y": symbol("x")}) == parse("y - x")


def test_polynomial_coefficients():
    coeffs = polynomial_coefficients(parse("R^2 - q2^2 + 3*q2*p1"), "q2")
    assert coeffs == {0: parse("R^2"), 1: parse("3*p1"), 2: Const(-1)}
    assert polynomial_coefficients(parse("sqrt(q2) + 1"), "q2") is None
    assert polynomial_coefficients(Const(0), "q2") == {}


def test_canonical_pair_bracket():
    assert poisson_bracket(symbol("q1"), symbol("p1"), [("q1", "p1")]) == Const(1)


def test_bracket_drives_frozen_parameter():
    pairs = [("q1", "p1"), ("q2", "p2")]
    b = poisson_bracket(parse("p1^2 + q1^2 + q2^2 - R^2"), symbol("p2"), pairs)
    assert b == parse("2*q2")
    assert poisson_bracket(symbol("p2"), parse("p1^2 + q1^2 + q2^2 - R^2"), pairs) == parse("-2*q2")


def test_bracket_of_relativistic_hamiltonians(relativistic):
    _, sys, _ = relativistic
    h0, h1 = sys.extended
    bracket = poisson_bracket(h0, h1, sys.pairs)
    assert bracket == parse("(1/2)*(m^2 - p0^2 + p1^2 + p2^2 + p3^2)")


def test_bracket_rejects_bad_pairs():
    with pytest.raises(ValueError):
        poisson_bracket(symbol("q"), symbol("p"), [])
    with pytest.raises(ValueError):
        poisson_bracket(symbol("q"), symbol("p"), [("q", "p"), ("q", "r")])
