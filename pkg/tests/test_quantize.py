from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjred.expr import Const, parse, substitute, symbol
from hjred.quantize import (
    Grid,
    GridOperator,
    NotPolynomialError,
    UnrecognizedFormError,
    Wavefunction,
    check_annihilation,
    is_hermitian,
    momentum_squared,
    oscillator,
    oscillator_spectrum,
    position_squared,
    recognize_radial,
    reduced_spectrum,
)

EXACT = 2.0 * np.arange(10) + 1.0
KG_PAIRS = [("x0", "p0"), ("x1", "p1"), ("x2", "p2"), ("x3", "p3")]
KG = parse("-p0^2 + p1^2 + p2^2 + p3^2 + m^2")
PLANE_PHASE = parse("k0*x0 + k1*x1 + k2*x2 + k3*x3")


def _error(n, stencil):
    return np.abs(oscillator_spectrum(n, 10.0, stencil)[:10] - EXACT)


def test_oscillator_levels():
    assert np.max(_error(512, "sinc")) <= 1e-6


def test_three_point_convergence_is_monotone():
    errors = [_error(n, "fd3") for n in (128, 256, 512, 1024)]
    for coarse, fine in zip(errors, errors[1:]):
        assert np.all(fine < coarse)


def test_small_grid_is_worse_and_improves():
    errors = [np.max(_error(n, "sinc")) for n in (16, 32, 64)]
    assert errors[0] > 1e-3
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.parametrize("stencil", ["sinc", "fd3"])
def test_operators_are_hermitian_with_real_spectra(stencil):
    grid = Grid(64, 5.0)
    for op in (momentum_squared(grid, stencil), position_squared(grid), oscillator(grid, stencil)):
        assert is_hermitian(op.matrix)
        assert np.all(np.isreal(op.eigenvalues()))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(8, 10.0)
    with pytest.raises(ValueError):
        Grid(32, 0.0)
    with pytest.raises(ValueError):
        GridOperator(Grid(16, 1.0), np.triu(np.ones((16, 16))))
    with pytest.raises(ValueError):
        momentum_squared(Grid(16, 1.0), "fd5")


def _disc_h(disc):
    return disc[2].reduced_for("+")


@pytest.mark.parametrize("r_squared, count", [(1, 1), (4, 2), (9, 5), (25, 13), (0.5, 0)])
def test_disc_counts(disc, r_squared, count):
    spec = reduced_spectrum(_disc_h(disc), "q1", "p1", {"R": math.sqrt(r_squared)})
    assert spec.count == count
    assert count == (math.floor((r_squared - 1) / 2) + 1 if r_squared >= 1 else 0)


def test_disc_levels_at_radius_three(disc):
    spec = reduced_spectrum(_disc_h(disc), "q1", "p1", {"R": 3})
    lams = [lv.oscillator for lv in spec.admissible]
    assert np.max(np.abs(np.array(lams) - [1, 3, 5, 7, 9])) <= 1e-6
    assert abs(abs(spec.admissible[0].value) - (2 / 3) * 8**1.5) <= 1e-5
    values = [lv.value for lv in spec.admissible]
    # g is increasing on its domain, so levels rise with n
    assert all(a < b for a, b in zip(values, values[1:]))


def test_punctured_plane_levels(punctured):
    spec = reduced_spectrum(punctured[2].reduced_for("+"), "q1", "p1", {"R": 3})
    assert spec.count == math.inf
    first, second = spec.admissible[:2]
    assert (first.n, second.n) == (4, 5)
    assert abs(first.value) <= 1e-6
    assert abs(second.value - (2 / 3) * 2**1.5) <= 1e-6


def test_recognized_function(disc):
    g = recognize_radial(_disc_h(disc), "q1", "p1", {"R": 3})
    assert g == parse("-(2/3)*(9 - w)^(3/2)")


def test_unrecognized_form(relativistic):
    with pytest.raises(UnrecognizedFormError):
        recognize_radial(relativistic[1].h0, "x1", "p1", {"m": 1})
    with pytest.raises(UnrecognizedFormError):
        recognize_radial(parse("p1^2 + 2*q1^2"), "q1", "p1")


def test_spectrum_csv(disc, tmp_path):
    spec = reduced_spectrum(_disc_h(disc), "q1", "p1", {"R": 3}, n=32, extent=6.0)
    path = tmp_path / "spec.csv"
    spec.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,lambda_n,g_lambda_n,admissible"
    assert len(lines) == 33
    assert lines[-1].endswith(",nan,false")


def test_on_shell_plane_wave_is_annihilated():
    k = {"k1": Const(3), "k2": Const(0), "k3": Const(4), "m": Const(1)}
    on_shell = dict(k, k0=parse("sqrt(26)"))
    wf = Wavefunction(Const(1), substitute(PLANE_PHASE, on_shell))
    assert check_annihilation(substitute(KG, {"m": 1}), wf, KG_PAIRS).is_zero


def test_symbolic_on_shell_plane_wave_is_annihilated():
    k0 = parse("sqrt(k1^2 + k2^2 + k3^2 + m^2)")
    wf = Wavefunction(Const(1), substitute(PLANE_PHASE, {"k0": k0}))
    assert check_annihilation(KG, wf, KG_PAIRS).is_zero


def test_off_shell_plane_wave_leaves_the_shell_residual():
    res = check_annihilation(KG, Wavefunction(Const(1), PLANE_PHASE), KG_PAIRS)
    assert res.real == parse("-k0^2 + k1^2 + k2^2 + k3^2 + m^2")
    assert res.imag == Const(0)
    assert not res.is_zero


def test_primary_constraint_annihilates_reduced_wavefunction():
    wf = Wavefunction(parse("q1^2 + 1"), parse("3*q1"))
    res = check_annihilation(symbol("p2"), wf, [("q1", "p1"), ("q2", "p2")])
    assert res.is_zero


def test_non_polynomial_constraint():
    with pytest.raises(NotPolynomialError):
        check_annihilation(parse("sqrt(p1)"), Wavefunction(Const(1), symbol("q1")), [("q1", "p1")])


amplitudes = st.lists(st.integers(-3, 3), min_size=3, max_size=3).map(
    lambda c: c[0] + c[1] * symbol("q1") + c[2] * symbol("q1") ** 2)


@settings(max_examples=40, deadline=None)
@given(amplitudes, amplitudes, st.integers(-3, 3), st.integers(-3, 3))
def test_annihilation_is_linear(f, g, a, b):
    constraint = parse("p1^2 + q1*p1 + q2")
    pairs = [("q1", "p1"), ("q2", "p2")]
    phase = parse("2*q1")
    combined = check_annihilation(constraint, Wavefunction(a * f + b * g, phase), pairs)
    rf = check_annihilation(constraint, Wavefunction(f, phase), pairs)
    rg = check_annihilation(constraint, Wavefunction(g, phase), pairs)
    assert (combined.real - a * rf.real - b * rg.real).is_zero_constant()
    assert (combined.imag - a * rf.imag - b * rg.imag).is_zero_constant()
