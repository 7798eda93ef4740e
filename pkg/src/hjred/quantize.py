"""Operator checks and grid spectra for the quantized constraint systems.

Units have hbar = 1.  Reduced Hamiltonians of the form g(p^2 + q^2) are
quantized by applying g to the spectrum of the discretized oscillator
p^2 + q^2; levels outside the natural domain of g are filtered out.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .expr import (
    Expr,
    Symbol,
    add,
    compile_expr,
    differentiate,
    mul,
    reduce_power,
    substitute,
    symbol,
)
from .expr.core import poly_of
from .expr.numeric import DomainError

HERMITIAN_TOLERANCE = 1e-12
ADMISSIBLE_TOLERANCE = 1e-6
MIN_POINTS = 16
STENCILS = ("sinc", "fd3")


class QuantizeError(Exception):
    pass


class NotPolynomialError(QuantizeError):
    pass


class UnrecognizedFormError(QuantizeError):
    pass


# ---------------------------------------------------------------------------
# grids and operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    n: int
    extent: float

    def __post_init__(self):
        if self.n < MIN_POINTS:
            raise ValueError(f"grids need at least {MIN_POINTS} points, got {self.n}")
        if not self.extent > 0:
            raise ValueError("grid extent must be positive")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.n)

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.n - 1)


@dataclass(frozen=True)
class GridOperator:
    grid: Grid
    matrix: np.ndarray
    hermitian: bool = True

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.grid.n, self.grid.n):
            raise ValueError("operator shape does not match the grid")
        if self.hermitian and not is_hermitian(m):
            raise ValueError("matrix flagged hermitian is not hermitian")

    def eigenvalues(self) -> np.ndarray:
        if not self.hermitian:
            raise ValueError("eigenvalues are only computed for hermitian operators")
        return np.linalg.eigvalsh(self.matrix)

    def __add__(self, other: "GridOperator") -> "GridOperator":
        if other.grid != self.grid:
            raise ValueError("operators live on different grids")
        return GridOperator(self.grid, self.matrix + other.matrix,
                            self.hermitian and other.hermitian)

    def scaled(self, factor: float) -> "GridOperator":
        return GridOperator(self.grid, factor * self.matrix, self.hermitian)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOLERANCE) -> bool:
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * scale)


def momentum_squared(grid: Grid, stencil: str = "sinc") -> GridOperator:
    """Discrete ``-d^2/dx^2``.

    ``sinc`` is the spectrally accurate sinc-basis stencil; ``fd3`` is the
    second-order three-point stencil.
    """
    n, h = grid.n, grid.spacing
    if stencil == "fd3":
        m = (2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / h**2
    elif stencil == "sinc":
        idx = np.arange(n)
        diff = idx[:, None] - idx[None, :]
        with np.errstate(divide="ignore"):
            m = 2.0 * np.where(diff % 2 == 0, 1.0, -1.0) / (h**2 * diff.astype(float) ** 2)
        np.fill_diagonal(m, math.pi**2 / (3.0 * h**2))
    else:
        raise ValueError(f"unknown stencil {stencil!r}; expected one of {STENCILS}")
    return GridOperator(grid, m)


def position_squared(grid: Grid) -> GridOperator:
    return GridOperator(grid, np.diag(grid.points**2))


def oscillator(grid: Grid, stencil: str = "sinc") -> GridOperator:
    """``p^2 + q^2`` on the grid."""
    return momentum_squared(grid, stencil) + position_squared(grid)


def oscillator_spectrum(n: int = 512, extent: float = 10.0, stencil: str = "sinc") -> np.ndarray:
    """Ascending eigenvalues of the discretized ``p^2 + q^2``."""
    return oscillator(Grid(n, extent), stencil).eigenvalues()


# ---------------------------------------------------------------------------
# symbolic annihilation checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Wavefunction:
    """``(real + i*imag) * exp(i*phase)`` with real-valued expression parts."""

    real: Expr
    phase: Expr
    imag: Expr = None

    def parts(self):
        from .expr import ZERO

        return self.real, (self.imag if self.imag is not None else ZERO)


@dataclass(frozen=True)
class Residual:
    """Coefficient of ``exp(i*phase)`` after the operator acted."""

    real: Expr
    imag: Expr

    @property
    def is_zero(self) -> bool:
        return self.real.is_zero_constant() and self.imag.is_zero_constant()


def _apply_momentum(re: Expr, im: Expr, phase: Expr, coordinate: str):
    """``-i d/dq`` acting on ``(re + i im) exp(i phase)``."""
    dphi = differentiate(phase, coordinate)
    new_re = add(differentiate(im, coordinate), mul(re, dphi))
    new_im = add(mul(-1, differentiate(re, coordinate)), mul(im, dphi))
    return new_re, new_im


def _momentum_monomials(constraint: Expr, pairs: Sequence):
    """Split into ``(coefficient, {momentum: power})`` terms."""
    from .expr import from_terms

    momenta = {p: q for q, p in pairs}
    out = []
    for mono, coef in poly_of(constraint).items():
        powers = {}
        rest = []
        for base, exp in mono:
            if isinstance(base, Symbol) and base.name in momenta:
                if exp.denominator != 1 or exp < 0:
                    raise NotPolynomialError(f"{constraint} is not polynomial in {base.name}")
                powers[base.name] = int(exp)
            elif base.free_symbols & momenta.keys():
                raise NotPolynomialError(f"{constraint} is not polynomial in the momenta")
            else:
                rest.append((base, exp))
        out.append((from_terms([(tuple(rest), coef)]), powers))
    return out


def check_annihilation(constraint: Expr, wavefunction: Wavefunction, pairs: Sequence) -> Residual:
    """Apply the constraint with ``p -> -i d/dq`` (momenta to the right)."""
    pairs = [(str(q), str(p)) for q, p in pairs]
    momenta = {p: q for q, p in pairs}
    re0, im0 = wavefunction.parts()
    total_re, total_im = [], []
    for coef, powers in _momentum_monomials(constraint, pairs):
        re, im = re0, im0
        for p, k in sorted(powers.items()):
            for _ in range(k):
                re, im = _apply_momentum(re, im, wavefunction.phase, momenta[p])
        total_re.append(mul(coef, re))
        total_im.append(mul(coef, im))
    return Residual(add(*total_re), add(*total_im))


# ---------------------------------------------------------------------------
# reduced spectra
# ---------------------------------------------------------------------------

_W = "w"


def recognize_radial(hamiltonian: Expr, coordinate: str, momentum: str,
                     constants: Mapping = None):
    """Write ``hamiltonian`` as ``g(w)`` with ``w = p^2 + q^2``.

    Returns the expression ``g`` in the symbol ``w``.
    """
    h = hamiltonian
    if constants:
        h = substitute(h, {k: Fraction(str(v)) for k, v in constants.items()})
    if _W in h.free_symbols:
        raise UnrecognizedFormError("the Hamiltonian already uses the symbol 'w'")
    g = reduce_power(h, coordinate, 2, add(symbol(_W), mul(-1, symbol(momentum), symbol(momentum))))
    if {coordinate, momentum} & g.free_symbols:
        raise UnrecognizedFormError(f"{hamiltonian} is not a function of {momentum}^2 + {coordinate}^2")
    extra = sorted(g.free_symbols - {_W})
    if extra:
        raise UnrecognizedFormError(f"unbound symbols {', '.join(extra)} in {hamiltonian}")
    return g


@dataclass(frozen=True)
class Level:
    n: int
    oscillator: float
    value: float       # g at the level; NaN when not admissible
    admissible: bool


@dataclass(frozen=True)
class ReducedSpectrum:
    function: Expr
    levels: tuple

    @property
    def admissible(self) -> list:
        return [lv for lv in self.levels if lv.admissible]

    @property
    def count(self):
        """Number of admissible states; ``inf`` when the top level is admissible."""
        if self.levels and self.levels[-1].admissible:
            return math.inf
        return len(self.admissible)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["n", "lambda_n", "g_lambda_n", "admissible"])
            for lv in self.levels:
                out.writerow([lv.n, repr(lv.oscillator), repr(lv.value),
                              "true" if lv.admissible else "false"])


def _safe(g, x: float):
    try:
        v = g(x)
    except (DomainError, ZeroDivisionError):
        return None
    return v if math.isfinite(v) else None


def _evaluate_near(g, lam: float, tol: float):
    """Value of g at ``lam``, or at the domain edge when that is within ``tol``."""
    v = _safe(g, lam)
    if v is not None:
        return v
    for other in (lam - tol, lam + tol):
        if _safe(g, other) is None:
            continue
        bad, good = lam, other
        for _ in range(80):
            mid = 0.5 * (bad + good)
            if _safe(g, mid) is None:
                bad = mid
            else:
                good = mid
        return _safe(g, good)
    return None


def reduced_spectrum(hamiltonian: Expr, coordinate: str, momentum: str,
                     constants: Mapping = None, n: int = 512, extent: float = 10.0,
                     stencil: str = "sinc", tol: float = ADMISSIBLE_TOLERANCE) -> ReducedSpectrum:
    g = recognize_radial(hamiltonian, coordinate, momentum, constants)
    f = compile_expr(g, [_W])
    levels = []
    for i, lam in enumerate(oscillator_spectrum(n, extent, stencil)):
        value = _evaluate_near(f, float(lam), tol)
        ok = value is not None
        levels.append(Level(i, float(lam), float(value) if ok else math.nan, ok))
    return ReducedSpectrum(g, tuple(levels))
