"""Singular Legendre transform: Hessian partition and the Hamilton-Jacobi set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .expr import (
    ZERO,
    Expr,
    ZeroTest,
    add,
    differentiate,
    is_zero,
    mul,
    polynomial_coefficients,
    substitute,
    symbol,
    velocity_name,
)
from .expr.linalg import SingularMatrixError, determinant, principal_minor, solve, subsets_by_size
from .model import ACTION, Model, momentum_names


class LegendreError(Exception):
    pass


class UndecidedMinorError(LegendreError):
    def __init__(self, coordinates, minor: Expr):
        self.coordinates = tuple(coordinates)
        self.minor = minor
        super().__init__(
            f"cannot decide invertibility of the velocity Hessian block for "
            f"{', '.join(coordinates)}: determinant {minor}")


class UnsupportedVelocityForm(LegendreError):
    pass


@dataclass(frozen=True)
class Partition:
    rank: int
    dynamical: tuple
    degenerate: tuple


@dataclass(frozen=True)
class DynamicalPair:
    coordinate: str
    momentum: str
    velocity: Expr  # solved q_d as a function of (q, p, t_mu)


@dataclass(frozen=True)
class Parameter:
    name: str
    momentum: str


@dataclass(frozen=True)
class HJSystem:
    model: Model
    dynamical: tuple          # DynamicalPair, in declaration order
    parameters: tuple         # Parameter; the evolution parameter first
    h0: Expr
    hamiltonians: tuple       # H_alpha, aligned with parameters
    extended: tuple           # H'_alpha = p_alpha + H_alpha
    rank: int
    momenta: dict             # coordinate -> dL/dq_d as written in the Lagrangian

    @property
    def assumptions(self) -> tuple:
        return self.model.assumptions

    @property
    def time(self) -> str:
        return self.parameters[0].name

    @property
    def parameter_names(self) -> tuple:
        return tuple(p.name for p in self.parameters)

    @property
    def coordinate_names(self) -> tuple:
        return tuple(d.coordinate for d in self.dynamical)

    @property
    def momentum_names(self) -> tuple:
        return tuple(d.momentum for d in self.dynamical)

    @property
    def parameter_momenta(self) -> tuple:
        return tuple(p.momentum for p in self.parameters)

    @property
    def pairs(self) -> tuple:
        """Canonical pairs of the full extended phase space."""
        return tuple((d.coordinate, d.momentum) for d in self.dynamical) + tuple(
            (p.name, p.momentum) for p in self.parameters)

    @property
    def phase_symbols(self) -> frozenset:
        return frozenset(s for pair in self.pairs for s in pair)

    def extended_of(self, parameter: str) -> Expr:
        return self.extended[self.parameter_names.index(parameter)]

    def hamiltonian_of(self, parameter: str) -> Expr:
        return self.hamiltonians[self.parameter_names.index(parameter)]


def velocity_hessian(model: Model) -> list:
    vel = model.velocities
    first = [differentiate(model.lagrangian, v) for v in vel]
    return [[differentiate(first[i], vel[j]) for j in range(len(vel))] for i in range(len(vel))]


def hessian_partition(model: Model) -> Partition:
    """Largest principal block of the velocity Hessian that is invertible.

    Subsets are tried by decreasing size and then lexicographically, so the
    earliest-declared coordinates are preferred as dynamical.
    """
    w = velocity_hessian(model)
    coords = model.coordinates
    for subset in subsets_by_size(len(coords)):
        if not subset:
            return Partition(0, (), tuple(coords))
        det = determinant(principal_minor(w, subset))
        verdict = is_zero(det, model.assumptions)
        if verdict is ZeroTest.ZERO:
            continue
        if verdict is ZeroTest.UNDECIDED:
            raise UndecidedMinorError([coords[i] for i in subset], det)
        dyn = tuple(coords[i] for i in subset)
        return Partition(len(subset), dyn, tuple(c for c in coords if c not in dyn))
    raise AssertionError("unreachable")


def _linear_split(expr: Expr, velocities: Sequence[str]):
    """``expr = sum_j coef_j * v_j + rest`` with velocity-free coefficients."""
    coefs = []
    rest = expr
    for v in velocities:
        poly = polynomial_coefficients(rest, v)
        if poly is None or max(poly, default=0) > 1:
            raise UnsupportedVelocityForm(
                f"momentum definition {expr} is not linear in {v}")
        coefs.append(poly.get(1, ZERO))
        rest = poly.get(0, ZERO)
    vset = set(velocities)
    for c in coefs + [rest]:
        if c.free_symbols & vset:
            raise UnsupportedVelocityForm(f"momentum definition {expr} is not linear in velocities")
    return coefs, rest


def build_hj_system(model: Model, partition: Partition = None) -> HJSystem:
    part = partition or hessian_partition(model)
    names = momentum_names(model.coordinates, model.time)
    L = model.lagrangian
    momenta = {c: differentiate(L, velocity_name(c)) for c in model.coordinates}
    dyn_vel = [velocity_name(c) for c in part.dynamical]
    deg_vel = [velocity_name(c) for c in part.degenerate]

    # p_a = A w + C qdot_mu + b, solved exactly for w
    rows, rhs = [], []
    for c in part.dynamical:
        coefs, rest = _linear_split(momenta[c], dyn_vel + deg_vel)
        rows.append(coefs[: len(dyn_vel)])
        cross = [mul(k, symbol(v)) for k, v in zip(coefs[len(dyn_vel):], deg_vel)]
        rhs.append(add(symbol(names[c]), mul(-1, rest), *(mul(-1, x) for x in cross)))
    try:
        solved = solve(rows, rhs, model.assumptions) if rows else []
    except SingularMatrixError as err:
        raise LegendreError(f"velocity solve failed: {err}") from None
    w = dict(zip(dyn_vel, solved))

    for c, v in zip(part.dynamical, dyn_vel):
        check = add(symbol(names[c]), mul(-1, substitute(momenta[c], w)))
        if is_zero(check, model.assumptions) is not ZeroTest.ZERO:
            raise LegendreError(f"velocity solve does not reproduce the momentum of {c}")

    h_mu = []
    for c in part.degenerate:
        value = mul(-1, substitute(momenta[c], w))
        if value.free_symbols & set(deg_vel):
            raise UnsupportedVelocityForm(
                f"momentum of degenerate coordinate {c} depends on velocities: {value}")
        h_mu.append(value)

    pieces = [mul(symbol(names[c]), w[v]) for c, v in zip(part.dynamical, dyn_vel)]
    pieces += [mul(-1, h, symbol(v)) for h, v in zip(h_mu, deg_vel)]
    pieces.append(mul(-1, substitute(L, w)))
    h0 = add(*pieces)
    _require_velocity_free(h0, model)

    params = (Parameter(model.time, names[model.time]),) + tuple(
        Parameter(c, names[c]) for c in part.degenerate)
    hams = (h0,) + tuple(h_mu)
    extended = tuple(add(symbol(p.momentum), h) for p, h in zip(params, hams))
    dynamical = tuple(DynamicalPair(c, names[c], w[v]) for c, v in zip(part.dynamical, dyn_vel))
    return HJSystem(model, dynamical, params, h0, hams, extended, part.rank, momenta)


def _require_velocity_free(h0: Expr, model: Model) -> None:
    for v in model.velocities:
        if v not in h0.free_symbols:
            continue
        if is_zero(differentiate(h0, v), model.assumptions) is not ZeroTest.ZERO:
            raise LegendreError(f"canonical Hamiltonian still depends on {v}: {h0}")
        raise LegendreError(f"canonical Hamiltonian keeps a spurious {v}: {h0}")


def equations_of_motion(sys: HJSystem) -> dict:
    """Coefficients of ``dt_alpha`` in the differential of every phase variable.

    Keys are ``(variable, parameter)``; variables are the dynamical
    coordinates and momenta, the parameter momenta, and the action ``z``.
    """
    table = {}
    pnames = sys.parameter_names
    for alpha, ext, ham in zip(pnames, sys.extended, sys.hamiltonians):
        action = [mul(-1, ham)]
        for d in sys.dynamical:
            dq = differentiate(ext, d.momentum)
            table[(d.coordinate, alpha)] = dq
            table[(d.momentum, alpha)] = mul(-1, differentiate(ext, d.coordinate))
            action.append(mul(symbol(d.momentum), dq))
        for p in sys.parameters:
            table[(p.momentum, alpha)] = mul(-1, differentiate(ext, p.name))
        table[(ACTION, alpha)] = add(*action)
    return table


def energy_identity(sys: HJSystem) -> Expr:
    """``p_a w_a - H0 - L`` on the solved velocities; zero for a sound transform."""
    w = {velocity_name(d.coordinate): d.velocity for d in sys.dynamical}
    deg = [p for p in sys.parameters[1:]]
    # degenerate velocities are free; they drop out when H_mu vanishes
    parts = [mul(symbol(d.momentum), d.velocity) for d in sys.dynamical]
    parts += [mul(-1, h, symbol(velocity_name(p.name))) for p, h in zip(deg, sys.hamiltonians[1:])]
    return add(*parts, mul(-1, sys.h0), mul(-1, substitute(sys.model.lagrangian, w)))
