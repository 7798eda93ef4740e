"""Integration of the total differential equations along parameter paths.

The state holds the dynamical coordinates and momenta, the momenta of all
parameters and the action ``z``.  Arithmetic runs in ``numpy.longdouble`` so
that the O(step^4) truncation error of RK4 stays visible above roundoff for
the step sizes used in practice.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import simpson

from .chain import ChainReport
from .expr import Expr, compile_exprs, differentiate, eval_num, substitute, velocity_name
from .legendre import HJSystem, equations_of_motion
from .model import ACTION

SURFACE_TOLERANCE = 1e-10
REAL = np.longdouble


class DynamicsError(Exception):
    pass


class OffSurfaceError(DynamicsError):
    def __init__(self, label: str, value: float):
        self.label = label
        self.value = value
        super().__init__(f"initial point violates {label}: |{value!r}| > {SURFACE_TOLERANCE!r}")


class FrozenParameterError(DynamicsError):
    pass


@dataclass(frozen=True)
class ParameterPath:
    """Piecewise-linear path through parameter space.

    ``waypoints`` are tuples aligned with ``names``; the curve parameter
    ``s`` runs over [0, 1] proportionally to Euclidean arclength.
    """

    names: tuple
    waypoints: tuple

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("a path needs at least one waypoint")
        for w in self.waypoints:
            if len(w) != len(self.names):
                raise ValueError("waypoint size does not match the parameter names")

    @classmethod
    def legs(cls, names, start, moves: Sequence[Mapping] = ()) -> "ParameterPath":
        """Start point plus successive increments ``{name: delta}``."""
        names = tuple(names)
        points = [tuple(float(v) for v in start)]
        for move in moves:
            cur = list(points[-1])
            for k, dv in move.items():
                cur[names.index(k)] += dv
            points.append(tuple(cur))
        return cls(names, tuple(points))

    @property
    def segments(self) -> list:
        return list(zip(self.waypoints[:-1], self.waypoints[1:]))

    def lengths(self) -> list:
        return [math.dist(a, b) for a, b in self.segments]

    def varies(self, name: str) -> bool:
        i = self.names.index(name)
        return any(w[i] != self.waypoints[0][i] for w in self.waypoints)

    def only_along(self, name: str) -> bool:
        i = self.names.index(name)
        return all(w[j] == self.waypoints[0][j]
                   for w in self.waypoints for j in range(len(self.names)) if j != i)


@dataclass
class Trajectory:
    parameter_names: tuple
    coordinate_names: tuple
    momentum_names: tuple          # dynamical momenta, then parameter momenta
    s: np.ndarray
    parameters: np.ndarray         # (samples, parameters)
    coordinates: np.ndarray        # (samples, dynamical coordinates)
    momenta: np.ndarray            # (samples, momenta)
    z: np.ndarray
    constraint_labels: tuple
    constraint_values: np.ndarray  # (samples, constraints)
    path: ParameterPath
    constants: dict

    @property
    def drift(self) -> dict:
        """Largest change of each constraint from its initial value."""
        delta = np.abs(self.constraint_values - self.constraint_values[0])
        return {lab: float(delta[:, i].max()) for i, lab in enumerate(self.constraint_labels)}

    @property
    def max_abs(self) -> dict:
        return {lab: float(np.abs(self.constraint_values[:, i]).max())
                for i, lab in enumerate(self.constraint_labels)}

    def column(self, name: str) -> np.ndarray:
        if name in self.parameter_names:
            return self.parameters[:, self.parameter_names.index(name)]
        if name in self.coordinate_names:
            return self.coordinates[:, self.coordinate_names.index(name)]
        if name in self.momentum_names:
            return self.momenta[:, self.momentum_names.index(name)]
        if name == ACTION:
            return self.z
        raise KeyError(name)

    def final(self) -> dict:
        names = self.parameter_names + self.coordinate_names + self.momentum_names + (ACTION,)
        return {n: self.column(n)[-1] for n in names}

    def header(self) -> list:
        return ["s", *self.parameter_names, *self.coordinate_names, *self.momentum_names, ACTION]

    def rows(self):
        for i in range(len(self.s)):
            yield [self.s[i], *self.parameters[i], *self.coordinates[i], *self.momenta[i], self.z[i]]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(self.header())
            for row in self.rows():
                out.writerow([format(float(v), ".17g") for v in row])


def bind_constants(sys: HJSystem, constants: Mapping = None) -> dict:
    """Exact values for every model constant; overrides win over the file."""
    values = dict(sys.model.constant_values())
    for k, v in (constants or {}).items():
        if k not in sys.model.constants:
            raise DynamicsError(f"unknown constant {k!r}")
        values[k] = v if isinstance(v, Fraction) else Fraction(str(v))
    missing = sorted(set(sys.model.constants) - set(values))
    if missing:
        raise DynamicsError(f"constants without values: {', '.join(missing)}")
    return values


class _Flows:
    """Compiled flow coefficients and constraints with constants bound."""

    def __init__(self, sys: HJSystem, report: ChainReport, bind: dict):
        self.q = sys.coordinate_names
        self.p = sys.momentum_names
        self.t = sys.parameter_names
        self.pt = sys.parameter_momenta
        self.state = self.q + self.p + self.pt + (ACTION,)
        self.args = self.q + self.p + self.t + self.pt
        eom = equations_of_motion(sys)
        self.flows = {
            alpha: compile_exprs([substitute(eom[(v, alpha)], bind) for v in self.state],
                                 self.args, REAL)
            for alpha in self.t
        }
        self.labels = tuple(c.label for c in report.constraints)
        exprs = [substitute(c.expr, bind) for c in report.constraints]
        self._constraints = compile_exprs(exprs, self.args, REAL) if exprs else None

    def call_args(self, y, tvals) -> list:
        nq, npn, npt = len(self.q), len(self.p), len(self.pt)
        return [*y[:nq], *y[nq:nq + npn], *tvals, *y[nq + npn:nq + npn + npt]]

    def constraints(self, y, tvals) -> tuple:
        if self._constraints is None:
            return ()
        return self._constraints(*self.call_args(y, tvals))


def initial_state(sys: HJSystem, init: Mapping, bind: dict) -> dict:
    """Complete ``init`` with ``p_alpha = -H_alpha`` and ``z = 0`` where absent."""
    point = {k: float(v) for k, v in init.items()}
    env = dict(point)
    env.update({k: float(v) for k, v in bind.items()})
    for par, ham in zip(sys.parameters, sys.hamiltonians):
        if par.momentum not in point:
            point[par.momentum] = 0.0 - eval_num(ham, env)
    point.setdefault(ACTION, 0.0)
    return point


def integrate(sys: HJSystem, report: ChainReport, init: Mapping, path: ParameterPath,
              step: float, constants: Mapping = None) -> Trajectory:
    """Classic RK4 in the path parameter, about one step per ``step`` of arclength."""
    if not step > 0:
        raise ValueError("step must be positive")
    if tuple(path.names) != sys.parameter_names:
        raise ValueError(f"path parameters {path.names} do not match {sys.parameter_names}")
    for name in report.frozen_names:
        if path.varies(name):
            raise FrozenParameterError(f"the path varies the frozen parameter {name}")
    bind = bind_constants(sys, constants)
    flows = _Flows(sys, report, bind)

    start = dict(init)
    for i, name in enumerate(path.names):
        if name in start and float(start[name]) != path.waypoints[0][i]:
            raise ValueError(f"initial {name}={start[name]} differs from the path start")
        start[name] = path.waypoints[0][i]
    missing = sorted(set(flows.q + flows.p) - set(start))
    if missing:
        raise DynamicsError(f"initial values missing for {', '.join(missing)}")
    point = initial_state(sys, start, bind)
    unknown = sorted(set(point) - set(flows.state) - set(flows.t))
    if unknown:
        raise DynamicsError(f"unknown initial values: {', '.join(unknown)}")

    y = np.array([REAL(point[n]) for n in flows.state], dtype=REAL)
    t0 = np.array(path.waypoints[0], dtype=REAL)
    for label, v in zip(flows.labels, flows.constraints(y, t0)):
        if abs(float(v)) > SURFACE_TOLERANCE:
            raise OffSurfaceError(label, float(v))

    lengths = path.lengths()
    total = sum(lengths)
    s_list, t_list, y_list = [0.0], [t0], [y]
    walked = 0.0
    for (a, b), length in zip(path.segments, lengths):
        if length == 0:
            continue
        a = np.array(a, dtype=REAL)
        end = np.array(b, dtype=REAL)
        delta = end - a
        active = [(flows.flows[flows.t[k]], delta[k]) for k in range(len(delta)) if delta[k] != 0]

        def rhs(yv, sigma):
            args = flows.call_args(yv, a + sigma * delta)
            out = np.zeros_like(yv)
            for f, dk in active:
                out += dk * np.array(f(*args), dtype=REAL)
            return out

        n = max(1, int(round(length / step)))
        h = REAL(1) / REAL(n)
        for i in range(n):
            sig = i * h
            k1 = rhs(y, sig)
            k2 = rhs(y + h / 2 * k1, sig + h / 2)
            k3 = rhs(y + h / 2 * k2, sig + h / 2)
            k4 = rhs(y + h * k3, sig + h)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            frac = (i + 1) / n
            t_list.append(end if i + 1 == n else a + (i + 1) * h * delta)
            y_list.append(y)
            s_list.append((walked + frac * length) / total)
        walked += length

    ys = np.array(y_list, dtype=REAL)
    ts = np.array(t_list, dtype=REAL)
    cvals = np.array([flows.constraints(ys[i], ts[i]) for i in range(len(ys))],
                     dtype=REAL).reshape(len(ys), len(flows.labels))
    nq = len(flows.q)
    return Trajectory(
        parameter_names=flows.t,
        coordinate_names=flows.q,
        momentum_names=flows.p + flows.pt,
        s=np.array(s_list),
        parameters=ts,
        coordinates=ys[:, :nq],
        momenta=ys[:, nq:-1],
        z=ys[:, -1],
        constraint_labels=flows.labels,
        constraint_values=cvals,
        path=path,
        constants=bind,
    )


def action_residual(traj: Trajectory, sys: HJSystem) -> float:
    """``|z(end) - z(0) - integral of L dt|`` with velocities read off the flow."""
    time = traj.parameter_names[0]
    if not traj.path.only_along(time):
        raise ValueError("action_residual needs a path along the evolution parameter only")
    if len(traj.s) < 2:
        return 0.0
    model = sys.model
    bind = traj.constants
    velocity = {velocity_name(d.coordinate): substitute(d.velocity, bind) for d in sys.dynamical}
    lag = substitute(substitute(model.lagrangian, bind), velocity)
    # parameters other than time stay fixed, so their velocities vanish
    lag = substitute(lag, {velocity_name(n): 0 for n in traj.parameter_names[1:]})
    names = traj.coordinate_names + traj.momentum_names + traj.parameter_names
    f = compile_exprs([lag], names, REAL)
    cols = [traj.column(n) for n in names]
    values = np.array([f(*(c[i] for c in cols))[0] for i in range(len(traj.s))], dtype=float)
    times = np.asarray(traj.column(time), dtype=float)
    integral = simpson(values, x=times)
    return abs(float(traj.z[-1] - traj.z[0]) - float(integral))


@dataclass(frozen=True)
class GaugeOrbitResult:
    observable_mismatch: float
    orbit_alignment: float
    coordinate_gap: float


def gauge_orbit_check(sys: HJSystem, report: ChainReport, init: Mapping, dtau: float,
                      de: float, step: float = 1e-3, constants: Mapping = None):
    """Integrate two orderings of a two-parameter move and compare them.

    Returns ``(observable mismatch, sine of the angle between the coordinate
    gap and the flow direction of the evolution parameter)``.
    """
    if len(sys.parameters) != 2:
        raise ValueError("gauge_orbit_check needs exactly two parameters")
    time, other = sys.parameter_names
    start = [float(init.get(time, 0.0)), float(init[other])]
    base = {k: v for k, v in init.items() if k not in (time, other)}
    first = ParameterPath.legs((time, other), start, [{time: dtau}, {other: de}])
    second = ParameterPath.legs((time, other), start, [{other: de}, {time: dtau}])
    a = integrate(sys, report, base, first, step, constants)
    b = integrate(sys, report, base, second, step, constants)

    fa, fb = a.final(), b.final()
    observables = [fa[n] - fb[n] for n in sys.momentum_names]
    observables += list(a.constraint_values[-1] - b.constraint_values[-1])
    mismatch = max((abs(float(v)) for v in observables), default=0.0)

    gap = np.array([float(fa[n] - fb[n]) for n in sys.coordinate_names])
    bind = a.constants
    env = {k: float(v) for k, v in fa.items()}
    env.update({k: float(v) for k, v in bind.items()})
    direction = np.array([eval_num(differentiate(sys.extended[0], d.momentum), env)
                          for d in sys.dynamical])
    norm_gap = float(np.linalg.norm(gap))
    norm_dir = float(np.linalg.norm(direction))
    if norm_gap == 0.0 or norm_dir == 0.0:
        return GaugeOrbitResult(mismatch, 0.0, norm_gap)
    unit = direction / norm_dir
    perp = gap - np.dot(gap, unit) * unit
    return GaugeOrbitResult(mismatch, float(np.linalg.norm(perp)) / norm_gap, norm_gap)


def hamiltonian_flow(hamiltonian: Expr, coordinate: str, momentum: str, init: Mapping,
                     span: float, step: float, constants: Mapping = None):
    """RK4 for Hamilton's equations of a one-pair Hamiltonian.

    Returns ``(times, q, p)`` arrays.
    """
    h = substitute(hamiltonian, {k: Fraction(str(v)) for k, v in (constants or {}).items()})
    extra = sorted(h.free_symbols - {coordinate, momentum})
    if extra:
        raise DynamicsError(f"unbound symbols in the Hamiltonian: {', '.join(extra)}")
    f = compile_exprs([differentiate(h, momentum), -differentiate(h, coordinate)],
                      (coordinate, momentum), REAL)
    n = max(0, int(round(span / step)))
    dt = REAL(span) / REAL(n) if n else REAL(0)
    y = np.array([REAL(init[coordinate]), REAL(init[momentum])], dtype=REAL)

    def rhs(v):
        return np.array(f(v[0], v[1]), dtype=REAL)

    out = [y]
    for _ in range(n):
        k1 = rhs(y)
        k2 = rhs(y + dt / 2 * k1)
        k3 = rhs(y + dt / 2 * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y)
    arr = np.array(out, dtype=REAL)
    times = np.arange(n + 1, dtype=REAL) * dt
    return times, arr[:, 0], arr[:, 1]
