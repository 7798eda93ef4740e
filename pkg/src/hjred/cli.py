"""Command-line front end: ``hjred analyze | simulate | spectrum | kernel``.

Exit codes: 0 success (integrable), 1 usage/file/parse errors, 2 inconsistent
chain or off-surface initial data, 3 undecided chain, 4 reduced Hamiltonian of
unrecognized form.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import __version__
from .chain import INCONSISTENT, UNDECIDED, BranchSolveError, analyze
from .dynamics import (
    DynamicsError,
    FrozenParameterError,
    OffSurfaceError,
    ParameterPath,
    action_residual,
    integrate,
)
from .expr import ExprError, default_seed
from .legendre import LegendreError, build_hj_system
from .model import ModelError, resolve_model
from .pathint import compare_to_operator, sliced_kernel, undersampled
from .quantize import Grid, QuantizeError, reduced_spectrum
from .report import SCHEMA, analysis_dict, analysis_text

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONSISTENT = 2
EXIT_UNDECIDED = 3
EXIT_UNRECOGNIZED = 4

SPECTRUM_PREVIEW = 10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _assignments(text: str) -> dict:
    """``a=1,b=2`` -> ``{"a": "1", "b": "2"}``."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"expected name=value, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def _float(text: str, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"{what}: {text!r} is not a number") from None
    if not math.isfinite(v):
        raise UsageError(f"{what}: {text!r} is not finite")
    return v


def _constants(items) -> dict:
    out = {}
    for item in items or ():
        for k, v in _assignments(item).items():
            try:
                out[k] = Fraction(v)
            except ValueError:
                raise UsageError(f"--const {k}: {v!r} is not a number") from None
    return out


def _emit(out, payload: dict) -> None:
    out.write(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def _pipeline(path: str):
    model = resolve_model(path)
    sys_ = build_hj_system(model)
    report = analyze(sys_)
    return model, sys_, report


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(args, out) -> int:
    model, sys_, report = _pipeline(args.model)
    data = analysis_dict(model, sys_, report)
    if args.json:
        _emit(out, data)
    else:
        out.write(analysis_text(data))
    return {INCONSISTENT: EXIT_INCONSISTENT, UNDECIDED: EXIT_UNDECIDED}.get(report.status, EXIT_OK)


def cmd_simulate(args, out, err) -> int:
    model, sys_, report = _pipeline(args.model)
    if report.status != "integrable":
        err.write(f"error: chain status is {report.status}; {report.message}\n")
        return EXIT_INCONSISTENT if report.status == INCONSISTENT else EXIT_UNDECIDED
    init = {k: _float(v, f"--init {k}") for k, v in _assignments(args.init).items()}
    span = _float(args.span, "--span")
    step = _float(args.step, "--step")
    if span < 0 or step <= 0:
        raise UsageError("--span must be non-negative and --step positive")
    constants = _constants(args.const)
    names = sys_.parameter_names
    time = names[0]
    start = []
    for n in names:
        if n == time:
            start.append(init.pop(n, 0.0))
        elif n in init:
            start.append(init.pop(n))
        else:
            raise UsageError(f"--init must give a value for the parameter {n}")
    path = ParameterPath.legs(names, start, [{time: span}])
    try:
        traj = integrate(sys_, report, init, path, step, constants)
    except OffSurfaceError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INCONSISTENT
    if args.out:
        traj.write_csv(args.out)
    residual = action_residual(traj, sys_)
    final = traj.final()
    summary = {
        "schema": SCHEMA,
        "model": model.name,
        "samples": len(traj.s),
        "span": span,
        "step": step,
        "max_drift": traj.drift,
        "max_abs": traj.max_abs,
        "action_residual": residual,
        "final": {k: float(v) for k, v in final.items()},
    }
    if args.json:
        _emit(out, summary)
        return EXIT_OK
    out.write(f"model {model.name}: {len(traj.s)} samples over {time} in "
              f"[{_fmt(start[0])}, {_fmt(start[0] + span)}] with step {_fmt(step)}\n")
    for label in traj.constraint_labels:
        out.write(f"max drift {label}: {_fmt(traj.drift[label])} "
                  f"(max |{label}| {_fmt(traj.max_abs[label])})\n")
    out.write(f"action residual: {_fmt(residual)}\n")
    out.write("final: " + ", ".join(f"{k}={_fmt(v)}" for k, v in final.items()) + "\n")
    if args.out:
        out.write(f"wrote {args.out}\n")
    return EXIT_OK


def cmd_spectrum(args, out, err) -> int:
    model, sys_, report = _pipeline(args.model)
    if report.status != "integrable":
        err.write(f"error: chain status is {report.status}; {report.message}\n")
        return EXIT_INCONSISTENT if report.status == INCONSISTENT else EXIT_UNDECIDED
    if not report.branches:
        err.write("error: no reduced Hamiltonian branch to quantize\n")
        return EXIT_UNRECOGNIZED
    if len(sys_.dynamical) != 1:
        err.write("error: spectra need exactly one reduced canonical pair\n")
        return EXIT_UNRECOGNIZED
    if args.branch:
        chosen = [i for i, b in enumerate(report.branches) if b.sign == args.branch]
    else:
        chosen = [i for i, b in enumerate(report.branches) if b.admissible]
    if not chosen:
        err.write("error: no matching admissible branch\n")
        return EXIT_UNRECOGNIZED
    branch = report.branches[chosen[0]]
    h = report.reduced_h0[chosen[0]]
    pair = sys_.dynamical[0]
    constants = dict(model.constant_values())
    constants.update(_constants(args.const))
    grid = Grid(args.grid, _float(args.extent, "--extent"))
    try:
        spec = reduced_spectrum(h, pair.coordinate, pair.momentum,
                                {k: float(v) for k, v in constants.items()},
                                grid.n, grid.extent, args.stencil)
    except QuantizeError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_UNRECOGNIZED
    if args.out:
        spec.write_csv(args.out)
    count = spec.count
    shown = spec.admissible if count != math.inf else spec.admissible[:SPECTRUM_PREVIEW]
    if args.json:
        _emit(out, {
            "schema": SCHEMA,
            "model": model.name,
            "branch": branch.sign,
            "reduced_h0": str(h),
            "function": str(spec.function),
            "grid": grid.n,
            "extent": grid.extent,
            "count": None if count == math.inf else count,
            "infinite": count == math.inf,
            "levels": [{"n": lv.n, "lambda": lv.oscillator, "g": lv.value} for lv in shown],
        })
        return EXIT_OK
    out.write(f"model {model.name}, branch {branch.sign}: H0 = {h}\n")
    out.write(f"g(w) = {spec.function} with w = {pair.momentum}^2 + {pair.coordinate}^2\n")
    out.write(f"grid {grid.n} points on [-{_fmt(grid.extent)}, {_fmt(grid.extent)}], "
              f"stencil {args.stencil}\n")
    out.write(f"admissible count: {'inf' if count == math.inf else count}\n")
    if count == math.inf:
        out.write(f"lowest {len(shown)} admissible levels:\n")
    for lv in shown:
        out.write(f"  n={lv.n} lambda={_fmt(lv.oscillator)} g={_fmt(lv.value)}\n")
    if args.out:
        out.write(f"wrote {args.out}\n")
    return EXIT_OK


def cmd_kernel(args, out, err) -> int:
    mass = _float(args.mass, "--mass")
    e = _float(args.e, "--e")
    beta = _float(args.beta, "--beta")
    extent = _float(args.extent, "--extent")
    if mass < 0 or e <= 0 or beta < 0 or args.slices < 1 or extent <= 0:
        raise UsageError("need --mass >= 0, --e > 0, --beta >= 0, --slices >= 1, --extent > 0")
    try:
        grid = Grid(args.grid, extent)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = []
    for slices in (args.slices, 2 * args.slices):
        k = sliced_kernel(mass, e, beta, slices, grid)
        rows.append((slices, compare_to_operator(k, mass, e, beta, grid, args.stencil)))
        if undersampled(e, beta, slices, grid):
            err.write(f"warning: slice width sqrt(e*beta/{slices}) is below the grid "
                      f"spacing {_fmt(grid.spacing)}; the sampled kernel aliases\n")
    ratio = rows[1][1] / rows[0][1] if rows[0][1] > 0 else math.nan
    if args.out:
        sliced_kernel(mass, e, beta, args.slices, grid).write_csv(args.out)
    if args.json:
        _emit(out, {
            "schema": SCHEMA,
            "mass": mass, "e": e, "beta": beta, "grid": grid.n, "extent": extent,
            "stencil": args.stencil,
            "errors": [{"slices": s, "max_error": v} for s, v in rows],
            "ratio": None if math.isnan(ratio) else ratio,
        })
        return EXIT_OK
    out.write(f"kernel m={_fmt(mass)} e={_fmt(e)} beta={_fmt(beta)} grid {grid.n} on "
              f"[-{_fmt(extent)}, {_fmt(extent)}], operator stencil {args.stencil}\n")
    for s, v in rows:
        out.write(f"slices {s}: max error {_fmt(v)}\n")
    out.write(f"error ratio ({rows[1][0]}/{rows[0][0]} slices): "
              f"{'undefined' if math.isnan(ratio) else _fmt(ratio)}\n")
    if args.out:
        out.write(f"wrote {args.out}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hjred", description="Hamilton-Jacobi analysis of singular Lagrangians.")
    p.add_argument("--version", action="version", version=f"hjred {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="derive constraints, branches and reduced Hamiltonians")
    a.add_argument("model", help="model file, or builtin:<name>")
    a.add_argument("--json", action="store_true")

    s = sub.add_parser("simulate", help="integrate the flow along the evolution parameter")
    s.add_argument("model")
    s.add_argument("--init", required=True, help="comma-separated name=value list")
    s.add_argument("--span", default="10")
    s.add_argument("--step", default="1e-3")
    s.add_argument("--out", help="trajectory CSV path")
    s.add_argument("--const", action="append", help="override constants, name=value")
    s.add_argument("--json", action="store_true")

    q = sub.add_parser("spectrum", help="quantized levels of the reduced Hamiltonian")
    q.add_argument("model")
    q.add_argument("--grid", type=int, default=512)
    q.add_argument("--extent", default="10")
    q.add_argument("--branch", choices=("+", "-"))
    q.add_argument("--stencil", choices=("sinc", "fd3"), default="sinc")
    q.add_argument("--const", action="append", help="override constants, name=value")
    q.add_argument("--out", help="spectrum CSV path")
    q.add_argument("--json", action="store_true")

    k = sub.add_parser("kernel", help="sliced path integral against the operator exponential")
    k.add_argument("--mass", default="1")
    k.add_argument("--e", default="1")
    k.add_argument("--beta", default="1")
    k.add_argument("--slices", type=int, default=256)
    k.add_argument("--grid", type=int, default=128)
    k.add_argument("--extent", default="8")
    k.add_argument("--stencil", choices=("sinc", "fd3"), default="fd3")
    k.add_argument("--out", help="kernel CSV path")
    k.add_argument("--json", action="store_true")
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        default_seed()
        if args.command == "analyze":
            return cmd_analyze(args, out)
        if args.command == "simulate":
            return cmd_simulate(args, out, err)
        if args.command == "spectrum":
            return cmd_spectrum(args, out, err)
        return cmd_kernel(args, out, err)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        err.write(f"error: {exc.strerror or exc}: {exc.filename}\n" if exc.filename
                  else f"error: {exc}\n")
        return EXIT_ERROR
    except (ModelError, ExprError, LegendreError, BranchSolveError, FrozenParameterError,
            DynamicsError, ValueError, ZeroDivisionError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)
