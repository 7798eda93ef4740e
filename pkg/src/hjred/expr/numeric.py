"""Numeric evaluation, code generation and randomized zero testing."""

from __future__ import annotations

import enum
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .core import Add, Const, Expr, Mul, Pow, Symbol, poly_of
from .parser import ExprError

DEFAULT_SEED = 42
ZERO_THRESHOLD = 1e-8
SAMPLE_POINTS = 8
MAX_DRAWS = 100


class DomainError(ExprError, ValueError):
    """Even root of a negative value, or division by zero."""


class UnboundSymbolError(ExprError, LookupError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"symbol {name!r} has no value")


class NoAdmissiblePointError(ExprError):
    pass


def default_seed() -> int:
    """Sampling seed: ``HJRED_SEED`` if set, else 42."""
    raw = os.environ.get("HJRED_SEED")
    return int(raw) if raw not in (None, "") else DEFAULT_SEED


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _rpow(b, num: int, den: int):
    if den == 1:
        if num < 0 and b == 0:
            raise DomainError("division by zero")
        return b**num
    if b < 0:
        raise DomainError(f"negative base {float(b)!r} for fractional power {num}/{den}")
    if b == 0 and num < 0:
        raise DomainError("division by zero")
    if den == 2:
        root = b**0.5 if not isinstance(b, float) else math.sqrt(b)
        return root**num
    return b ** (num / den)


def eval_num(e: Expr, point: Mapping) -> float:
    """Evaluate in IEEE double precision."""
    values = {str(k): float(v) for k, v in point.items()}
    return float(_eval(e, values))


def _eval(e: Expr, values: dict) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Symbol):
        try:
            return values[e.name]
        except KeyError:
            raise UnboundSymbolError(e.name) from None
    if isinstance(e, Add):
        return math.fsum(_eval(t, values) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, values)
        return out
    if isinstance(e, Pow):
        r = e.exponent
        return _rpow(_eval(e.base, values), r.numerator, r.denominator)
    raise TypeError(type(e))


class _CodeGen:
    def __init__(self, args: Sequence[str]):
        self.local = {name: f"a{i}" for i, name in enumerate(args)}
        self.consts = {}

    def const(self, v: Fraction) -> str:
        if v not in self.consts:
            self.consts[v] = f"c{len(self.consts)}"
        return self.consts[v]

    def emit(self, e: Expr) -> str:
        if isinstance(e, Const):
            return self.const(e.value)
        if isinstance(e, Symbol):
            try:
                return self.local[e.name]
            except KeyError:
                raise UnboundSymbolError(e.name) from None
        if isinstance(e, Add):
            return "(" + " + ".join(self.emit(t) for t in e.terms) + ")"
        if isinstance(e, Mul):
            return "(" + "*".join(self.emit(f) for f in e.factors) + ")"
        if isinstance(e, Pow):
            r = e.exponent
            base = self.emit(e.base)
            if r.denominator == 1 and 0 < r <= 4:
                return "(" + "*".join([base] * int(r)) + ")"
            return f"_rpow({base}, {r.numerator}, {r.denominator})"
        raise TypeError(type(e))


def compile_exprs(exprs: Sequence[Expr], args: Sequence[str], number: Callable = float):
    """Compile expressions into ``f(*values) -> tuple``.

    ``number`` converts rational constants (``float`` or ``numpy.longdouble``);
    the generated code uses only arithmetic operators, so it keeps the
    precision of its inputs.
    """
    gen = _CodeGen(list(args))
    bodies = [gen.emit(e) for e in exprs]
    params = ", ".join(gen.local[a] for a in args)
    src = f"def _f({params}):\n    return ({', '.join(bodies)}{',' if len(bodies) == 1 else ''})\n"
    namespace = {"_rpow": _rpow}
    for v, name in gen.consts.items():
        namespace[name] = number(v.numerator) / number(v.denominator)
    exec(compile(src, "<hjred-codegen>", "exec"), namespace)
    return namespace["_f"]


def compile_expr(e: Expr, args: Sequence[str], number: Callable = float):
    f = compile_exprs([e], args, number)
    return lambda *vals: f(*vals)[0]


# ---------------------------------------------------------------------------
# zero testing
# ---------------------------------------------------------------------------


class ZeroTest(str, enum.Enum):
    ZERO = "provably-zero"
    NONZERO = "provably-nonzero"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Assumption:
    """Sign or exclusion predicate on one symbol: ``q2 > 0``."""

    symbol: str
    op: str
    value: Fraction

    def __post_init__(self):
        if self.op not in (">", "<", "!="):
            raise ValueError(f"unsupported assumption operator {self.op!r}")
        object.__setattr__(self, "value", Fraction(self.value))

    def holds(self, x: float) -> bool:
        v = float(self.value)
        if self.op == ">":
            return x > v
        if self.op == "<":
            return x < v
        return x != v

    def __str__(self):
        v = self.value
        text = str(v.numerator) if v.denominator == 1 else repr(float(v))
        return f"{self.symbol} {self.op} {text}"

    @classmethod
    def parse(cls, text: str) -> "Assumption":
        parts = text.split()
        if len(parts) != 3:
            raise ValueError(f"cannot parse assumption {text!r}")
        return cls(parts[0], parts[1], Fraction(parts[2]))


def _draw(rng: random.Random, name: str, rules: dict) -> float:
    rule = rules.get(name)
    if rule is None:
        return rng.uniform(-2.0, 2.0)
    lo, hi = rule
    return rng.uniform(lo, hi)


def _sampling_boxes(assumptions: Sequence[Assumption]) -> dict:
    boxes = {}
    for a in assumptions:
        lo, hi = boxes.get(a.symbol, (-2.0, 2.0))
        v = float(a.value)
        if a.op == ">":
            lo, hi = v, max(hi, v + 2.0)
            lo = max(lo, v)
            hi = v + 2.0 if hi <= lo else hi
        elif a.op == "<":
            hi = v
            lo = min(lo, v - 2.0)
        boxes[a.symbol] = (lo, hi)
    return boxes


def sample_points(names: Sequence[str], assumptions: Sequence[Assumption] = (),
                  count: int = SAMPLE_POINTS, seed: int = None,
                  accept: Callable = None, fixed: Mapping = None):
    """Deterministic pseudo-random admissible points.

    ``accept(point)`` may reject a point (return False or raise
    ``DomainError``/``ZeroDivisionError``); rejected points are redrawn.
    """
    rng = random.Random(default_seed() if seed is None else seed)
    boxes = _sampling_boxes(assumptions)
    by_symbol = {}
    for a in assumptions:
        by_symbol.setdefault(a.symbol, []).append(a)
    fixed = dict(fixed or {})
    names = sorted(n for n in names if n not in fixed)
    points = []
    failures = 0
    while len(points) < count:
        point = dict(fixed)
        for n in names:
            x = _draw(rng, n, boxes)
            while not all(a.holds(x) for a in by_symbol.get(n, ())):
                x = _draw(rng, n, boxes)
            point[n] = x
        try:
            ok = accept(point) if accept else True
        except (DomainError, ZeroDivisionError, OverflowError):
            ok = False
        if ok is False:
            failures += 1
            if failures >= MAX_DRAWS:
                raise NoAdmissiblePointError(
                    f"no admissible sample found in {MAX_DRAWS} draws")
            continue
        failures = 0
        points.append(point)
    return points


def is_zero(e: Expr, assumptions: Sequence[Assumption] = (), seed: int = None,
            fixed: Mapping = None) -> ZeroTest:
    """Tri-state zero test: normal form first, then numeric sampling."""
    if not poly_of(e):
        return ZeroTest.ZERO
    names = sorted(e.free_symbols)
    f = compile_expr(e, names)
    values = []

    def accept(point):
        v = f(*(point[n] for n in names))
        if not math.isfinite(v):
            return False
        values.append(v)
        return True

    sample_points(names, assumptions, SAMPLE_POINTS, seed, accept, fixed)
    if all(abs(v) > ZERO_THRESHOLD for v in values):
        return ZeroTest.NONZERO
    return ZeroTest.UNDECIDED
