"""Line-oriented model files describing a Lagrangian system.

One directive per line, ``#`` starts a comment::

    name disc
    coordinate q1 q2
    time t
    constant R 1
    assume q2 > 0
    reference reduced_h0 + (2/3)*(R^2 - p1^2 - q1^2)^(3/2)
    lagrangian q1_d^2/(4*q2) - q2*(q1^2 + q2^2/3 - R^2)

``lagrangian`` must be the last directive and appear exactly once.
``reference`` is optional and records a published reduced Hamiltonian for a
branch (``+`` or ``-``); analysis compares against it and flags mismatches.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .expr import Assumption, Expr, ParseError, SymbolTable, UnknownSymbolError, parse, velocity_name

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_NUMBERED = re.compile(r"[A-Za-z]+(\d+)\Z")
ACTION = "z"
BUILTIN_FILES = ("relativistic_particle.hj", "disc.hj", "punctured_plane.hj")


class ModelError(Exception):
    """Invalid model file; carries the 1-based line and column."""

    def __init__(self, message: str, line: int = None, column: int = None, source: str = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            if source:
                where = f"{source}: {where}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class Reference:
    """Published value of a quantity on one branch, kept for comparison."""

    quantity: str
    branch: str
    expr: Expr


@dataclass(frozen=True)
class Model:
    name: str
    coordinates: tuple
    time: str
    constants: dict
    lagrangian: Expr
    assumptions: tuple = ()
    references: tuple = ()
    lagrangian_text: str = field(default="", compare=False)

    @property
    def velocities(self) -> tuple:
        return tuple(velocity_name(c) for c in self.coordinates)

    def momentum_of(self, coordinate: str) -> str:
        return momentum_names(self.coordinates, self.time)[coordinate]

    @property
    def symbol_table(self) -> SymbolTable:
        table = SymbolTable()
        for c in self.coordinates:
            table.declare(c, "coordinate")
        for c in self.coordinates:
            table.declare(velocity_name(c), "velocity")
        for k in self.constants:
            table.declare(k, "constant")
        table.declare(self.time, "parameter")
        names = momentum_names(self.coordinates, self.time)
        for c in self.coordinates:
            table.declare(names[c], "momentum")
        table.declare(names[self.time], "momentum")
        if ACTION not in table:
            table.declare(ACTION, "action")
        return table

    def constant_values(self) -> dict:
        return {k: v for k, v in self.constants.items() if v is not None}

    def reference(self, quantity: str, branch: str):
        for r in self.references:
            if r.quantity == quantity and r.branch == branch:
                return r.expr
        return None


def momentum_names(coordinates, time: str) -> dict:
    """Conjugate momentum names: ``q1 -> p1``, ``x0 -> p0``, else ``p_<name>``."""
    out = {}
    taken = set(coordinates) | {time}
    for c in coordinates:
        m = _NUMBERED.match(c)
        name = f"p{m.group(1)}" if m else f"p_{c}"
        if name in taken or name in out.values():
            name = f"p_{c}"
        out[c] = name
    out[time] = f"p_{time}"
    return out


def _decimal(text: str, line: int, column: int) -> Fraction:
    try:
        return Fraction(Decimal(text))
    except (InvalidOperation, ValueError):
        raise ModelError(f"expected a decimal number, got {text!r}", line, column) from None


def _format_decimal(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return repr(float(v))


def loads(text: str, source: str = None) -> Model:
    """Parse and validate model text."""
    name = None
    coordinates = []
    time = None
    constants = {}
    assumptions = []
    references = []
    pending_refs = []
    lagrangian = None
    declared = {}

    def fail(msg, line, col=None):
        raise ModelError(msg, line, col, source)

    def declare(ident, kind, line, col):
        if not _IDENT.match(ident):
            fail(f"invalid identifier {ident!r}", line, col)
        if ident.endswith("_d") and kind != "velocity":
            fail(f"identifier {ident!r} clashes with the velocity suffix", line, col)
        if ident in declared:
            fail(f"duplicate declaration of {ident!r} (first declared on line {declared[ident]})",
                 line, col)
        declared[ident] = line

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        indent = len(body) - len(body.lstrip())
        if lagrangian is not None:
            fail("'lagrangian' must be the last directive", lineno, indent + 1)
        keyword, _, rest = stripped.partition(" ")
        rest_col = indent + len(keyword) + 2 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        words = rest.split()

        def col_of(i):
            pos = 0
            for j, w in enumerate(words):
                pos = rest.index(w, pos)
                if j == i:
                    return rest_col + pos
                pos += len(w)
            return rest_col

        if keyword == "name":
            if name is not None:
                fail("duplicate 'name' directive", lineno, indent + 1)
            if not rest:
                fail("'name' needs a value", lineno, indent + 1)
            name = rest
        elif keyword == "coordinate":
            if not words:
                fail("'coordinate' needs at least one identifier", lineno, indent + 1)
            for i, w in enumerate(words):
                declare(w, "coordinate", lineno, col_of(i))
                coordinates.append(w)
        elif keyword == "time":
            if len(words) != 1:
                fail("'time' takes exactly one identifier", lineno, indent + 1)
            if time is not None:
                fail("duplicate 'time' directive", lineno, indent + 1)
            declare(words[0], "parameter", lineno, col_of(0))
            time = words[0]
        elif keyword == "constant":
            if len(words) not in (1, 2):
                fail("'constant' takes an identifier and an optional value", lineno, indent + 1)
            declare(words[0], "constant", lineno, col_of(0))
            constants[words[0]] = _decimal(words[1], lineno, col_of(1)) if len(words) == 2 else None
        elif keyword == "assume":
            if len(words) != 3 or words[1] not in (">", "<", "!="):
                fail("expected 'assume <ident> (>|<|!=) <decimal>'", lineno, indent + 1)
            assumptions.append((words[0], words[1], _decimal(words[2], lineno, col_of(2)),
                                lineno, col_of(0)))
        elif keyword == "reference":
            if len(words) < 3 or words[1] not in ("+", "-"):
                fail("expected 'reference <quantity> (+|-) <expression>'", lineno, indent + 1)
            expr_text = rest.split(None, 2)[2]
            pending_refs.append((words[0], words[1], expr_text, lineno, col_of(2)))
        elif keyword == "lagrangian":
            if not rest:
                fail("'lagrangian' needs an expression", lineno, indent + 1)
            lagrangian = (rest, lineno, rest_col)
        else:
            fail(f"unknown directive {keyword!r}", lineno, indent + 1)

    if lagrangian is None:
        raise ModelError("missing 'lagrangian' directive", source=source)
    if not coordinates:
        raise ModelError("at least one coordinate is required", source=source)
    if time is None:
        raise ModelError("missing 'time' directive", source=source)

    momenta = momentum_names(coordinates, time)
    for c, p in momenta.items():
        if p in declared:
            raise ModelError(f"{p!r} is reserved for the momentum of {c!r}",
                             declared[p], None, source)

    known = set(coordinates) | set(constants) | {velocity_name(c) for c in coordinates}
    for sym, op, value, line, col in assumptions:
        if sym not in known and sym != time:
            fail(f"assumption on undeclared symbol {sym!r}", line, col)

    ltext, lline, lcol = lagrangian
    try:
        lexpr = parse(ltext, known | {time})
    except UnknownSymbolError as err:
        fail(f"undeclared symbol {err.name!r} in lagrangian", lline, lcol + err.position)
    except ParseError as err:
        fail(f"lagrangian: {err.message}", lline, lcol + err.position)
    except ZeroDivisionError:
        fail("lagrangian divides by zero", lline, lcol)
    if time in lexpr.free_symbols:
        fail(f"lagrangian depends explicitly on the time parameter {time!r}; "
             "only autonomous systems are supported", lline, lcol)

    phase_names = known | set(momenta.values())
    for quantity, branch, expr_text, line, col in pending_refs:
        try:
            rexpr = parse(expr_text, phase_names)
        except ParseError as err:
            fail(f"reference: {err.message}", line, col + err.position)
        references.append(Reference(quantity, branch, rexpr))

    return Model(
        name=name or "unnamed",
        coordinates=tuple(coordinates),
        time=time,
        constants=constants,
        lagrangian=lexpr,
        assumptions=tuple(Assumption(s, op, v) for s, op, v, _, _ in assumptions),
        references=tuple(references),
        lagrangian_text=ltext,
    )


def load_model(path) -> Model:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as err:
        raise ModelError(f"{path}: not valid UTF-8 ({err.reason})") from None
    return loads(text, source=str(path))


def dumps(model: Model) -> str:
    lines = [f"name {model.name}", "coordinate " + " ".join(model.coordinates), f"time {model.time}"]
    for k, v in model.constants.items():
        lines.append(f"constant {k}" + ("" if v is None else f" {_format_decimal(v)}"))
    for a in model.assumptions:
        lines.append(f"assume {a.symbol} {a.op} {_format_decimal(a.value)}")
    for r in model.references:
        lines.append(f"reference {r.quantity} {r.branch} {r.expr}")
    lines.append(f"lagrangian {model.lagrangian}")
    return "\n".join(lines) + "\n"


def save_model(model: Model, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def builtin_model_path(filename: str):
    return resources.files("hjred") / "data" / filename


def builtin_models() -> list:
    """The relativistic particle, the disc system and the punctured plane."""
    out = []
    for filename in BUILTIN_FILES:
        ref = builtin_model_path(filename)
        out.append(loads(ref.read_text(encoding="utf-8"), source=filename))
    return out


def resolve_model(spec: str) -> Model:
    """Load ``builtin:<name>`` or a file path."""
    if spec.startswith("builtin:"):
        wanted = spec.split(":", 1)[1]
        for filename in BUILTIN_FILES:
            if filename[:-3] == wanted:
                ref = builtin_model_path(filename)
                return loads(ref.read_text(encoding="utf-8"), source=filename)
        raise ModelError(f"no builtin model named {wanted!r}")
    return load_model(spec)
