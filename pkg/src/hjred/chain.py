"""Integrability chain: generated constraints, frozen parameters, branches.

Each constraint is turned into a reduction rule ``v^k -> replacement`` for a
variable ``v`` whose leading coefficient is a nonzero constant.  Total
differentials are reduced with these rules before zero testing, so
"vanishes identically" means "vanishes on the current constraint surface".
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .expr import (
    ZERO,
    Expr,
    ZeroTest,
    add,
    is_zero,
    mul,
    poisson_bracket,
    polynomial_coefficients,
    power,
    reduce_power,
    compile_expr,
    sample_points,
    substitute,
    terms_of,
)
from .expr.core import Const
from .expr.numeric import NoAdmissiblePointError
from .legendre import HJSystem

_REDUCE_ROUNDS = 16

INTEGRABLE = "integrable"
INCONSISTENT = "inconsistent"
UNDECIDED = "undecided"

FIRST_CLASS = "first-class"
SECOND_CLASS = "second-class"
CENTRAL = "central"
UNRESOLVED = "unresolved"


class ChainError(Exception):
    pass


class BranchSolveError(ChainError):
    pass


@dataclass(frozen=True)
class Constraint:
    label: str
    expr: Expr
    origin: str = "primary"         # "primary" | "generated"
    parent: str = None              # label whose differential produced it
    parameter: str = None           # parameter whose coefficient produced it
    classification: str = None

    @property
    def provenance(self) -> str:
        if self.origin == "primary":
            return "primary"
        return f"generated-from({self.parent}, {self.parameter})"


@dataclass(frozen=True)
class Rule:
    variable: str
    degree: int
    replacement: Expr

    def apply(self, e: Expr) -> Expr:
        return reduce_power(e, self.variable, self.degree, self.replacement)

    def __str__(self):
        lhs = self.variable if self.degree == 1 else f"{self.variable}^{self.degree}"
        return f"{lhs} -> {self.replacement}"


@dataclass(frozen=True)
class Frozen:
    parameter: str
    reason: str
    coefficient: Expr


@dataclass(frozen=True)
class Branch:
    parameter: str
    sign: str          # "+" or "-"
    value: Expr
    source: str        # label of the constraint that was solved
    admissible: bool


@dataclass(frozen=True)
class Discrepancy:
    branch: str
    engine: Expr
    reference: Expr
    verdict: str       # "match" | "opposite-sign" | "differs"


@dataclass(frozen=True)
class PairBracket:
    first: str
    second: str
    bracket: Expr
    verdict: str       # "zero" | "central" | "second-class" | "unresolved"


@dataclass(frozen=True)
class ChainReport:
    constraints: tuple
    frozen: tuple
    branches: tuple
    reduced_h0: tuple
    status: str
    rules: tuple = ()
    offending: Expr = None
    message: str = ""
    brackets: tuple = ()
    discrepancies: tuple = ()

    def constraint(self, label: str) -> Constraint:
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def generated(self) -> tuple:
        return tuple(c for c in self.constraints if c.origin == "generated")

    @property
    def frozen_names(self) -> tuple:
        return tuple(f.parameter for f in self.frozen)

    def reduced_for(self, sign: str):
        for b, h in zip(self.branches, self.reduced_h0):
            if b.sign == sign:
                return h
        return None


# ---------------------------------------------------------------------------
# differentials and reduction
# ---------------------------------------------------------------------------


def total_differential(target: Expr, sys: HJSystem) -> dict:
    """Coefficient of each ``dt_alpha`` in ``d(target)`` along the flows."""
    return {alpha: poisson_bracket(target, ext, sys.pairs)
            for alpha, ext in zip(sys.parameter_names, sys.extended)}


def _variable_order(sys: HJSystem) -> list:
    return (list(sys.parameter_names[1:]) + list(sys.coordinate_names)
            + list(sys.momentum_names) + list(sys.parameter_momenta))


def _rule_for(expr: Expr, sys: HJSystem):
    order = _variable_order(sys)
    present = [v for v in order if v in expr.free_symbols]
    for degree in (1, 2):
        for v in present:
            poly = polynomial_coefficients(expr, v)
            if poly is None or set(poly) - {0, degree}:
                continue
            lead = poly.get(degree)
            if lead is None or not isinstance(lead, Const):
                continue
            rest = poly.get(0, ZERO)
            return Rule(v, degree, mul(Fraction(-1) / lead.value, rest))
    return None


def reduce_modulo(e: Expr, rules: Sequence[Rule]) -> Expr:
    for _ in range(_REDUCE_ROUNDS):
        before = e
        for r in rules:
            e = r.apply(e)
        if e == before:
            return e
    return e


def build_rules(constraints: Sequence[Constraint], sys: HJSystem) -> tuple:
    rules = []
    for c in constraints:
        reduced = reduce_modulo(c.expr, rules)
        if reduced.is_zero_constant():
            continue
        rule = _rule_for(reduced, sys)
        if rule is None:
            continue
        rules = [Rule(r.variable, r.degree, rule.apply(r.replacement)) for r in rules]
        rules.append(rule)
    return tuple(rules)


def normalize_sign(e: Expr, sys: HJSystem) -> Expr:
    """Fix the overall sign: most coefficients positive, ties broken by the
    first term in the earliest phase variable."""
    items = terms_of(e)
    pos = sum(1 for _, c in items if c > 0)
    neg = len(items) - pos
    if pos != neg:
        return e if pos > neg else mul(-1, e)
    order = list(sys.momentum_names) + list(sys.coordinate_names) + list(
        sys.parameter_names) + list(sys.parameter_momenta)
    for v in order:
        for mono, c in items:
            if any(v in b.free_symbols for b, _ in mono):
                return e if c > 0 else mul(-1, e)
    return e if items[0][1] > 0 else mul(-1, e)


# ---------------------------------------------------------------------------
# the chain
# ---------------------------------------------------------------------------


def _phase_free(e: Expr, sys: HJSystem) -> bool:
    return not (e.free_symbols & sys.phase_symbols)


def run_chain(sys: HJSystem, assumptions: Sequence = None) -> ChainReport:
    assumptions = tuple(sys.assumptions if assumptions is None else assumptions)
    pnames = sys.parameter_names
    time = pnames[0]
    constraints = [Constraint(f"H'_{i}", sys.extended[i]) for i in range(1, len(pnames))]
    limit = 2 * len(sys.model.coordinates)
    frozen = []

    def items():
        # primary constraints, then H'_0, then generated ones
        prim = [(c.label, c.expr) for c in constraints if c.origin == "primary"]
        gen = [(c.label, c.expr) for c in constraints if c.origin == "generated"]
        return prim + [("H'_0", sys.extended[0])] + gen

    def stop(status, rules, offending=None, message=""):
        return ChainReport(tuple(constraints), tuple(frozen), (), (), status,
                           tuple(rules), offending, message)

    # time coefficients: each nonzero one becomes a new constraint
    restart = True
    while restart:
        restart = False
        rules = build_rules(constraints, sys)
        for label, expr in items():
            coef = reduce_modulo(poisson_bracket(expr, sys.extended[0], sys.pairs), rules)
            if coef.is_zero_constant():
                continue
            verdict = is_zero(coef, assumptions)
            if verdict is ZeroTest.ZERO:
                continue
            if _phase_free(coef, sys):
                if verdict is ZeroTest.NONZERO:
                    return stop(INCONSISTENT, rules, coef,
                                f"d{label} has the nonzero constant coefficient {coef} along d{time}")
                return stop(UNDECIDED, rules, coef,
                            f"cannot decide whether {coef} vanishes")
            if len(constraints) >= limit:
                return stop(UNDECIDED, rules, coef,
                            f"more than {limit} constraints generated")
            new = normalize_sign(coef, sys)
            constraints.append(Constraint(f"H'_{len(constraints) + 1}", new, "generated",
                                          label, time))
            restart = True
            break

    # parameter coefficients: a provably nonzero one freezes the parameter
    rules = build_rules(constraints, sys)
    for label, expr in items():
        for alpha, ext in zip(pnames[1:], sys.extended[1:]):
            if alpha in [f.parameter for f in frozen]:
                continue
            coef = reduce_modulo(poisson_bracket(expr, ext, sys.pairs), rules)
            if coef.is_zero_constant():
                continue
            verdict = is_zero(coef, assumptions)
            if verdict is ZeroTest.ZERO:
                continue
            if verdict is ZeroTest.UNDECIDED:
                return stop(UNDECIDED, rules, coef,
                            f"cannot decide whether the d{alpha} coefficient {coef} of d{label} vanishes")
            where = ", ".join(str(a) for a in assumptions) or "no assumptions"
            frozen.append(Frozen(alpha, f"coefficient {coef} of d{alpha} in d{label} "
                                        f"is nonzero under {where}", coef))

    branches = _solve_branches(constraints, frozen, assumptions)
    reduced = tuple(substitute(sys.h0, {b.parameter: b.value}) for b in branches)
    report = ChainReport(tuple(constraints), tuple(frozen), branches, reduced, INTEGRABLE,
                         tuple(rules))
    return replace(report, discrepancies=_discrepancies(report, sys))


def _solve_branches(constraints, frozen, assumptions) -> tuple:
    out = []
    for f in frozen:
        source = next((c for c in constraints if f.parameter in c.expr.free_symbols), None)
        if source is None:
            continue
        poly = polynomial_coefficients(source.expr, f.parameter)
        if poly is None or max(poly) != 2:
            raise BranchSolveError(
                f"constraint {source.label} = {source.expr} is not quadratic in {f.parameter}")
        a, b, c = poly[2], poly.get(1, ZERO), poly.get(0, ZERO)
        if f.parameter in (a.free_symbols | b.free_symbols | c.free_symbols):
            raise BranchSolveError(f"cannot isolate {f.parameter} in {source.expr}")
        disc = add(mul(b, b), mul(-4, a, c))
        root = power(disc, Fraction(1, 2))
        den = power(mul(2, a), -1)
        # "+" labels the branch whose root term carries a plus sign
        flip = -1 if isinstance(a, Const) and a.value < 0 else 1
        for sign, s in (("+", flip), ("-", -flip)):
            value = mul(add(mul(-1, b), mul(s, root)), den)
            out.append(Branch(f.parameter, sign, value, source.label,
                              _admissible(f.parameter, value, assumptions)))
    return tuple(out)


def _admissible(name: str, value: Expr, assumptions) -> bool:
    relevant = [a for a in assumptions if a.symbol == name]
    if not relevant:
        return True
    names = sorted(value.free_symbols)
    f = compile_expr(value, names)
    values = []

    def accept(point):
        v = f(*(point[n] for n in names))
        values.append(v)
        return True

    try:
        sample_points(names, assumptions, 8, None, accept)
    except NoAdmissiblePointError:
        return False
    return all(a.holds(v) for v in values for a in relevant)


def _discrepancies(report: ChainReport, sys: HJSystem) -> tuple:
    out = []
    for b, h in zip(report.branches, report.reduced_h0):
        ref = sys.model.reference("reduced_h0", b.sign)
        if ref is None:
            continue
        if add(h, mul(-1, ref)).is_zero_constant():
            verdict = "match"
        elif add(h, ref).is_zero_constant():
            verdict = "opposite-sign"
        else:
            verdict = "differs"
        out.append(Discrepancy(b.sign, h, ref, verdict))
    return tuple(out)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def classify(report: ChainReport, sys: HJSystem, assumptions: Sequence = None) -> ChainReport:
    """Pairwise brackets of all constraints and a class for each constraint."""
    if report.status == INCONSISTENT:
        raise ChainError("cannot classify the constraints of an inconsistent chain")
    assumptions = tuple(sys.assumptions if assumptions is None else assumptions)
    rules = report.rules or build_rules(report.constraints, sys)
    cons = report.constraints
    brackets = []
    verdicts = {c.label: [] for c in cons}
    for i, a in enumerate(cons):
        for b in cons[i:]:
            br = reduce_modulo(poisson_bracket(a.expr, b.expr, sys.pairs), rules)
            if br.is_zero_constant():
                v = "zero"
            else:
                z = is_zero(br, assumptions)
                if z is ZeroTest.ZERO:
                    v = "zero"
                elif z is ZeroTest.UNDECIDED:
                    v = "unresolved"
                elif _phase_free(br, sys):
                    v = "central"
                else:
                    v = "second-class"
            brackets.append(PairBracket(a.label, b.label, br, v))
            verdicts[a.label].append(v)
            if b.label != a.label:
                verdicts[b.label].append(v)
    classified = []
    for c in cons:
        vs = set(verdicts[c.label])
        if vs <= {"zero"}:
            kind = FIRST_CLASS
        elif "unresolved" in vs:
            kind = UNRESOLVED
        elif "second-class" in vs:
            kind = SECOND_CLASS
        else:
            kind = CENTRAL
        classified.append(replace(c, classification=kind))
    return replace(report, constraints=tuple(classified), brackets=tuple(brackets))


def dirac_bracket(f: Expr, g: Expr, constraints: Sequence[Expr], pairs) -> Expr:
    """Dirac bracket for a constant (central) constraint matrix."""
    from .expr.linalg import solve

    n = len(constraints)
    matrix = [[poisson_bracket(a, b, pairs) for b in constraints] for a in constraints]
    for row in matrix:
        for entry in row:
            if not isinstance(entry, Const):
                raise ChainError("Dirac brackets are only built for a constant constraint matrix")
    fc = [poisson_bracket(f, c, pairs) for c in constraints]
    cg = [poisson_bracket(c, g, pairs) for c in constraints]
    # C^{-1} {c, g} by one exact solve
    y = solve(matrix, cg) if n else []
    correction = add(*(mul(fc[i], y[i]) for i in range(n)))
    return add(poisson_bracket(f, g, pairs), mul(-1, correction))


def analyze(sys: HJSystem) -> ChainReport:
    report = run_chain(sys)
    if report.status == INCONSISTENT:
        return report
    return classify(report, sys)
