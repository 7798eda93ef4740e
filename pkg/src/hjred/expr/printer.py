"""Canonical text form of expressions; output is accepted by ``parse``."""

from __future__ import annotations

from fractions import Fraction

from .core import Add, Const, Expr, Symbol, _assemble, _content, poly_of, terms_of


def to_string(e: Expr) -> str:
    if isinstance(e, Add):
        return _format_sum(poly_of(e))
    if isinstance(e, Const):
        return _format_rational(e.value)
    coef, atoms = _single_term(e)
    return _format_term(coef, atoms, leading=True)


def _single_term(e: Expr):
    (mono, coef), = poly_of(e).items()
    return coef, mono


def _format_rational(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _format_exponent(r: Fraction) -> str:
    if r.denominator == 1 and r > 0:
        return str(r.numerator)
    return f"({_format_rational(r)})"


def _format_base(b: Expr) -> str:
    if isinstance(b, Symbol):
        return b.name
    if isinstance(b, Const):
        v = b.value
        if v.denominator == 1 and v > 0:
            return str(v.numerator)
        return f"({_format_rational(v)})"
    return f"({to_string(b)})"


def _format_atom(b: Expr, r: Fraction) -> str:
    if r == 1 and isinstance(b, Symbol):
        return b.name
    return f"{_format_base(b)}^{_format_exponent(r)}"


def _format_factors(atoms) -> str:
    return "*".join(_format_atom(b, r) for b, r in atoms)


def _format_term(coef: Fraction, atoms, leading: bool) -> str:
    """Format one term; the sign is included only when ``leading``."""
    sign = "-" if coef < 0 and leading else ""
    mag = abs(coef)
    if not atoms:
        return sign + _format_rational(mag)
    body = _format_factors(atoms)
    if mag == 1:
        return sign + body
    if mag.denominator == 1:
        return f"{sign}{mag.numerator}*{body}"
    return f"{sign}({_format_rational(mag)})*{body}"


def _format_sum(poly) -> str:
    content = _content(poly)
    # factor out a common fraction only when every coefficient shares its denominator
    shared = len({c.denominator for c in poly.values()}) == 1
    if content.denominator != 1 and len(poly) > 1 and shared:
        inner = {m: c / content for m, c in poly.items()}
        return f"({_format_rational(content)})*({_join_terms(inner)})"
    return _join_terms(poly)


def _join_terms(poly) -> str:
    pieces = []
    for coef, text in _display_groups(poly):
        if not pieces:
            pieces.append(("-" if coef < 0 else "") + text)
        else:
            pieces.append((" - " if coef < 0 else " + ") + text)
    return "".join(pieces)


def _display_groups(poly):
    """Yield ``(sign carrier, text)``, pooling terms that share power atoms."""
    items = terms_of(_assemble(poly))
    order = []
    groups = {}
    for mono, coef in items:
        shared = tuple(a for a in mono if isinstance(a[0], Add) and a[1] != 1)
        rest = tuple(a for a in mono if a not in shared)
        if shared not in groups:
            groups[shared] = []
            order.append(shared)
        groups[shared].append((rest, coef))
    for shared in order:
        members = groups[shared]
        if not shared or len(members) == 1:
            for rest, coef in members:
                mono = tuple(sorted(rest + shared, key=lambda a: (a[0]._key, a[1])))
                yield coef, _format_term(coef, mono, leading=False)
            continue
        cof = {rest: coef for rest, coef in members}
        cof_text = _format_sum(cof)
        yield 1, f"({cof_text})*{_format_factors(shared)}"
