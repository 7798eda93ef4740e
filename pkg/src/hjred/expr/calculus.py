"""Differentiation, substitution, polynomial views and Poisson brackets."""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import (
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Mul,
    Pow,
    Symbol,
    add,
    as_expr,
    mul,
    power,
)


def _name(s) -> str:
    return s.name if isinstance(s, Symbol) else str(s)


def differentiate(e: Expr, s) -> Expr:
    """Exact partial derivative of ``e`` with respect to symbol ``s``."""
    name = _name(s)
    return _diff(e, name, {})


def _diff(e: Expr, name: str, memo: dict) -> Expr:
    if name not in e.free_symbols:
        return ZERO
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Symbol):
        out = ONE
    elif isinstance(e, Add):
        out = add(*(_diff(t, name, memo) for t in e.terms))
    elif isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            if name not in f.free_symbols:
                continue
            parts.append(mul(*fs[:i], _diff(f, name, memo), *fs[i + 1:]))
        out = add(*parts)
    elif isinstance(e, Pow):
        r = e.exponent
        out = mul(Const(r), power(e.base, r - 1), _diff(e.base, name, memo))
    else:
        raise TypeError(type(e))
    memo[e] = out
    return out


def gradient(e: Expr, names: Sequence) -> list:
    return [differentiate(e, n) for n in names]


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution of symbols, followed by normalization."""
    table = {_name(k): as_expr(v) for k, v in bindings.items()}
    if not table or not (e.free_symbols & table.keys()):
        return e
    return _subs(e, table, {})


def _subs(e: Expr, table: dict, memo: dict) -> Expr:
    if not (e.free_symbols & table.keys()):
        return e
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Symbol):
        out = table[e.name]
    elif isinstance(e, Add):
        out = add(*(_subs(t, table, memo) for t in e.terms))
    elif isinstance(e, Mul):
        out = mul(*(_subs(f, table, memo) for f in e.factors))
    elif isinstance(e, Pow):
        out = power(_subs(e.base, table, memo), e.exponent)
    else:
        raise TypeError(type(e))
    memo[e] = out
    return out


def reduce_power(e: Expr, var, degree: int, replacement) -> Expr:
    """Rewrite every ``var^n`` with integer ``n >= degree`` using
    ``var^degree -> replacement``, also inside power bases."""
    name = _name(var)
    replacement = as_expr(replacement)
    return _reduce(e, name, degree, replacement, {})


def _reduce(e: Expr, name: str, k: int, repl: Expr, memo: dict) -> Expr:
    if name not in e.free_symbols:
        return e
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Symbol):
        out = repl if k == 1 else e
    elif isinstance(e, Add):
        out = add(*(_reduce(t, name, k, repl, memo) for t in e.terms))
    elif isinstance(e, Mul):
        out = mul(*(_reduce(f, name, k, repl, memo) for f in e.factors))
    elif isinstance(e, Pow):
        r = e.exponent
        if isinstance(e.base, Symbol) and r.denominator == 1 and r >= k:
            q, rem = divmod(int(r), k)
            out = mul(power(repl, q), power(e.base, rem))
        else:
            out = power(_reduce(e.base, name, k, repl, memo), r)
    else:
        raise TypeError(type(e))
    memo[e] = out
    return out


def polynomial_coefficients(e: Expr, var):
    """View ``e`` as a polynomial in ``var``.

    Returns ``{degree: coefficient}`` or ``None`` when ``var`` occurs with a
    non-integer or negative exponent, or inside a power base.
    """
    from .core import _mono_mul, build, poly_of

    name = _name(var)
    out = {}
    for mono, coef in poly_of(e).items():
        degree = 0
        rest = []
        for b, r in mono:
            if isinstance(b, Symbol) and b.name == name:
                if r.denominator != 1 or r < 0:
                    return None
                degree = int(r)
            elif name in b.free_symbols:
                return None
            else:
                rest.append((b, r))
        out.setdefault(degree, {})
        for m, c in _mono_mul(coef, rest).items():
            out[degree][m] = out[degree].get(m, 0) + c
    return {d: build(p) for d, p in sorted(out.items())}


def poisson_bracket(a: Expr, b: Expr, pairs: Sequence) -> Expr:
    """``sum_i (da/dq_i * db/dp_i - da/dp_i * db/dq_i)``."""
    if not pairs:
        raise ValueError("poisson_bracket needs at least one canonical pair")
    seen = set()
    for q, p in pairs:
        for s in (_name(q), _name(p)):
            if s in seen:
                raise ValueError(f"symbol {s!r} appears in more than one pair")
            seen.add(s)
    terms = []
    fa, fb = a.free_symbols, b.free_symbols
    for q, p in pairs:
        q, p = _name(q), _name(p)
        if q in fa and p in fb:
            terms.append(mul(differentiate(a, q), differentiate(b, p)))
        if p in fa and q in fb:
            terms.append(mul(-1, differentiate(a, p), differentiate(b, q)))
    return add(*terms)


def is_polynomial_in(e: Expr, names) -> bool:
    """True when every listed symbol enters with non-negative integer powers."""
    return all(polynomial_coefficients(e, n) is not None for n in names)
