"""Exact symbolic expressions over rationals with rational powers."""

from .calculus import (
    differentiate,
    gradient,
    is_polynomial_in,
    poisson_bracket,
    polynomial_coefficients,
    reduce_power,
    substitute,
)
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
    coefficient_content,
    const,
    from_terms,
    mul,
    normalize,
    power,
    sqrt,
    symbol,
    symbols,
    terms_of,
)
from .numeric import (
    Assumption,
    DomainError,
    NoAdmissiblePointError,
    UnboundSymbolError,
    ZeroTest,
    compile_expr,
    compile_exprs,
    default_seed,
    eval_num,
    is_zero,
    sample_points,
)
from .parser import ExprError, ParseError, UnknownSymbolError, parse
from .printer import to_string
from .symbols import SymbolTable, velocity_name

__all__ = [name for name in dir() if not name.startswith("_")]
