"""Immutable symbolic expressions kept in a canonical sum-of-products form.

Every public constructor and arithmetic operator returns a normalized
expression, so two expressions are mathematically equal on the fixture class
exactly when their normal forms are equal.  The normal form is:

* sums of terms ``coefficient * atom * atom ...`` with like terms collected;
* atoms are symbols or powers ``base^r`` with an exact rational exponent;
* a power of a multi-term base with a positive integer exponent is expanded;
* bases of non-integer or negative powers carry no rational content, so
  ``(2*x + 2*y)^-1`` becomes ``(1/2)*(x + y)^-1``;
* within a sum, all terms carrying the same multi-term base raised to
  exponents that differ by integers are pooled and the cofactor is divided by
  the base as often as it goes exactly.  This is what makes
  ``u*u^(1/2) - u^(3/2)`` collapse to zero.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, Fraction]

# Monomials are tuples of (base, exponent) atoms sorted by base key; a Poly
# maps monomials to nonzero rational coefficients.
Mono = tuple
Poly = dict

_ABSORB_PASSES = 8
_DIVISION_STEPS = 4096
_TRIAL_PRIMES_LIMIT = 10_000


class Expr:
    """Base class of all expression nodes.  Instances are immutable."""

    __slots__ = ("_key", "_hash", "_poly", "_free")

    def __init__(self, key):
        self._key = key
        self._hash = hash(key)
        self._poly = None
        self._free = None

    # identity -------------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Expr) and self._key == other._key

    def __hash__(self):
        return self._hash

    def sort_key(self):
        return self._key

    @property
    def free_symbols(self) -> frozenset:
        if self._free is None:
            self._free = frozenset(self._compute_free())
        return self._free

    def _compute_free(self):
        return ()

    @property
    def args(self) -> tuple:
        return ()

    def is_constant(self) -> bool:
        return isinstance(self, Const)

    def is_zero_constant(self) -> bool:
        return isinstance(self, Const) and self.value == 0

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, mul(-1, other))

    def __rsub__(self, other):
        return add(other, mul(-1, self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __neg__(self):
        return mul(-1, self)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        return power(self, exponent)

    # display --------------------------------------------------------------
    def __str__(self):
        from .printer import to_string

        return to_string(self)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"


class Const(Expr):
    """Exact rational constant."""

    __slots__ = ("value",)

    def __init__(self, value: Number):
        value = Fraction(value)
        self.value = value
        super().__init__((0, value))


class Symbol(Expr):
    """Named scalar symbol."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        super().__init__((1, name))

    def _compute_free(self):
        return (self.name,)


class Pow(Expr):
    """``base ** exponent`` with an exact rational exponent."""

    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Fraction):
        self.base = base
        self.exponent = Fraction(exponent)
        super().__init__((2, base._key, self.exponent))

    @property
    def args(self):
        return (self.base,)

    def _compute_free(self):
        return self.base.free_symbols


class Mul(Expr):
    """Product; an optional leading ``Const`` coefficient then atoms."""

    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        self.factors = tuple(factors)
        super().__init__((3, tuple(f._key for f in self.factors)))

    @property
    def args(self):
        return self.factors

    def _compute_free(self):
        out = set()
        for f in self.factors:
            out |= f.free_symbols
        return out


class Add(Expr):
    """Sum of at least two terms in canonical order."""

    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        self.terms = tuple(terms)
        super().__init__((4, tuple(t._key for t in self.terms)))

    @property
    def args(self):
        return self.terms

    def _compute_free(self):
        out = set()
        for t in self.terms:
            out |= t.free_symbols
        return out


ZERO = Const(0)
ONE = Const(1)


# ---------------------------------------------------------------------------
# conversion between trees and polys
# ---------------------------------------------------------------------------


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, Fraction)):
        return Const(value)
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def poly_of(e: Expr) -> Poly:
    """The term dictionary of a normalized expression (cached)."""
    if e._poly is None:
        e._poly = _compute_poly(e)
    return e._poly


def _compute_poly(e: Expr) -> Poly:
    if isinstance(e, Const):
        return {} if e.value == 0 else {(): e.value}
    if isinstance(e, Symbol):
        return {((e, Fraction(1)),): Fraction(1)}
    if isinstance(e, Pow):
        return {((e.base, e.exponent),): Fraction(1)}
    if isinstance(e, Mul):
        coef, atoms = _split_mul(e)
        return {atoms: coef}
    if isinstance(e, Add):
        out = {}
        for t in e.terms:
            for m, c in poly_of(t).items():
                out[m] = out.get(m, 0) + c
        return out
    raise TypeError(type(e))


def _split_mul(e: Mul):
    coef = Fraction(1)
    atoms = []
    for f in e.factors:
        if isinstance(f, Const):
            coef *= f.value
        elif isinstance(f, Symbol):
            atoms.append((f, Fraction(1)))
        else:
            atoms.append((f.base, f.exponent))
    return coef, tuple(atoms)


def _atom_key(atom):
    return (atom[0]._key, atom[1])


def _atom_expr(base: Expr, exponent: Fraction) -> Expr:
    if exponent == 1 and isinstance(base, Symbol):
        return base
    return Pow(base, exponent)


def _term_sort_key(item):
    mono, _ = item
    return (len(mono) == 0, tuple((b._key, -e) for b, e in mono))


def build(poly: Poly) -> Expr:
    """Canonical expression for a poly (runs absorption first)."""
    poly = _absorb(poly)
    return _assemble(poly)


def _assemble(poly: Poly) -> Expr:
    if not poly:
        return ZERO
    items = sorted(poly.items(), key=_term_sort_key)
    terms = [_term_expr(m, c) for m, c in items]
    if len(terms) == 1:
        out = terms[0]
    else:
        out = Add(tuple(terms))
    out._poly = {m: c for m, c in items}
    return out


def _term_expr(mono: Mono, coef: Fraction) -> Expr:
    if not mono:
        return Const(coef)
    factors = [_atom_expr(b, e) for b, e in mono]
    if coef == 1 and len(factors) == 1:
        return factors[0]
    if coef != 1:
        factors.insert(0, Const(coef))
    return Mul(tuple(factors))


# ---------------------------------------------------------------------------
# poly arithmetic
# ---------------------------------------------------------------------------


def _acc(out: Poly, poly: Poly, scale: Fraction = Fraction(1)) -> None:
    for m, c in poly.items():
        v = out.get(m, 0) + c * scale
        if v:
            out[m] = v
        else:
            out.pop(m, None)


def _padd(*polys: Poly) -> Poly:
    out = {}
    for p in polys:
        _acc(out, p)
    return out


def _pmul(a: Poly, b: Poly) -> Poly:
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            _acc(out, _mono_mul(c1 * c2, m1 + m2))
    return out


def _ppow_int(p: Poly, k: int) -> Poly:
    result = {(): Fraction(1)}
    base = p
    while k:
        if k & 1:
            result = _pmul(result, base)
        k >>= 1
        if k:
            base = _pmul(base, base)
    return result


def _mono_mul(coef: Fraction, atoms: Iterable) -> Poly:
    """Canonical poly for ``coef * prod(atoms)``."""
    coef = Fraction(coef)
    if coef == 0:
        return {}
    merged = {}
    for b, e in atoms:
        merged[b] = merged.get(b, 0) + e
    keep = []
    expand = []
    roots = []
    for b, e in merged.items():
        if e == 0:
            continue
        if isinstance(b, Const):
            v = b.value
            if e.denominator == 1:
                if v == 0 and e < 0:
                    raise ZeroDivisionError("division by zero")
                coef *= v ** int(e)
            elif v > 0:
                roots.append((v, e))
            else:
                keep.append((b, e))
        elif isinstance(b, Add) and e.denominator == 1 and e > 0:
            expand.append((b, int(e)))
        else:
            keep.append((b, e))
    if roots:
        c2, root_atoms = _fold_roots(roots)
        coef *= c2
        keep.extend(root_atoms)
    if coef == 0:
        return {}
    keep.sort(key=_atom_key)
    poly = {tuple(keep): coef}
    for b, k in expand:
        poly = _pmul(poly, _ppow_int(poly_of(b), k))
    return poly


def _fold_roots(roots):
    """Fold positive rational constants raised to non-integer powers."""
    coef = Fraction(1)
    by_q = {}
    for v, e in roots:
        n = math.floor(e)
        f = e - n
        coef *= v**n
        by_q[f.denominator] = by_q.get(f.denominator, Fraction(1)) * v**f.numerator
    atoms = []
    for q in sorted(by_q):
        w = by_q[q]
        a, b = w.numerator, w.denominator
        radicand = a * b ** (q - 1)
        coef /= b
        outside, radicand = _extract_power(radicand, q)
        coef *= outside
        if radicand != 1:
            atoms.append((Const(radicand), Fraction(1, q)))
    return coef, atoms


def _extract_power(n: int, q: int):
    """Split ``n = outside**q * rest`` using trial division (best effort)."""
    outside, rest = 1, 1
    p = 2
    while p * p <= n and p < _TRIAL_PRIMES_LIMIT:
        if n % p == 0:
            m = 0
            while n % p == 0:
                n //= p
                m += 1
            outside *= p ** (m // q)
            rest *= p ** (m % q)
        p += 1 if p == 2 else 2
    r = _integer_root(n, q)
    if r is not None:
        outside *= r
    else:
        rest *= n
    return outside, rest


def _integer_root(n: int, q: int):
    if n < 2:
        return n
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand > 0 and cand**q == n:
            return cand
    return None


def _content(poly: Poly) -> Fraction:
    nums = 0
    dens = 1
    for c in poly.values():
        nums = math.gcd(nums, c.numerator)
        dens = dens * c.denominator // math.gcd(dens, c.denominator)
    return Fraction(nums, dens)


def leading_sign(poly: Poly) -> int:
    """Sign of the first term in canonical order."""
    first = min(poly.items(), key=_term_sort_key)
    return 1 if first[1] > 0 else -1


def _ppow(p: Poly, r: Fraction) -> Poly:
    r = Fraction(r)
    if not p:
        if r > 0:
            return {}
        raise ZeroDivisionError("zero raised to a non-positive power")
    if r == 0:
        return {(): Fraction(1)}
    if r == 1:
        return dict(p)
    if len(p) > 1:
        p = _absorb(p)
    if len(p) == 1:
        (mono, coef), = p.items()
        return _pow_single(mono, coef, r)
    if r.denominator == 1 and r > 0:
        return _ppow_int(p, int(r))
    content = _content(p)
    sign = leading_sign(p) if r.denominator == 1 else 1
    scale = content * sign
    primitive = {m: c / scale for m, c in p.items()}
    base = _assemble(primitive)
    return _mono_mul(Fraction(1), [(Const(scale), r), (base, r)])


def _pow_single(mono: Mono, coef: Fraction, r: Fraction) -> Poly:
    if r.denominator == 1:
        return _mono_mul(coef ** int(r), [(b, e * r) for b, e in mono])
    if not mono:
        return _mono_mul(Fraction(1), [(Const(coef), r)])
    if coef < 0:
        return _mono_mul(Fraction(1), [(_term_expr(mono, coef), r)])
    atoms = [(Const(coef), r)]
    if len(mono) == 1:
        b, e = mono[0]
        if e.numerator % 2:
            atoms.append((b, e * r))
        else:
            atoms.append((_atom_expr(b, e), r))
    else:
        atoms.append((_term_expr(mono, Fraction(1)), r))
    return _mono_mul(Fraction(1), atoms)


# ---------------------------------------------------------------------------
# absorption: pooling of multi-term bases within a sum
# ---------------------------------------------------------------------------


def _split_term(mono: Mono):
    sums = {}
    rest = []
    for b, e in mono:
        if isinstance(b, Add):
            sums[b] = e
        else:
            rest.append((b, e))
    return sums, tuple(rest)


def _exponent_class(e: Fraction):
    if e.denominator == 1:
        return ("n",)
    return ("f", e - math.floor(e))


def _absorb(poly: Poly) -> Poly:
    for _ in range(_ABSORB_PASSES):
        new = _absorb_once(poly)
        if new == poly:
            return new
        poly = new
    return poly


def _absorb_once(poly: Poly) -> Poly:
    groups = {}
    plain = {}
    for mono, coef in poly.items():
        sums, rest = _split_term(mono)
        if not sums:
            plain[mono] = coef
            continue
        key = tuple(sorted(((b, _exponent_class(e)) for b, e in sums.items()),
                           key=lambda kv: kv[0]._key))
        groups.setdefault(key, []).append((sums, rest, coef))
    if not groups:
        return poly
    out = dict(plain)
    for key, terms in groups.items():
        bases = [b for b, _ in key]
        if len(terms) == 1:
            # a monomial cofactor is never divisible by a multi-term base
            sums, rest, coef = terms[0]
            _acc(out, _mono_mul(coef, list(rest) + list(sums.items())))
            continue
        low = {b: min(t[0][b] for t in terms) for b in bases}
        cof = {}
        for sums, rest, coef in terms:
            piece = {rest: coef}
            for b in bases:
                shift = int(sums[b] - low[b])
                if shift:
                    piece = _pmul(piece, _ppow_int(poly_of(b), shift))
            _acc(cof, piece)
        exps = dict(low)
        for b in bases:
            while cof and exps[b] != 0:
                q = exact_divide(cof, poly_of(b))
                if q is None:
                    break
                cof = q
                exps[b] += 1
        for mono, coef in cof.items():
            _acc(out, _mono_mul(coef, list(mono) + [(b, e) for b, e in exps.items()]))
    return out


def exact_divide(num: Poly, den: Poly):
    """Exact quotient ``num / den`` treating atoms as Laurent generators.

    Returns ``None`` when the division leaves a remainder.
    """
    if not den:
        raise ZeroDivisionError("division by zero polynomial")
    if not num:
        return {}
    gens = sorted({b for m in list(num) + list(den) for b, _ in m}, key=lambda b: b._key)
    index = {b: i for i, b in enumerate(gens)}

    def vec(m):
        v = [Fraction(0)] * len(gens)
        for b, e in m:
            v[index[b]] += e
        return tuple(v)

    rem = {vec(m): c for m, c in num.items()}
    dv = {vec(m): c for m, c in den.items()}
    n = len(gens)
    lo = [min(v[i] for v in rem) - min(v[i] for v in dv) for i in range(n)]
    hi = [max(v[i] for v in rem) - max(v[i] for v in dv) for i in range(n)]
    dlead = max(dv)
    dcoef = dv[dlead]
    quot = {}
    for _ in range(_DIVISION_STEPS):
        if not rem:
            break
        lead = max(rem)
        qv = tuple(a - b for a, b in zip(lead, dlead))
        if any(qv[i] < lo[i] or qv[i] > hi[i] for i in range(n)):
            return None
        qc = rem[lead] / dcoef
        quot[qv] = quot.get(qv, 0) + qc
        for v, c in dv.items():
            w = tuple(a + b for a, b in zip(qv, v))
            val = rem.get(w, 0) - qc * c
            if val:
                rem[w] = val
            else:
                rem.pop(w, None)
    else:
        return None
    if rem:
        return None
    out = {}
    for v, c in quot.items():
        if c:
            _acc(out, _mono_mul(c, [(gens[i], v[i]) for i in range(n) if v[i] != 0]))
    return out


# ---------------------------------------------------------------------------
# public constructors
# ---------------------------------------------------------------------------


def symbol(name: str) -> Symbol:
    return Symbol(name)


def symbols(names: str) -> tuple:
    return tuple(Symbol(n) for n in names.replace(",", " ").split())


def const(value) -> Const:
    return Const(Fraction(value))


def add(*terms) -> Expr:
    out = {}
    for t in terms:
        _acc(out, poly_of(as_expr(t)))
    return build(out)


def mul(*factors) -> Expr:
    out = {(): Fraction(1)}
    for f in factors:
        out = _pmul(out, poly_of(as_expr(f)))
        if not out:
            return ZERO
    return build(out)


def power(base, exponent) -> Expr:
    if isinstance(exponent, Expr):
        if not isinstance(exponent, Const):
            raise TypeError("exponents must be rational constants")
        exponent = exponent.value
    if isinstance(exponent, float):
        raise TypeError("exponents must be exact rationals, not floats")
    return build(_ppow(poly_of(as_expr(base)), Fraction(exponent)))


def sqrt(e) -> Expr:
    return power(e, Fraction(1, 2))


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the normalizing constructors."""
    if isinstance(e, (Const, Symbol)):
        return e
    if isinstance(e, Pow):
        return power(normalize(e.base), e.exponent)
    if isinstance(e, Mul):
        return mul(*(normalize(f) for f in e.factors))
    if isinstance(e, Add):
        return add(*(normalize(t) for t in e.terms))
    raise TypeError(type(e))


def terms_of(e: Expr) -> list:
    """Canonical list of ``(atoms, coefficient)`` pairs."""
    return sorted(poly_of(e).items(), key=_term_sort_key)


def from_terms(items) -> Expr:
    out = {}
    for mono, coef in items:
        _acc(out, _mono_mul(coef, mono))
    return build(out)


def coefficient_content(e: Expr) -> Fraction:
    p = poly_of(e)
    return _content(p) if p else Fraction(0)
