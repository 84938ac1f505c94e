"""Small exact-polynomial layer: resultants, square-free parts, discriminants.

Polynomials are bivariate or trivariate with exact rational coefficients,
stored as monomial -> coefficient maps.  The heavy lifting (multivariate gcd
and resultants) is delegated to sympy, behind an exact interface; tests keep
an independent Sylvester-matrix/evaluation oracle so the two routes check
each other.

Outputs are normalized to content 1 with the graded-lex leading monomial
positive, so results are bit-comparable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import sympy

Monomial = tuple[int, ...]


class ZeroResultant(ValueError):
    """The resultant vanishes identically: input not reduced in the fiber variable."""


@dataclass(frozen=True)
class Polynomial:
    """Exact multivariate polynomial over Q in 2 or 3 named variables."""

    variables: tuple[str, ...]
    coeffs: tuple[tuple[Monomial, Fraction], ...]

    def __init__(self, variables, coeffs):
        variables = tuple(variables)
        if len(variables) not in (2, 3):
            raise ValueError("only bivariate or trivariate polynomials are supported")
        cleaned: dict[Monomial, Fraction] = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for mono, c in items:
            mono = tuple(int(k) for k in mono)
            if len(mono) != len(variables):
                raise ValueError("monomial arity does not match variables")
            c = Fraction(c)
            if c:
                cleaned[mono] = cleaned.get(mono, Fraction(0)) + c
        cleaned = {m: c for m, c in cleaned.items() if c}
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "coeffs", tuple(sorted(cleaned.items())))

    def as_dict(self) -> dict[Monomial, Fraction]:
        return dict(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self, var: str) -> int:
        i = self.variables.index(var)
        return max((m[i] for m, _ in self.coeffs), default=0)

    def total_degree(self) -> int:
        return max((sum(m) for m, _ in self.coeffs), default=0)

    def evaluate(self, point: dict[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, c in self.coeffs:
            v = c
            for name, k in zip(self.variables, mono):
                v *= Fraction(point[name]) ** k
            total += v
        return total

    def constant_term(self) -> Fraction:
        zero = (0,) * len(self.variables)
        return dict(self.coeffs).get(zero, Fraction(0))

    def __str__(self):
        if self.is_zero:
            return "0"
        def grlex_key(item):
            m, _ = item
            return (sum(m), m)
        parts = []
        for mono, c in sorted(self.coeffs, key=grlex_key, reverse=True):
            factors = []
            for name, k in zip(self.variables, mono):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c}*{body}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")


def _to_sympy(p: Polynomial):
    syms = sympy.symbols(p.variables)
    expr = sympy.Integer(0)
    for mono, c in p.coeffs:
        term = sympy.Rational(c.numerator, c.denominator)
        for s, k in zip(syms, mono):
            term *= s ** k
        expr += term
    return expr, syms


def _from_sympy(expr, variables: tuple[str, ...]) -> Polynomial:
    syms = sympy.symbols(variables)
    poly = sympy.Poly(sympy.expand(expr), *syms)
    coeffs = {}
    for mono, c in poly.terms():
        c = sympy.Rational(c)
        coeffs[tuple(int(k) for k in mono)] = Fraction(int(c.p), int(c.q))
    return Polynomial(variables, coeffs)


def normalize(p: Polynomial) -> Polynomial:
    """Divide by the rational content and fix the graded-lex leading sign."""
    if p.is_zero:
        return p
    num = 0
    den = 1
    for _, c in p.coeffs:
        num = gcd(num, abs(c.numerator))
        den = den * c.denominator // gcd(den, c.denominator)
    content = Fraction(num, den)
    lead = max(p.coeffs, key=lambda item: (sum(item[0]), item[0]))
    if lead[1] < 0:
        content = -content
    return Polynomial(p.variables, {m: c / content for m, c in p.coeffs})


def square_free_part(p: Polynomial) -> Polynomial:
    """p divided by gcd(p, dp/dv) over each variable, content-normalized."""
    if p.is_zero:
        raise ValueError("square-free part of the zero polynomial")
    expr, syms = _to_sympy(p)
    for s in syms:
        g = sympy.gcd(expr, sympy.diff(expr, s))
        expr = sympy.cancel(expr / g)
    return normalize(_from_sympy(expr, p.variables))


def resultant(f: Polynomial, g: Polynomial, var: str) -> Polynomial:
    """Resultant of f and g with respect to var, in the remaining variables."""
    if f.variables != g.variables:
        raise ValueError("resultant operands must share variables")
    fe, syms = _to_sympy(f)
    ge, _ = _to_sympy(g)
    s = syms[f.variables.index(var)]
    res = sympy.resultant(fe, ge, s)
    rest = tuple(v for v in f.variables if v != var)
    return _from_sympy(res, rest)


def discriminant_of_projection(f: Polynomial, fiber_variable: str) -> Polynomial:
    """Square-free discriminant of the projection forgetting ``fiber_variable``.

    Computes Res(f, df/dfiber) in the remaining variables, takes the
    square-free part, and normalizes content and sign.  Raises
    :class:`ZeroResultant` for inputs that are non-reduced in the fiber
    variable.
    """
    if f.degree(fiber_variable) < 1:
        raise ValueError(f"f has no positive degree in {fiber_variable!r}")
    if f.constant_term() != 0:
        raise ValueError("f must vanish at the origin")
    fe, syms = _to_sympy(f)
    s = syms[f.variables.index(fiber_variable)]
    res = sympy.resultant(fe, sympy.diff(fe, s), s)
    if res == 0:
        raise ZeroResultant(f"f is not reduced in {fiber_variable!r}")
    rest = tuple(v for v in f.variables if v != fiber_variable)
    return square_free_part(_from_sympy(res, rest))


_POLY_TOKEN = re.compile(r"\s*(\d+|[A-Za-z]\w*|\^|\*|\+|-|\(|\))")


def parse_polynomial(text: str, variables=None) -> Polynomial:
    """Parse `+`,`-`,`*`,`^` polynomial syntax with integer coefficients.

    Variables default to the ones that appear, ordered as (x, y, z); parsing
    richer coefficients is the job of the JSON layer, not the CLI.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _POLY_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad polynomial syntax at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    tokens.append(None)

    seen_vars: list[str] = []

    def peek():
        return tokens[0]

    def pop():
        return tokens.pop(0)

    def parse_expr():
        terms = parse_term()
        while peek() in ("+", "-"):
            op = pop()
            rhs = parse_term()
            if op == "-":
                rhs = {m: -c for m, c in rhs.items()}
            terms = _add(terms, rhs)
        return terms

    def parse_term():
        out = parse_factor()
        while peek() == "*" or (peek() not in (None, "+", "-", ")") and peek() != "^"):
            if peek() == "*":
                pop()
            out = _mul(out, parse_factor())
        return out

    def parse_factor():
        tok = pop()
        if tok == "-":
            inner = parse_factor()
            return {m: -c for m, c in inner.items()}
        if tok == "(":
            inner = parse_expr()
            if pop() != ")":
                raise ValueError("unbalanced parentheses")
            base = inner
        elif tok is not None and tok.isdigit():
            base = {(): Fraction(int(tok))}
        elif tok is not None and tok.isidentifier():
            if tok not in seen_vars:
                seen_vars.append(tok)
            base = {(tok,): Fraction(1)}
        else:
            raise ValueError(f"unexpected token {tok!r}")
        if peek() == "^":
            pop()
            exp_tok = pop()
            if exp_tok is None or not exp_tok.isdigit():
                raise ValueError("exponent must be a nonnegative integer")
            base = _pow(base, int(exp_tok))
        return base

    # terms are maps from sorted variable-name tuples to coefficients
    def _add(a, b):
        out = dict(a)
        for m, c in b.items():
            out[m] = out.get(m, Fraction(0)) + c
        return {m: c for m, c in out.items() if c}

    def _mul(a, b):
        out = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = tuple(sorted(ma + mb))
                out[m] = out.get(m, Fraction(0)) + ca * cb
        return {m: c for m, c in out.items() if c}

    def _pow(a, k):
        out = {(): Fraction(1)}
        for _ in range(k):
            out = _mul(out, a)
        return out

    raw = parse_expr()
    if peek() is not None:
        raise ValueError(f"trailing tokens near {peek()!r}")

    if variables is None:
        order = [v for v in ("x", "y", "z") if v in seen_vars]
        order += [v for v in seen_vars if v not in order]
        variables = tuple(order)
        if len(variables) < 2:
            variables = tuple(list(variables) + [v for v in ("y", "z") if v not in variables])[:2]
    variables = tuple(variables)

    coeffs = {}
    for names, c in raw.items():
        mono = [0] * len(variables)
        for name in names:
            if name not in variables:
                raise ValueError(f"variable {name!r} not among {variables}")
            mono[variables.index(name)] += 1
        coeffs[tuple(mono)] = coeffs.get(tuple(mono), Fraction(0)) + c
    return Polynomial(variables, coeffs)
