"""Truncated Puiseux branches with exact rational or generic symbolic coefficients.

A branch is a finite fractional-power expansion ``y = sum c_i * x^(e_i)`` with
strictly increasing exponents ``e_i >= 1`` and an explicit truncation order.
Everything downstream (contact exponents, multiplicities, real-slice
decompositions, blow-up simulation) reads only the exponents and the
equality pattern of the coefficients, so coefficients are either exact
rationals or opaque symbols standing for generic nonzero complex constants.
Distinct symbols are algebraically independent; a symbol rotated by a
nontrivial root of unity counts as different from its unrotated copy.

Truncation is taken seriously: whenever a comparison is not determined by
the stored terms, operations raise :class:`TruncationTooShort` instead of
guessing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence, Union

Rational = Fraction


class TruncationTooShort(ValueError):
    """The requested quantity is not determined by the stored truncations."""


class Infinity:
    """Positive infinity for contact exponents of identical objects."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infinite"

    def __eq__(self, other):
        return isinstance(other, Infinity)

    def __hash__(self):
        return hash("lipgerm-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, Infinity)

    def __gt__(self, other):
        return not isinstance(other, Infinity)

    def __ge__(self, other):
        return True


INFINITE = Infinity()

Contact = Union[Fraction, Infinity]


@dataclass(frozen=True)
class Coefficient:
    """Exact rational value or opaque generic symbol, exactly one of the two.

    Two exact coefficients compare by value, two symbols compare by name,
    and an exact value never equals a symbol.
    """

    value: Fraction | None = None
    symbol: str | None = None

    def __post_init__(self):
        if (self.value is None) == (self.symbol is None):
            raise ValueError("coefficient must be exactly one of exact value or symbol")
        if self.value is not None and self.value == 0:
            raise ValueError("zero coefficients are never stored")

    @staticmethod
    def exact(q) -> "Coefficient":
        return Coefficient(value=Fraction(q))

    @staticmethod
    def sym(name: str) -> "Coefficient":
        return Coefficient(symbol=str(name))

    @property
    def is_symbol(self) -> bool:
        return self.symbol is not None

    def __str__(self):
        if self.symbol is not None:
            return f"@{self.symbol}"
        return str(self.value)


Term = tuple[Fraction, Coefficient]


def _as_terms(terms: Iterable) -> tuple[Term, ...]:
    out = []
    for exp, coeff in terms:
        e = Fraction(exp)
        if not isinstance(coeff, Coefficient):
            coeff = Coefficient.exact(coeff)
        out.append((e, coeff))
    return tuple(out)


@dataclass(frozen=True)
class PuiseuxBranch:
    """A truncated fractional-power series ``dep = f(base)``.

    ``coords`` names the (base, dependent) variables; branches can only be
    compared when their coordinates agree.  Exponents are constrained to be
    >= 1, i.e. no tangent line of the branch lies in the slicing hyperplane.
    """

    terms: tuple[Term, ...]
    truncation_order: Fraction
    coords: tuple[str, str] = ("x", "y")

    def __init__(self, terms, truncation_order=None, coords=("x", "y")):
        terms = _as_terms(terms)
        if truncation_order is None:
            if not terms:
                raise ValueError("empty branch needs an explicit truncation order")
            truncation_order = terms[-1][0]
        truncation_order = Fraction(truncation_order)
        exps = [e for e, _ in terms]
        if any(e < 1 for e in exps):
            raise ValueError("exponents must be >= 1")
        if any(b <= a for a, b in zip(exps, exps[1:])):
            raise ValueError("exponents must be strictly increasing")
        if exps and exps[-1] > truncation_order:
            raise ValueError("exponents must not exceed the truncation order")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "truncation_order", truncation_order)
        object.__setattr__(self, "coords", tuple(coords))

    @property
    def denominator(self) -> int:
        """Minimal n with all exponents in (1/n)Z; the branch multiplicity."""
        n = 1
        for e, _ in self.terms:
            n = lcm(n, e.denominator)
        return n

    def coefficient_at(self, e: Fraction) -> Coefficient | None:
        for exp, coeff in self.terms:
            if exp == e:
                return coeff
        return None

    def __str__(self):
        base, dep = self.coords
        if not self.terms:
            return f"{dep} = 0"
        parts = []
        for e, c in self.terms:
            if e == 1:
                parts.append(f"{c}*{base}")
            else:
                parts.append(f"{c}*{base}^({e})")
        return f"{dep} = " + " + ".join(parts)


@dataclass(frozen=True)
class SliceComponent:
    """One of the n arcs of the real slice of a branch of multiplicity n."""

    branch: PuiseuxBranch
    sheet: int

    def __post_init__(self):
        n = self.branch.denominator
        if not 0 <= self.sheet < n:
            raise ValueError(f"sheet index must lie in [0, {n})")


def slices(branch: PuiseuxBranch) -> tuple[SliceComponent, ...]:
    return tuple(SliceComponent(branch, k) for k in range(branch.denominator))


def _check_coords(b1: PuiseuxBranch, b2: PuiseuxBranch):
    if b1.coords != b2.coords:
        raise ValueError(f"branches use different coordinates {b1.coords} vs {b2.coords}")


def multiplicity(b: PuiseuxBranch) -> int:
    """Multiplicity at the origin, i.e. the reduced exponent denominator."""
    return b.denominator


def contact(b1: PuiseuxBranch, b2: PuiseuxBranch) -> Contact:
    """Smallest exponent at which the two expansions differ.

    A term present in one branch and absent (or carrying a different
    coefficient) in the other counts as a difference.  If the expansions
    agree through the shorter truncation the answer depends on the missing
    tail, so :class:`TruncationTooShort` is raised unless both truncations
    coincide, in which case the branches are formally identical.
    """
    _check_coords(b1, b2)
    horizon = min(b1.truncation_order, b2.truncation_order)
    exps = sorted({e for e, _ in b1.terms} | {e for e, _ in b2.terms})
    for e in exps:
        if e > horizon:
            break
        if b1.coefficient_at(e) != b2.coefficient_at(e):
            return e
    if b1.truncation_order == b2.truncation_order:
        return INFINITE
    raise TruncationTooShort(
        f"branches agree through {horizon} but truncations differ"
    )


def characteristic_exponents(b: PuiseuxBranch) -> list[Fraction]:
    """Essential exponents: where the running denominator lattice refines."""
    out = []
    n = 1
    for e, _ in b.terms:
        if n % e.denominator != 0:
            out.append(e)
            n = lcm(n, e.denominator)
    return out


def _phase_equal(c1: Coefficient | None, p1: int, c2: Coefficient | None, p2: int, n: int) -> bool:
    """Equality of c1*zeta^p1 and c2*zeta^p2 for zeta a primitive n-th root of unity.

    A nonzero rational times a root of unity equals another nonzero rational
    times a root of unity iff the phase ratio is +-1 and the rationals match
    accordingly; a rotated symbol equals its unrotated copy only for the
    trivial phase.
    """
    if c1 is None or c2 is None:
        return c1 is None and c2 is None
    d = (p1 - p2) % n
    if c1.is_symbol or c2.is_symbol:
        return c1 == c2 and d == 0
    if d == 0:
        return c1.value == c2.value
    if n % 2 == 0 and d == n // 2:
        return c1.value == -c2.value
    return False


def slice_contact(s1: SliceComponent, s2: SliceComponent) -> Contact:
    """Outer contact exponent of two real-slice arcs.

    Sheet k of a branch with denominator n sees the coefficient of x^e
    rotated by zeta_n^(k*n*e); the contact is the first exponent where the
    rotated coefficients disagree.
    """
    b1, b2 = s1.branch, s2.branch
    _check_coords(b1, b2)
    if b1 == b2 and s1.sheet == s2.sheet:
        return INFINITE
    n1, n2 = b1.denominator, b2.denominator
    n = lcm(n1, n2)
    horizon = min(b1.truncation_order, b2.truncation_order)
    exps = sorted({e for e, _ in b1.terms} | {e for e, _ in b2.terms})
    for e in exps:
        if e > horizon:
            break
        c1 = b1.coefficient_at(e)
        c2 = b2.coefficient_at(e)
        # phase of sheet k at exponent e, in units of a primitive n-th root
        p1 = int(s1.sheet * n1 * e * (n // n1)) % n if c1 is not None else 0
        p2 = int(s2.sheet * n2 * e * (n // n2)) % n if c2 is not None else 0
        if not _phase_equal(c1, p1, c2, p2, n):
            return e
    if b1.truncation_order == b2.truncation_order:
        return INFINITE
    raise TruncationTooShort(
        f"slices agree through {horizon} but truncations differ"
    )


def complex_contact_via_slices(b1: PuiseuxBranch, b2: PuiseuxBranch) -> Contact:
    """Contact recomputed as the max of slice contacts over all sheet pairs."""
    _check_coords(b1, b2)
    best: Contact = Fraction(0)
    for s1 in slices(b1):
        for s2 in slices(b2):
            c = slice_contact(s1, s2)
            if isinstance(c, Infinity):
                return INFINITE
            if c > best:
                best = c
    return best


def branch_from_segment(p: int, q: int, symbol: str, coords=("x", "y")) -> PuiseuxBranch:
    """Single-segment branch ``y = @symbol * x^(q/p)`` for Newton-polygon work."""
    e = Fraction(q, p)
    return PuiseuxBranch([(e, Coefficient.sym(symbol))], e, coords)


_TERM_RE = re.compile(
    r"""^\s*
    (?:(?P<coeff>@[A-Za-z_]\w*|-?\d+(?:/\d+)?)\s*\*?\s*)?   # coefficient
    (?P<var>[A-Za-z]\w*)                                    # base variable
    (?:\s*\^\s*(?:\((?P<expp>-?\d+(?:/\d+)?)\)|(?P<expb>-?\d+(?:/\d+)?)))?
    \s*$""",
    re.VERBOSE,
)


def parse_branch(text: str, truncation=None) -> PuiseuxBranch:
    """Parse a branch literal like ``y = x^(3/2) + 2*x^(7/4)`` or ``y = @a*x``.

    The left-hand side names the dependent variable; the base variable is
    read off the monomials.  ``x = ...`` literals (series over y) are allowed
    and produce a branch with swapped coords.
    """
    if "=" not in text:
        raise ValueError(f"branch literal needs '=': {text!r}")
    lhs, rhs = text.split("=", 1)
    dep = lhs.strip()
    if not dep.isidentifier():
        raise ValueError(f"bad dependent variable {dep!r}")
    # split on + and - at top level, keeping signs
    chunks = re.findall(r"[+-]?[^+-]+", rhs.replace(" ", ""))
    terms = []
    base = None
    for chunk in chunks:
        sign = 1
        if chunk.startswith("+"):
            chunk = chunk[1:]
        elif chunk.startswith("-"):
            sign, chunk = -1, chunk[1:]
        m = _TERM_RE.match(chunk)
        if not m:
            raise ValueError(f"cannot parse term {chunk!r} in {text!r}")
        var = m.group("var")
        if base is None:
            base = var
        elif var != base:
            raise ValueError(f"mixed base variables {base!r} and {var!r} in {text!r}")
        exp = m.group("expp") or m.group("expb")
        e = Fraction(exp) if exp else Fraction(1)
        raw = m.group("coeff")
        if raw is None:
            coeff = Coefficient.exact(sign)
        elif raw.startswith("@"):
            if sign < 0:
                raise ValueError(f"signed symbols are not supported: {chunk!r}")
            coeff = Coefficient.sym(raw[1:])
        else:
            coeff = Coefficient.exact(sign * Fraction(raw))
        terms.append((e, coeff))
    if base is None:
        raise ValueError(f"branch literal has no terms: {text!r}")
    if base == dep:
        raise ValueError(f"base and dependent variable coincide in {text!r}")
    terms.sort(key=lambda t: t[0])
    trunc = Fraction(truncation) if truncation is not None else None
    return PuiseuxBranch(terms, trunc, coords=(base, dep))


def format_branch(b: PuiseuxBranch) -> str:
    """Canonical literal for a branch, parseable by :func:`parse_branch`."""
    base, dep = b.coords
    parts = []
    for e, c in b.terms:
        cs = f"@{c.symbol}" if c.is_symbol else str(c.value)
        if e == 1:
            parts.append(f"{cs}*{base}")
        elif e.denominator == 1:
            parts.append(f"{cs}*{base}^{e}")
        else:
            parts.append(f"{cs}*{base}^({e})")
    rhs = " + ".join(parts) if parts else "0"
    return f"{dep} = {rhs}"
