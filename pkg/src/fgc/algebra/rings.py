"""Exact graded coefficient rings.

A :class:`GradedRing` is Z, Q, or a polynomial ring over one of them on
finitely many even-degree generators.  Degrees are homotopy degrees: a
generator of degree 2k lives in pi_{2k}.  :class:`TateRing` adjoins a
Laurent variable ``t`` of homotopy degree -2 with a fixed admissible
window of exponents.

Scalars are ``gmpy2.mpq`` throughout; over a Z base every scalar must be
integral.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from gmpy2 import mpq

from ..errors import NotAUnitError, RingMismatchError

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

ZERO = mpq(0)
ONE = mpq(1)


def mono_order_key(exps):
    """Graded-lex key: total degree first, then earlier slots dominate."""
    return (sum(exps), tuple(-e for e in exps))


def to_scalar(value, base="Q"):
    c = value if type(value) is type(ZERO) else mpq(value)
    if base == "Z" and c.denominator != 1:
        raise ValueError(f"{c} is not an integer; ring base is Z")
    return c


@dataclass(frozen=True)
class GradedRing:
    base: str = "Q"
    gens: tuple = ()

    def __post_init__(self):
        if self.base not in ("Z", "Q"):
            raise ValueError(f"base must be 'Z' or 'Q', got {self.base!r}")
        gens = tuple((str(name), int(deg)) for name, deg in self.gens)
        object.__setattr__(self, "gens", gens)
        seen = set()
        for name, deg in gens:
            if not _IDENT.match(name):
                raise ValueError(f"generator name {name!r} is not an identifier")
            if name in seen:
                raise ValueError(f"duplicate generator {name!r}")
            if deg % 2:
                raise ValueError(f"generator {name!r} has odd degree {deg}")
            seen.add(name)

    @property
    def kind(self):
        if self.gens:
            return "Polynomial"
        return "Integers" if self.base == "Z" else "Rationals"

    @property
    def names(self):
        return tuple(name for name, _ in self.gens)

    @property
    def degrees(self):
        return tuple(deg for _, deg in self.gens)

    @property
    def ngens(self):
        return len(self.gens)

    @property
    def is_q_algebra(self):
        return self.base == "Q"

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r} in {self}") from None

    def __str__(self):
        b = "ZZ" if self.base == "Z" else "QQ"
        if not self.gens:
            return b
        return f"{b}[{','.join(self.names)}]"

    # -- elements -----------------------------------------------------
    def scalar(self, value):
        return to_scalar(value, self.base)

    def element(self, terms):
        """Build an element from ``{exponent tuple: scalar}``."""
        return RingElement(self, terms)

    def zero(self):
        return RingElement(self, {})

    def one(self):
        return self.constant(1)

    def constant(self, value):
        return RingElement(self, {(0,) * self.ngens: self.scalar(value)})

    def gen(self, name):
        e = [0] * self.ngens
        e[self.index(name)] = 1
        return RingElement(self, {tuple(e): ONE})

    def parse(self, text):
        from .parse import parse_coeff

        return parse_coeff(text, self)

    # -- ring maps ----------------------------------------------------
    def union(self, other):
        """Smallest ring containing both (generators merged by name)."""
        if self == other:
            return self
        base = "Q" if "Q" in (self.base, other.base) else "Z"
        gens = list(self.gens)
        mine = dict(self.gens)
        for name, deg in other.gens:
            if name in mine:
                if mine[name] != deg:
                    raise RingMismatchError(
                        f"generator {name!r} has degree {mine[name]} and {deg}"
                    )
            else:
                gens.append((name, deg))
        return GradedRing(base, tuple(gens))

    def contains(self, other):
        """True if ``other`` embeds into this ring by generator name."""
        if other.base == "Q" and self.base == "Z":
            return False
        mine = dict(self.gens)
        return all(mine.get(n) == d for n, d in other.gens)

    def embedding(self, target):
        """Exponent-slot map sending this ring's generators into ``target``."""
        if not target.contains(self):
            raise RingMismatchError(f"{self} does not embed in {target}")
        return tuple(target.index(n) for n in self.names)


@dataclass(frozen=True)
class TateRing:
    """Laurent extension R((t)) with admissible exponent window [low, high].

    Series over a Tate ring may not hold t-exponents below ``low``; that
    is a :class:`~fgc.errors.WindowError`.  With ``span`` set, terms whose
    t-exponent plus x-degree exceeds ``high + span`` are discarded (and
    the series marked inexact there); ``span`` is normally the x-truncation.
    """

    base: GradedRing
    low: int = -8
    high: int = 8
    t: str = "t"
    span: int = None

    def __post_init__(self):
        if not _IDENT.match(self.t):
            raise ValueError(f"Tate variable {self.t!r} is not an identifier")
        if self.t in self.base.names:
            raise ValueError(f"Tate variable {self.t!r} clashes with a generator")
        if not self.low <= 0 <= self.high:
            raise ValueError(f"window [{self.low}, {self.high}] must contain 0")
        if self.span is not None and self.span < 0:
            raise ValueError("span must be non-negative")

    @property
    def cap(self):
        return None if self.span is None else self.high + self.span

    @property
    def is_q_algebra(self):
        return self.base.is_q_algebra

    def __str__(self):
        return f"{self.base}(({self.t}))[{self.low}:{self.high}]"


def coefficient_width(ring):
    """Number of coefficient slots in a flat series key."""
    if isinstance(ring, TateRing):
        return 1 + ring.base.ngens
    return ring.ngens


def base_ring(ring):
    return ring.base if isinstance(ring, TateRing) else ring


class RingElement:
    """Immutable polynomial in the generators of a :class:`GradedRing`.

    Stored as a tuple of ``(exponents, scalar)`` pairs with no zero
    scalars, sorted by :func:`mono_order_key`, so equality is structural.
    """

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring, terms):
        base = ring.base
        clean = {}
        for e, c in dict(terms).items():
            e = tuple(int(x) for x in e)
            if len(e) != ring.ngens or min(e, default=0) < 0:
                raise ValueError(f"bad exponent vector {e} for {ring}")
            c = to_scalar(c, base)
            if c:
                clean[e] = c
        self.ring = ring
        self.terms = tuple(sorted(clean.items(), key=lambda kv: mono_order_key(kv[0])))
        self._hash = None

    @classmethod
    def _raw(cls, ring, clean):
        obj = cls.__new__(cls)
        obj.ring = ring
        obj.terms = tuple(sorted(clean.items(), key=lambda kv: mono_order_key(kv[0])))
        obj._hash = None
        return obj

    def as_dict(self):
        return dict(self.terms)

    # -- predicates -----------------------------------------------------
    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(not any(e) for e, _ in self.terms)

    def constant_coefficient(self):
        return self.as_dict().get((0,) * self.ring.ngens, ZERO)

    def is_unit(self):
        """Return ``(True, inverse)`` for units, else ``(False, None)``.

        Polynomial rings over Z or Q are domains, so only constants can be
        units: +-1 over Z, any nonzero scalar over Q.
        """
        if not self.terms or not self.is_constant():
            return False, None
        c = self.terms[0][1]
        if self.ring.base == "Z" and c not in (1, -1):
            return False, None
        return True, self.ring.constant(1 / c)

    def inverse(self):
        ok, inv = self.is_unit()
        if not ok:
            raise NotAUnitError(f"{self} is not a unit in {self.ring}")
        return inv

    def homogeneous_degree(self):
        """Common generator degree of all monomials.

        Returns ``"any"`` for zero and ``"inhomogeneous"`` when degrees differ.
        """
        degs = {sum(a * d for a, d in zip(e, self.ring.degrees)) for e, _ in self.terms}
        if not degs:
            return "any"
        if len(degs) > 1:
            return "inhomogeneous"
        return degs.pop()

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise RingMismatchError(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, type(ZERO))) or hasattr(other, "denominator"):
            return self.ring.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms:
            s = out.get(e, ZERO) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return RingElement._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return RingElement._raw(self.ring, {e: -c for e, c in self.terms})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return RingElement._raw(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, RingElement):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, int) or hasattr(other, "denominator"):
            return self == self.ring.constant(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, self.terms))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"RingElement({self.ring}, {str(self)!r})"

    def __str__(self):
        return format_poly(self.terms, self.ring.names)


def _format_scalar(c):
    return str(c)


def format_poly(terms, names):
    """Render ``(exponents, scalar)`` pairs in parse_coeff syntax.

    Highest graded-lex monomial first; output re-parses to the same element.
    """
    if not terms:
        return "0"
    parts = []
    for e, c in sorted(terms, key=lambda kv: mono_order_key(kv[0]), reverse=True):
        factors = []
        for name, k in zip(names, e):
            if k == 1:
                factors.append(name)
            elif k:
                factors.append(f"{name}^{k}")
        mono = "*".join(factors)
        sign = "-" if c < 0 else "+"
        a = -c if c < 0 else c
        if not mono:
            body = _format_scalar(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_scalar(a)}*{mono}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
