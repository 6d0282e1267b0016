"""Truncated multivariate power series with exact coefficients.

Storage is a flat dict keyed by ``variable exponents + coefficient
exponents``.  For a plain :class:`GradedRing` the coefficient part is the
generator exponent vector; for a :class:`TateRing` it is the t-exponent
followed by the generator exponents.  Terms whose weighted degree in the
series variables exceeds ``order`` are never stored.

Precision rules:

* x-precision is the truncation ``order`` and results carry the minimum
  order of their inputs.
* t-precision (Tate rings only) is ``high``, measured on the skewed
  degree ``t-exponent + weighted x-degree``: a term x^a t^e is known iff
  e + |a| <= high.  Substituting y = x/t turns this into ordinary
  t-adic precision, so the factors (x +_F t)/t that dominate the Tate
  computations multiply without losing precision.  ``high=None`` marks a
  series that is exact in t.
* The ring window [low, high] is a hard floor (a term below ``low``
  raises WindowError) and an output ceiling: ``effective_high`` is the
  largest t-exponent known for every monomial of x-degree <= order.
"""
from __future__ import annotations

from bisect import bisect_right
from itertools import permutations
from operator import add, itemgetter

from gmpy2 import mpq

from ..errors import NotAUnitError, PrecisionError, PreconditionError, RingMismatchError, WindowError
from .rings import (
    ONE,
    ZERO,
    GradedRing,
    RingElement,
    TateRing,
    base_ring,
    coefficient_width,
    mono_order_key,
    to_scalar,
)

_MPQ = type(ZERO)
_INF = float("inf")


def _as_high(h):
    return _INF if h is None else h


class TruncSeries:
    """Power series in ``vars`` truncated at weighted total degree ``order``."""

    __slots__ = ("ring", "vars", "weights", "order", "terms", "high", "_hash")

    def __init__(self, ring, vars, order, terms=None, weights=None):
        """Build from ``{exponent tuple: coefficient}``.

        Coefficients may be RingElements of ``ring``, ints, fractions or
        parse_coeff strings.  Use :class:`TateSeries` for Laurent coefficients.
        """
        if isinstance(ring, TateRing):
            raise TypeError("use TateSeries for Tate coefficient rings")
        vars = tuple(vars)
        weights = _check_vars(vars, weights)
        flat = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != len(vars) or min(mono, default=0) < 0:
                raise ValueError(f"bad monomial {mono} for variables {vars}")
            for g, c in _coeff_terms(coeff, ring):
                k = mono + g
                flat[k] = flat.get(k, ZERO) + c
        _init(self, ring, vars, weights, int(order), _clean(flat, len(vars), weights, int(order)), None)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def _from_flat(cls, ring, vars, weights, order, flat, high=None, clean=True):
        klass = TateSeries if isinstance(ring, TateRing) else TruncSeries
        obj = klass.__new__(klass)
        if clean:
            flat = _clean(flat, len(vars), weights, order)
        if isinstance(ring, TateRing):
            flat, high = _clip_t(flat, len(vars), weights, ring, high, order)
        _init(obj, ring, vars, weights, order, flat, high)
        return obj

    @classmethod
    def variable(cls, ring, vars, name, order, weights=None):
        vars = tuple(vars)
        weights = _check_vars(vars, weights)
        e = [0] * len(vars)
        e[vars.index(name)] = 1
        key = tuple(e) + (0,) * coefficient_width(ring)
        return cls._from_flat(ring, vars, weights, order, {key: ONE})

    @classmethod
    def constant(cls, ring, vars, value, order, weights=None):
        vars = tuple(vars)
        weights = _check_vars(vars, weights)
        if isinstance(ring, TateRing):
            flat = {(0,) * len(vars) + (0,) + g: c for g, c in _coeff_terms(value, ring.base)}
        else:
            flat = {(0,) * len(vars) + g: c for g, c in _coeff_terms(value, ring)}
        return cls._from_flat(ring, vars, weights, order, flat)

    @classmethod
    def one(cls, ring, vars, order, weights=None):
        return cls.constant(ring, vars, 1, order, weights)

    @classmethod
    def zero(cls, ring, vars, order, weights=None):
        return cls.constant(ring, vars, 0, order, weights)

    def _like(self, flat, order=None, high="same", clean=False):
        order = self.order if order is None else order
        high = self.high if high == "same" else high
        return TruncSeries._from_flat(self.ring, self.vars, self.weights, order, flat, high, clean)

    # -- basic queries ----------------------------------------------------------
    @property
    def nvars(self):
        return len(self.vars)

    @property
    def is_tate(self):
        return isinstance(self.ring, TateRing)

    @property
    def base(self):
        return base_ring(self.ring)

    def degree_of(self, key):
        return _wdeg(key, len(self.vars), self.weights)

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def is_zero(self):
        return not self.terms

    def valuation(self):
        """Lowest weighted degree present (``order + 1`` for zero)."""
        if not self.terms:
            return self.order + 1
        return min(self.degree_of(k) for k in self.terms)

    def coefficient_map(self):
        """``{monomial: {coefficient exponents: scalar}}`` grouped by monomial."""
        nv = len(self.vars)
        out = {}
        for k, c in self.terms.items():
            out.setdefault(k[:nv], {})[k[nv:]] = c
        return out

    def coefficient(self, mono):
        """Coefficient of a monomial: a RingElement (plain rings) or t-only TateSeries."""
        mono = tuple(mono)
        nv = len(self.vars)
        if len(mono) != nv:
            raise ValueError(f"monomial {mono} has wrong length for {self.vars}")
        if _wdeg(mono, nv, self.weights) > self.order:
            raise PrecisionError(f"monomial {mono} lies beyond truncation order {self.order}")
        sub = {k[nv:]: c for k, c in self.terms.items() if k[:nv] == mono}
        if self.is_tate:
            high = None if self.high is None else self.high - _wdeg(mono, nv, self.weights)
            return TruncSeries._from_flat(self.ring, (), (), 0, sub, high, clean=False)
        return RingElement._raw(self.ring, sub)

    def constant_term(self):
        return self.coefficient((0,) * len(self.vars))

    def truncate(self, order):
        """Drop every term of weighted degree above ``order`` (never raises precision)."""
        order = min(order, self.order)
        nv, w = len(self.vars), self.weights
        flat = {k: c for k, c in self.terms.items() if _wdeg(k, nv, w) <= order}
        return self._like(flat, order=order)

    def homogeneous_part(self, degree):
        nv, w = len(self.vars), self.weights
        return self._like({k: c for k, c in self.terms.items() if _wdeg(k, nv, w) == degree})

    def cohomological_degree(self):
        """Common cohomological degree of all terms, or ``"inhomogeneous"``.

        A series variable of weight w counts 2w, a generator of homotopy
        degree d counts -d, and the Tate variable t counts +2.  Zero gives
        ``"any"``.
        """
        nv = len(self.vars)
        gdeg = self.base.degrees
        tate = self.is_tate
        degs = set()
        for k in self.terms:
            d = 2 * _wdeg(k, nv, self.weights)
            rest = k[nv:]
            if tate:
                d += 2 * rest[0]
                rest = rest[1:]
            d -= sum(a * b for a, b in zip(rest, gdeg))
            degs.add(d)
        if not degs:
            return "any"
        if len(degs) > 1:
            return "inhomogeneous"
        return degs.pop()

    # -- Tate-specific --------------------------------------------------------------
    def t_valuation(self):
        """Lowest t-exponent present (0 for plain series, inf for zero)."""
        if not self.is_tate:
            return 0
        nv = len(self.vars)
        if not self.terms:
            return _INF
        return min(k[nv] for k in self.terms)

    def skew_valuation(self):
        """Lowest ``t-exponent + x-degree`` present; ``high + 1`` for inexact zero."""
        nv = len(self.vars)
        if not self.terms:
            return _INF if self.high is None else self.high + 1
        w = self.weights
        return min(k[nv] + _wdeg(k, nv, w) for k in self.terms)

    @property
    def effective_high(self):
        """Highest t-exponent known for every monomial, capped by the window."""
        if not self.is_tate:
            return None
        if self.high is None:
            return self.ring.high
        return min(self.ring.high, self.high - self.order)

    def window_terms(self):
        """Canonical terms inside the output window, and whether they are exact."""
        top = self.effective_high
        terms = [tm for tm in self.sorted_terms() if tm[0] <= top]
        exact = self.high is None and len(terms) == len(self.sorted_terms())
        return terms, top, exact

    # -- variable management ------------------------------------------------------
    def with_vars(self, vars, weights=None):
        """Re-key into a variable list containing this series' variables."""
        vars = tuple(vars)
        weights = _check_vars(vars, weights)
        if vars == self.vars and weights == self.weights:
            return self
        pos = {v: i for i, v in enumerate(vars)}
        for v, w in zip(self.vars, self.weights):
            if v not in pos:
                raise RingMismatchError(f"variable {v!r} missing from {vars}")
            if weights[pos[v]] != w:
                raise RingMismatchError(f"variable {v!r} has weight {w} and {weights[pos[v]]}")
        nv = len(self.vars)
        idx = [pos[v] for v in self.vars]
        width = len(vars)
        flat = {}
        for k, c in self.terms.items():
            e = [0] * width
            for i, j in enumerate(idx):
                e[j] = k[i]
            flat[tuple(e) + k[nv:]] = c
        return TruncSeries._from_flat(self.ring, vars, weights, self.order, flat, self.high, clean=False)

    def rename(self, mapping):
        vars = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(vars)) != len(vars):
            raise ValueError(f"renaming produces duplicate variables {vars}")
        return TruncSeries._from_flat(self.ring, vars, self.weights, self.order, self.terms, self.high, clean=False)

    def permute(self, perm):
        """Permute variable slots: slot i of the result reads slot ``perm[i]``."""
        nv = len(self.vars)
        flat = {tuple(k[p] for p in perm) + k[nv:]: c for k, c in self.terms.items()}
        return self._like(flat)

    def is_symmetric(self):
        nv = len(self.vars)
        if len(set(self.weights)) > 1:
            return False
        for i in range(nv - 1):
            perm = list(range(nv))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            if self.permute(perm) != self:
                return False
        return True

    def set_zero(self, name):
        """Substitute 0 for one variable (kept in the variable list)."""
        i = self.vars.index(name)
        return self._like({k: c for k, c in self.terms.items() if k[i] == 0})

    # -- arithmetic ------------------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        f, g = _align(self, other)
        high = _min_high(f.high, g.high) if f.is_tate else None
        flat = dict(f.terms)
        for k, c in g.terms.items():
            s = flat.get(k, ZERO) + c
            if s:
                flat[k] = s
            else:
                flat.pop(k, None)
        return TruncSeries._from_flat(f.ring, f.vars, f.weights, min(f.order, g.order), flat, high)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, _MPQ)) or (hasattr(other, "denominator") and not isinstance(other, RingElement)):
            c = to_scalar(other, self.base.base)
            if not c:
                return self._like({})
            return self._like({k: v * c for k, v in self.terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        f, g = _align(self, other)
        return _multiply(f, g)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return series_invert(self) ** (-n)
        result = self.one_like()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, TruncSeries):
            return self * series_invert(other)
        if isinstance(other, RingElement):
            return self * other.inverse()
        return self * (1 / mpq(other))

    def one_like(self):
        return TruncSeries.one(self.ring, self.vars, self.order, self.weights)

    def _lift(self, other):
        if isinstance(other, TruncSeries):
            return other
        if isinstance(other, RingElement):
            if other.ring != self.base:
                raise RingMismatchError(f"{other.ring} vs {self.base}")
            return TruncSeries.constant(self.ring, self.vars, other, self.order, self.weights)
        if isinstance(other, (int, _MPQ)) or hasattr(other, "denominator"):
            return TruncSeries.constant(self.ring, self.vars, other, self.order, self.weights)
        return NotImplemented

    # -- comparison ------------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.vars == other.vars
            and self.weights == other.weights
            and self.order == other.order
            and self.high == other.high
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, self.vars, self.weights, self.order, self.high, frozenset(self.terms.items())))
        return self._hash

    def first_mismatch(self, other, order=None, high=None):
        """First differing term (canonical order) within the common precision.

        Returns ``None`` when the series agree, else a dict describing the
        monomial, t-exponent and both coefficients.
        """
        f, g = _align(self, other)
        order = min(f.order, g.order, _as_high(order))
        skew = min(_as_high(f.high), _as_high(g.high))
        top = _as_high(high)
        nv, w = len(f.vars), f.weights
        tate = f.is_tate
        keys = set(f.terms) | set(g.terms)
        bad = []
        for k in keys:
            d = _wdeg(k, nv, w)
            if d > order or (tate and (k[nv] > top or k[nv] + d > skew)):
                continue
            if f.terms.get(k, ZERO) != g.terms.get(k, ZERO):
                bad.append(k[:nv] + ((k[nv],) if tate else ()))
        if not bad:
            return None
        bad = min(bad, key=lambda m: _display_key(m, nv, tate))
        mono = bad[:nv]
        te = bad[nv] if tate else None
        return {
            "mono": list(mono),
            "t": te,
            "lhs": _coeff_string(f, mono, te),
            "rhs": _coeff_string(g, mono, te),
        }

    def agrees_with(self, other, order=None, high=None):
        return self.first_mismatch(other, order, high) is None

    # -- display -----------------------------------------------------------------------
    def sorted_terms(self):
        """``[(t_exp or None, monomial, RingElement)]`` in canonical output order."""
        nv = len(self.vars)
        tate = self.is_tate
        base = self.base
        groups = {}
        for k, c in self.terms.items():
            te = k[nv] if tate else None
            g = k[nv + 1:] if tate else k[nv:]
            groups.setdefault((te, k[:nv]), {})[g] = c
        keys = sorted(groups, key=lambda tm: (tm[0] if tm[0] is not None else 0, mono_order_key(tm[1])))
        return [(te, mono, RingElement._raw(base, groups[(te, mono)])) for te, mono in keys]

    def __str__(self):
        terms = self.window_terms()[0] if self.is_tate else self.sorted_terms()
        if not terms:
            return "0" + self._tail()
        parts = []
        shown = sorted(terms, key=lambda tm: (mono_order_key(tm[1]), tm[0] or 0))
        for te, mono, coeff in shown:
            factors = []
            if te:
                factors.append(f"{self.ring.t}^{te}" if te != 1 else self.ring.t)
            for name, e in zip(self.vars, mono):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            c = str(coeff)
            if not factors:
                parts.append(c)
            elif c == "1":
                parts.append("*".join(factors))
            elif c == "-1":
                parts.append("-" + "*".join(factors))
            elif len(coeff.terms) > 1:
                parts.append(f"({c})*" + "*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out + self._tail()

    def _tail(self):
        s = f" + O(deg {self.order + 1})" if self.vars else ""
        if self.is_tate and not self.window_terms()[2]:
            s += f" + O({self.ring.t}^{self.effective_high + 1})"
        return s

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class TateSeries(TruncSeries):
    """Series over R((t)): Laurent in t, power series in the x-variables."""

    __slots__ = ()

    def __init__(self, ring, vars, order, terms=None, high=None):
        """``terms`` maps ``(t_exponent, monomial)`` to a coefficient of ``ring.base``."""
        if not isinstance(ring, TateRing):
            raise TypeError("TateSeries needs a TateRing")
        vars = tuple(vars)
        weights = _check_vars(vars, None)
        flat = {}
        for (te, mono), coeff in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != len(vars) or min(mono, default=0) < 0:
                raise ValueError(f"bad monomial {mono} for variables {vars}")
            for g, c in _coeff_terms(coeff, ring.base):
                k = mono + (int(te),) + g
                flat[k] = flat.get(k, ZERO) + c
        flat = _clean(flat, len(vars), weights, int(order))
        flat, high = _clip_t(flat, len(vars), weights, ring, high, int(order))
        _init(self, ring, vars, weights, int(order), flat, high)

    @classmethod
    def t_power(cls, ring, vars, k, order):
        """The exact monomial t^k."""
        return cls(ring, vars, order, {(k, (0,) * len(vars)): 1})

    @property
    def low(self):
        """Reduced window bottom: min(0, lowest t-exponent present)."""
        v = self.t_valuation()
        return 0 if v == _INF else min(0, v)

    @property
    def window(self):
        return (self.low, self.effective_high)

    def t_shift(self, k):
        """Multiply by t^k exactly."""
        nv = len(self.vars)
        flat = {k0[:nv] + (k0[nv] + k,) + k0[nv + 1:]: c for k0, c in self.terms.items()}
        high = None if self.high is None else self.high + k
        return TruncSeries._from_flat(self.ring, self.vars, self.weights, self.order, flat, high, clean=False)

    def leading(self):
        """(lowest t-exponent, its coefficient) of a t-only series."""
        if self.vars:
            raise ValueError("leading() applies to series without x-variables")
        if not self.terms:
            raise NotAUnitError("zero has no leading coefficient")
        v = self.t_valuation()
        sub = {k[1:]: c for k, c in self.terms.items() if k[0] == v}
        return v, RingElement._raw(self.ring.base, sub)


# ---------------------------------------------------------------------------
# internals

def _init(obj, ring, vars, weights, order, flat, high):
    if order < 0:
        raise PrecisionError(f"truncation order {order} is negative")
    obj.ring = ring
    obj.vars = vars
    obj.weights = weights
    obj.order = order
    obj.terms = flat
    obj.high = high if isinstance(ring, TateRing) else None
    obj._hash = None


def _check_vars(vars, weights):
    if len(set(vars)) != len(vars):
        raise ValueError(f"duplicate variables in {vars}")
    if weights is None:
        return (1,) * len(vars)
    weights = tuple(int(w) for w in weights)
    if len(weights) != len(vars) or min(weights, default=1) < 1:
        raise ValueError(f"bad weights {weights} for variables {vars}")
    return weights


def _wdeg(key, nv, weights):
    if nv == 0:
        return 0
    if weights[0] == 1 and weights[-1] == 1 and all(w == 1 for w in weights):
        return sum(key[:nv])
    return sum(w * e for w, e in zip(weights, key))


def _clean(flat, nv, weights, order):
    out = {}
    for k, c in flat.items():
        if c and _wdeg(k, nv, weights) <= order:
            out[k] = c
    return out


def _clip_t(flat, nv, weights, ring, high, order):
    """Enforce the window floor and drop terms beyond the skewed precision.

    Skewed precision is capped at ``ring.cap``; with span = x-order that
    still keeps every t^e with e <= ring.high known at every x-degree, and
    it bounds the size of intermediate results.
    """
    cap = ring.cap
    top = _min_high(cap, high)
    if top is None:
        top = _INF
    dropped = False
    out = {}
    for k, c in flat.items():
        te = k[nv]
        if te < ring.low:
            raise WindowError(f"term t^{te} lies below the window bottom t^{ring.low}")
        if te + _wdeg(k, nv, weights) > top:
            dropped = True
            continue
        out[k] = c
    if high is not None or dropped:
        high = top
    return out, high



def _coeff_terms(coeff, ring):
    """Yield (generator exponents, scalar) pairs for a coefficient of ``ring``."""
    if isinstance(coeff, RingElement):
        if coeff.ring != ring:
            raise RingMismatchError(f"{coeff.ring} vs {ring}")
        return list(coeff.terms)
    if isinstance(coeff, str):
        return list(ring.parse(coeff).terms)
    c = to_scalar(coeff, ring.base)
    return [((0,) * ring.ngens, c)] if c else []


def _bump(h, k):
    return None if h is None else h + k


def _min_high(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _display_key(m, nv, tate):
    return ((m[nv] if tate else 0), mono_order_key(m[:nv]))


def _coeff_string(f, mono, te):
    nv = len(f.vars)
    base = f.base
    sub = {}
    for k, c in f.terms.items():
        if k[:nv] != tuple(mono):
            continue
        if f.is_tate:
            if k[nv] != te:
                continue
            sub[k[nv + 1:]] = c
        else:
            sub[k[nv:]] = c
    return str(RingElement._raw(base, sub))


def promote(f, ring):
    """Coerce a series into a larger coefficient ring.

    Supported targets: a GradedRing containing ``f.ring`` (generators by
    name), or a TateRing whose base contains it (terms land at t^0).
    """
    if f.ring == ring:
        return f
    src = f.ring
    nv = len(f.vars)
    if isinstance(src, TateRing):
        if not isinstance(ring, TateRing) or ring.t != src.t:
            raise RingMismatchError(f"cannot map {src} into {ring}")
        slots = src.base.embedding(ring.base)
        width = ring.base.ngens
        flat = {}
        for k, c in f.terms.items():
            g = [0] * width
            for i, j in enumerate(slots):
                g[j] = k[nv + 1 + i]
            flat[k[: nv + 1] + tuple(g)] = c
        return TruncSeries._from_flat(ring, f.vars, f.weights, f.order, flat, f.high, clean=False)
    target_base = ring.base if isinstance(ring, TateRing) else ring
    slots = src.embedding(target_base)
    width = target_base.ngens
    tslot = (0,) if isinstance(ring, TateRing) else ()
    flat = {}
    for k, c in f.terms.items():
        g = [0] * width
        for i, j in enumerate(slots):
            g[j] = k[nv + i]
        flat[k[:nv] + tslot + tuple(g)] = c
    return TruncSeries._from_flat(ring, f.vars, f.weights, f.order, flat, None, clean=False)


def common_ring(*rings):
    """Smallest ring all arguments embed into (Tate windows must agree)."""
    tates = {r for r in rings if isinstance(r, TateRing)}
    bases = [base_ring(r) for r in rings]
    base = bases[0]
    for b in bases[1:]:
        base = base.union(b)
    if not tates:
        return base
    if len({(r.low, r.high, r.t, r.span) for r in tates}) > 1:
        raise RingMismatchError("series live in Tate rings with different windows")
    r = next(iter(tates))
    return TateRing(base, r.low, r.high, r.t, r.span)


def coerce_all(*series):
    ring = common_ring(*(s.ring for s in series))
    return tuple(promote(s, ring) for s in series)


def _align(f, g):
    if f.ring != g.ring:
        if isinstance(f.ring, TateRing) and g.ring == f.ring.base:
            g = promote(g, f.ring)
        elif isinstance(g.ring, TateRing) and f.ring == g.ring.base:
            f = promote(f, g.ring)
        else:
            raise RingMismatchError(f"{f.ring} vs {g.ring}")
    if f.vars == g.vars:
        if f.weights != g.weights:
            raise RingMismatchError("variables carry different weights")
        return f, g
    vars = list(f.vars)
    weights = list(f.weights)
    for v, w in zip(g.vars, g.weights):
        if v not in vars:
            vars.append(v)
            weights.append(w)
    return f.with_vars(vars, weights), g.with_vars(vars, weights)


def _mul_high(f, g):
    """Skewed t-precision of a product (None = exact)."""
    if not f.is_tate:
        return None
    hf, hg = f.high, g.high
    if hf is None and hg is None:
        return None
    vf, vg = f.skew_valuation(), g.skew_valuation()
    if hf is None:
        return None if vf == _INF else hg + vf
    if hg is None:
        return None if vg == _INF else hf + vg
    return min(hf + vg, hg + vf)


def _multiply(f, g):
    nv = len(f.vars)
    w = f.weights
    order = min(f.order, g.order)
    high = _mul_high(f, g)
    tate = f.is_tate
    if len(f.terms) < len(g.terms):
        f, g = g, f
    gl = sorted(((_wdeg(k, nv, w), k, c) for k, c in g.terms.items()), key=itemgetter(0))
    gdegs = [d for d, _, _ in gl]
    out = {}
    get = out.get
    if tate:
        low = f.ring.low
        top = _min_high(f.ring.cap, high)
        if top is None:
            top = _INF
        dropped = False
        for ka, ca in f.terms.items():
            da = _wdeg(ka, nv, w)
            end = bisect_right(gdegs, order - da)
            ta = ka[nv]
            for db, kb, cb in gl[:end]:
                te = ta + kb[nv]
                if te + da + db > top:
                    dropped = True
                    continue
                if te < low:
                    raise WindowError(f"product term t^{te} lies below the window bottom t^{low}")
                k = tuple(map(add, ka, kb))
                c = get(k)
                out[k] = ca * cb if c is None else c + ca * cb
        if dropped and high is None:
            high = top
    else:
        for ka, ca in f.terms.items():
            end = bisect_right(gdegs, order - _wdeg(ka, nv, w))
            for _, kb, cb in gl[:end]:
                k = tuple(map(add, ka, kb))
                c = get(k)
                out[k] = ca * cb if c is None else c + ca * cb
    out = {k: c for k, c in out.items() if c}
    return TruncSeries._from_flat(f.ring, f.vars, f.weights, order, out, high, clean=False)


# ---------------------------------------------------------------------------
# public operations

def series_arith(f, g, which):
    """Dispatch ``add``/``sub``/``mul`` on two series."""
    if which == "add":
        return f + g
    if which == "sub":
        return f - g
    if which == "mul":
        return f * g
    raise ValueError(f"unknown series operation {which!r}")


def _x_constant_part(f):
    nv = len(f.vars)
    return {k[nv:]: c for k, c in f.terms.items() if not any(k[:nv])}


def _laurent_inverse(f):
    """Inverse of the x-constant part of a Tate series, as an x-free Tate series."""
    ring = f.ring
    base = ring.base
    part = _x_constant_part(f)
    if not part:
        raise NotAUnitError("x-constant term is zero (up to precision); not a unit")
    by_t = {}
    for k, c in part.items():
        by_t.setdefault(k[0], {})[k[1:]] = c
    v = min(by_t)
    lead = RingElement._raw(base, by_t[v])
    ok, lead_inv = lead.is_unit()
    if not ok:
        raise NotAUnitError(f"leading coefficient {lead} of t^{v} is not a unit")
    if -v < ring.low:
        raise WindowError(f"inverse needs t^{-v}, below the window bottom t^{ring.low}")
    exact = f.high is None
    if exact and len(by_t) == 1:
        flat = {(-v,) + g: c for g, c in lead_inv.terms}
        return TruncSeries._from_flat(ring, (), (), 0, flat, None, clean=False)
    # x-free, so the skewed precision is just the t-exponent
    if exact:
        top = (ring.cap if ring.cap is not None else ring.high + f.order) - v
    else:
        top = f.high - 2 * v
    coeffs = {e: RingElement._raw(base, d) for e, d in by_t.items()}
    inv = {}
    for k in range(0, top + v + 1):
        acc = base.one() if k == 0 else base.zero()
        for j in range(1, k + 1):
            cj = coeffs.get(v + j)
            if cj is not None:
                acc = acc - cj * inv[-v + k - j]
        inv[-v + k] = acc * lead_inv
    flat = {}
    for e, r in inv.items():
        for g, c in r.terms:
            flat[(e,) + g] = c
    return TruncSeries._from_flat(ring, (), (), 0, flat, top, clean=False)


def series_invert(f):
    """Multiplicative inverse to the available precision.

    Plain rings: the constant term must be a unit scalar.  Tate rings: the
    x-constant term is a Laurent series whose lowest coefficient must be a
    unit (leading-unit criterion).
    """
    if f.is_tate:
        c_inv = _laurent_inverse(f)
        c_inv = TruncSeries._from_flat(f.ring, f.vars, f.weights, f.order,
                                       {(0,) * len(f.vars) + k: c for k, c in c_inv.terms.items()},
                                       c_inv.high, clean=False)
    else:
        c0 = RingElement._raw(f.ring, _x_constant_part(f))
        ok, inv = c0.is_unit()
        if not ok:
            raise NotAUnitError(f"constant term {c0} is not a unit in {f.ring}")
        c_inv = TruncSeries.constant(f.ring, f.vars, inv, f.order, f.weights)
    h = f * c_inv
    u = h - h.one_like()
    # drop the (precision-zero) constant residue so u has positive valuation
    nv = len(f.vars)
    u = u._like({k: c for k, c in u.terms.items() if any(k[:nv])})
    # Horner on 1 - u + u^2 - ...; the s-th innermost step only matters to order D - (steps - s) * w0
    w0 = max(1, min(f.weights, default=1))
    steps = f.order // w0
    one = h.one_like()
    g = one.truncate(f.order - steps * w0)
    for s in range(1, steps + 1):
        o = f.order - (steps - s) * w0
        g = one.truncate(o) - u.truncate(o) * g._like(g.terms, order=o)
    return g * c_inv


def tate_arith(f, g=None, which="mul"):
    """Laurent-ring arithmetic: ``add``, ``mul`` or ``invert`` (g unused)."""
    if which == "invert":
        if not isinstance(f, TruncSeries) or not f.is_tate:
            raise TypeError("tate_arith expects a TateSeries")
        return series_invert(f)
    return series_arith(f, g, which)


def series_substitute(f, bindings):
    """Compose ``f`` with ``{variable: replacement series}``.

    Replacements must have zero constant term; unbound variables pass
    through.  The result carries the smallest order that is still exact.
    """
    bound = [v for v in f.vars if v in bindings]
    for v in bindings:
        if v not in f.vars:
            raise ValueError(f"binding for unknown variable {v!r}")
    if not bound:
        return f
    reps = [bindings[v] for v in bound]
    rings = [f.ring] + [r.ring for r in reps]
    ring = rings[0]
    if any(r != ring for r in rings):
        target = common_ring(*rings)
        if not all(r == target or (isinstance(target, TateRing) and r == target.base) for r in rings):
            raise RingMismatchError(f"substitution mixes rings {sorted(map(str, set(rings)))}")
        ring = target
        f = promote(f, ring)
        reps = [promote(r, ring) for r in reps]
    for v, r in zip(bound, reps):
        if _x_constant_part(r):
            raise PreconditionError(f"replacement for {v!r} has a nonzero constant term")
    # result variable layout
    out_vars = [v for v in f.vars if v not in bindings]
    out_w = [w for v, w in zip(f.vars, f.weights) if v not in bindings]
    for r in reps:
        for v, w in zip(r.vars, r.weights):
            if v in out_vars:
                if out_w[out_vars.index(v)] != w:
                    raise RingMismatchError(f"variable {v!r} has conflicting weights")
            else:
                out_vars.append(v)
                out_w.append(w)
    out_vars, out_w = tuple(out_vars), tuple(out_w)
    reps = [r.with_vars(out_vars, out_w) for r in reps]
    # precision
    wmap = dict(zip(f.vars, f.weights))
    factor = min([r.valuation() / wmap[v] for v, r in zip(bound, reps)] + [1])
    order_f = int((f.order + 1) * factor) - 1 if factor < 1 else f.order
    order = min([order_f] + [r.order for r in reps])
    if order < 0:
        raise PrecisionError("substitution leaves no significant terms")
    reps = [r.truncate(order) for r in reps]

    nv_f = len(f.vars)
    bidx = [f.vars.index(v) for v in bound]
    fidx = [(i, out_vars.index(v)) for i, v in enumerate(f.vars) if v not in bindings]
    width = len(out_vars)
    groups = {}
    for k, c in f.terms.items():
        be = tuple(k[i] for i in bidx)
        e = [0] * width
        for i, j in fidx:
            e[j] = k[i]
        groups.setdefault(be, []).append((tuple(e) + k[nv_f:], c))

    one = TruncSeries.one(ring, out_vars, order, out_w)
    powers = [[one] for _ in reps]
    cache = {(): one}

    def prod(be):
        if be in cache:
            return cache[be]
        head = prod(be[:-1])
        i = len(be) - 1
        pw = powers[i]
        while len(pw) <= be[-1]:
            pw.append(pw[-1] * reps[i])
        p = head * pw[be[-1]]
        cache[be] = p
        return p

    tate = isinstance(ring, TateRing)
    out = {}
    get = out.get
    high = None
    hf = f.high if tate else None
    bw = tuple(wmap[v] for v in bound)
    for be in sorted(groups):
        p = prod(be)
        if tate:
            # unknown f-terms in this group start at skew hf - |be| + 1; p scales by x^be -> p
            vp, hp = p.skew_valuation(), p.high
            if hf is not None and vp != _INF:
                high = _min_high(high, hf - sum(a * b for a, b in zip(be, bw)) + vp)
            if hp is not None:
                vg = min(ko[width] + _wdeg(ko, width, out_w) for ko, _ in groups[be])
                high = _min_high(high, hp + vg)
        for kp, cp in p.terms.items():
            dp = _wdeg(kp, width, out_w)
            for ko, co in groups[be]:
                if dp + _wdeg(ko, width, out_w) > order:
                    continue
                k = tuple(map(add, kp, ko))
                c = get(k)
                out[k] = cp * co if c is None else c + cp * co
    out = {k: c for k, c in out.items() if c}
    return TruncSeries._from_flat(ring, out_vars, out_w, order, out, high, clean=False)


def derivative(f, name):
    i = f.vars.index(name)
    flat = {}
    for k, c in f.terms.items():
        e = k[i]
        if e:
            k2 = k[:i] + (e - 1,) + k[i + 1:]
            flat[k2] = c * e
    return TruncSeries._from_flat(f.ring, f.vars, f.weights, f.order - f.weights[i], flat, _bump(f.high, -f.weights[i]), clean=False)


def integrate(f, name):
    """Formal antiderivative in ``name`` with zero constant; needs a Q base."""
    if not f.base.is_q_algebra:
        raise PreconditionError("integration needs a Q-algebra coefficient ring")
    i = f.vars.index(name)
    flat = {}
    for k, c in f.terms.items():
        e = k[i] + 1
        flat[k[:i] + (e,) + k[i + 1:]] = c / e
    return TruncSeries._from_flat(f.ring, f.vars, f.weights, f.order + f.weights[i], flat, _bump(f.high, f.weights[i]), clean=False)


def shift_down(f, name):
    """Divide by one power of ``name``; every term must be divisible."""
    i = f.vars.index(name)
    flat = {}
    for k, c in f.terms.items():
        if not k[i]:
            raise PreconditionError(f"series is not divisible by {name}")
        flat[k[:i] + (k[i] - 1,) + k[i + 1:]] = c
    return TruncSeries._from_flat(f.ring, f.vars, f.weights, f.order - f.weights[i], flat, _bump(f.high, -f.weights[i]), clean=False)


def shift_up(f, name):
    i = f.vars.index(name)
    flat = {k[:i] + (k[i] + 1,) + k[i + 1:]: c for k, c in f.terms.items()}
    return TruncSeries._from_flat(f.ring, f.vars, f.weights, f.order + f.weights[i], flat, _bump(f.high, f.weights[i]), clean=False)


def _require_integral(g, what):
    if g.base.base == "Z" and any(c.denominator != 1 for c in g.terms.values()):
        raise PreconditionError(f"{what}: non-exact division over integer base")
    return g


def series_reversion(f):
    """Compositional inverse of a one-variable series with f(0)=0, f'(0) a unit.

    Lagrange inversion: [x^k] g = (1/k) [x^(k-1)] (x/f)^k.
    """
    if len(f.vars) != 1 or f.weights != (1,):
        raise PreconditionError("reversion needs a single weight-1 variable")
    if f.is_tate:
        raise PreconditionError("reversion over Tate coefficients is not supported")
    x = f.vars[0]
    if _x_constant_part(f):
        raise PreconditionError("reversion needs f(0) = 0")
    lin = f.coefficient((1,))
    if not lin.is_unit()[0]:
        raise PreconditionError(f"linear coefficient {lin} is not a unit")
    D = f.order
    ratio = series_invert(shift_down(f, x))  # x / f(x), order D-1
    ring = f.ring
    flat = {}
    p = ratio.one_like()
    for k in range(1, D + 1):
        p = p * ratio
        ck = p.coefficient((k - 1,))
        for g, c in ck.terms:
            flat[(k,) + g] = c / k
    return _require_integral(TruncSeries._from_flat(ring, f.vars, f.weights, D, flat), "reversion")


def series_sqrt(f):
    """Square root with constant term 1 (the constant term of f must be 1)."""
    part = _x_constant_part(f)
    unit_key = (0,) * coefficient_width(f.ring)
    if part != {unit_key: ONE}:
        raise PreconditionError("series_sqrt needs constant term exactly 1")
    nv = len(f.vars)
    r = f._like({k: c for k, c in f.terms.items() if any(k[:nv])})
    half = mpq(1, 2)
    s = r._like({})
    for _ in range(f.order // max(1, min(f.weights, default=1))):
        d = r - s * s
        # scale the raw coefficients so a Z base reaches the integrality check
        s = d._like({k: c * half for k, c in d.terms.items()})
    return _require_integral(s + f.one_like(), "square root")


def to_tate(f, tvar, ring, order=None, shift=0):
    """Reinterpret series variable ``tvar`` as the Laurent variable of ``ring``.

    ``f`` must give ``tvar`` weight 1.  The result keeps x-degrees up to
    ``order`` (default: f's order) and is multiplied by t^shift.  An input
    truncated at total degree N is known exactly for t-exponent + x-degree
    <= N, which is the skewed precision N + shift.
    """
    if f.is_tate:
        raise PreconditionError("series already has Tate coefficients")
    i = f.vars.index(tvar)
    if f.weights[i] != 1:
        raise PreconditionError("Tate variable must have weight 1")
    f = promote(f, ring.base) if f.ring != ring.base else f
    N = f.order
    D = N if order is None else min(order, N)
    nv = len(f.vars)
    keep = [j for j in range(nv) if j != i]
    vars = tuple(f.vars[j] for j in keep)
    weights = tuple(f.weights[j] for j in keep)
    flat = {}
    for k, c in f.terms.items():
        mono = tuple(k[j] for j in keep)
        if _wdeg(mono, len(vars), weights) > D:
            continue
        flat[mono + (k[i] + shift,) + k[nv:]] = c
    return TruncSeries._from_flat(ring, vars, weights, D, flat, N + shift, clean=False)


def with_window(f, ring):
    """Move a Tate series into another window over the same base."""
    if not f.is_tate or not isinstance(ring, TateRing):
        raise RingMismatchError("with_window needs Tate series and ring")
    if ring.base != f.ring.base or ring.t != f.ring.t:
        f = promote(f, TateRing(ring.base, f.ring.low, f.ring.high, ring.t, f.ring.span))
    return TruncSeries._from_flat(ring, f.vars, f.weights, f.order, f.terms, f.high, clean=False)


def elementary_symmetric(ring, vars, k, order):
    """e_k in the given variables."""
    from itertools import combinations

    nv = len(vars)
    flat = {}
    w = (0,) * coefficient_width(ring)
    for idx in combinations(range(nv), k):
        e = [0] * nv
        for i in idx:
            e[i] = 1
        flat[tuple(e) + w] = ONE
    return TruncSeries._from_flat(ring, tuple(vars), (1,) * nv, order, flat)


def symmetrize_check(f):
    """Brute-force symmetry check under every permutation (test helper)."""
    nv = len(f.vars)
    return all(f.permute(p) == f for p in permutations(range(nv)))
