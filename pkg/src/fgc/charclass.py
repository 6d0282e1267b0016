"""Exponential characteristic classes, splitting-principle evaluation and genera."""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .algebra.rings import GradedRing, RingElement, TateRing, base_ring
from .algebra.series import (
    TruncSeries,
    promote,
    series_invert,
    shift_down,
)
from .errors import PrecisionError, PreconditionError, RingMismatchError
from .fgl import fgl_apply, fgl_exp


@dataclass(frozen=True)
class ExpClass:
    """Characteristic series f(x) with f(0) = 1."""

    f: TruncSeries
    name: str = ""

    def __post_init__(self):
        f = self.f
        if len(f.vars) != 1:
            raise PreconditionError("a characteristic series has exactly one variable")
        c0 = f.constant_term()
        if not (c0 - 1).is_zero():
            raise PreconditionError(f"characteristic series must have f(0) = 1, got {c0}")

    @property
    def ring(self):
        return self.f.ring

    @property
    def order(self):
        return self.f.order

    def is_homogeneous(self):
        return self.f.cohomological_degree() in (0, "any")


@dataclass(frozen=True)
class BundleData:
    """A complex bundle in the splitting model.

    Exactly one of ``roots`` (formal Chern-root variable names) and
    ``classes`` (RingElements c_1..c_n) is set.
    """

    rank: int
    roots: tuple = None
    classes: tuple = None

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be non-negative")
        if (self.roots is None) == (self.classes is None):
            raise ValueError("give either roots or classes")
        if self.roots is not None:
            if len(self.roots) != self.rank or len(set(self.roots)) != self.rank:
                raise ValueError("roots must be rank-many distinct names")
        elif len(self.classes) != self.rank:
            raise ValueError("classes must list c_1..c_n")

    @classmethod
    def from_roots(cls, roots):
        roots = tuple(roots)
        return cls(len(roots), roots=roots)

    @classmethod
    def root_names(cls, n, prefix="x"):
        return cls.from_roots(f"{prefix}{i}" for i in range(1, n + 1))

    @classmethod
    def from_classes(cls, classes):
        classes = tuple(classes)
        return cls(len(classes), classes=classes)

    @classmethod
    def formal(cls, n, base="Q"):
        """Opaque classes c1..cn adjoined as generators of degree 2k."""
        ring = GradedRing(base, tuple((f"c{k}", 2 * k) for k in range(1, n + 1)))
        return cls.from_classes(ring.gen(f"c{k}") for k in range(1, n + 1))

    @classmethod
    def trivial(cls, n, ring=None):
        ring = ring or GradedRing("Q")
        return cls.from_classes(ring.zero() for _ in range(n))

    def __add__(self, other):
        if self.roots is None or other.roots is None:
            raise PreconditionError("direct sums are formed on Chern roots")
        return BundleData.from_roots(self.roots + other.roots)


# ---------------------------------------------------------------------------
# symmetric functions

def sigma_names(n):
    return tuple(f"sigma{k}" for k in range(1, n + 1))


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


def _elementary(n, k):
    from itertools import combinations

    out = {}
    for idx in combinations(range(n), k):
        e = [0] * n
        for i in idx:
            e[i] = 1
        out[tuple(e)] = 1
    return out


class _SigmaProducts:
    """Cache of expansions sigma^beta as integer polynomials in the roots."""

    def __init__(self, n):
        self.n = n
        self.e = [None] + [_elementary(n, k) for k in range(1, n + 1)]
        self.cache = {(0,) * n: {(0,) * n: 1}}

    def get(self, beta):
        if beta in self.cache:
            return self.cache[beta]
        # peel one factor off the last nonzero slot
        k = max(i for i, b in enumerate(beta) if b)
        prev = beta[:k] + (beta[k] - 1,) + beta[k + 1:]
        val = _poly_mul(self.get(prev), self.e[k + 1])
        self.cache[beta] = val
        return val


def symmetric_expand(p, n=None):
    """Rewrite a symmetric series in its roots as a series in sigma1..sigman.

    sigma_k has weight k, so the output truncation order equals the input's.
    Uses graded-lex leading-term elimination; coefficients (including any
    Laurent part) are carried along unchanged.
    """
    nv = len(p.vars)
    if n is not None and n != nv:
        raise PreconditionError(f"series has {nv} variables, expected {n}")
    if any(w != 1 for w in p.weights):
        raise PreconditionError("roots must have weight 1")
    if not p.is_symmetric():
        raise PreconditionError("series is not symmetric in its variables")
    rem = {}
    for k, c in p.terms.items():
        rem.setdefault(k[:nv], {})[k[nv:]] = c
    sig = _SigmaProducts(nv)
    out = {}
    while rem:
        lead = max(rem, key=lambda m: (sum(m), m))
        coeffs = rem.pop(lead)
        beta = tuple(lead[i] - lead[i + 1] for i in range(nv - 1)) + ((lead[-1],) if nv else ())
        if min(beta, default=0) < 0:
            raise PreconditionError("series is not symmetric in its variables")
        for cp, c in coeffs.items():
            key = beta + cp
            out[key] = out.get(key, 0) + c
        for m, k in sig.get(beta).items():
            if m == lead:
                continue
            slot = rem.setdefault(m, {})
            for cp, c in coeffs.items():
                s = slot.get(cp, 0) - k * c
                if s:
                    slot[cp] = s
                else:
                    slot.pop(cp, None)
            if not slot:
                del rem[m]
    weights = tuple(range(1, nv + 1))
    out = {k: mpq(c) for k, c in out.items() if c}
    return TruncSeries._from_flat(p.ring, sigma_names(nv), weights, p.order, out, p.high)


def substitute_elementary(G, roots):
    """Inverse of symmetric_expand: put sigma_k = e_k(roots)."""
    n = len(roots)
    nv = len(G.vars)
    if nv != n:
        raise PreconditionError("root count must match the number of sigma variables")
    sig = _SigmaProducts(n)
    out = {}
    for k, c in G.terms.items():
        for m, mult in sig.get(k[:nv]).items():
            key = m + k[nv:]
            out[key] = out.get(key, 0) + mult * c
    out = {k: v for k, v in out.items() if v}
    return TruncSeries._from_flat(G.ring, tuple(roots), (1,) * n, G.order, out, G.high)


# ---------------------------------------------------------------------------
# classes on bundles

def product_over_roots(c, roots):
    """prod_i f(x_i) as a series in the named roots."""
    roots = tuple(roots)
    f = c.f
    acc = TruncSeries.one(f.ring, roots, f.order)
    for r in roots:
        acc = acc * f.rename({f.vars[0]: r}).with_vars(roots)
    return acc


def class_on_bundle(c, V, degree=None):
    """c(V): a series in the roots, or an element evaluated at c_1..c_n.

    For ChernClasses input the result is exact through cohomological
    degree ``degree`` (default: the truncation order of c); higher terms
    are omitted.  Tate-valued classes return an x-free TateSeries.
    """
    if V.roots is not None:
        return product_over_roots(c, V.roots)
    n = V.rank
    degree = c.order if degree is None else degree
    if degree > c.order:
        raise PrecisionError(f"class known to order {c.order}, degree {degree} requested")
    formal = tuple(f"_r{i}" for i in range(1, n + 1))
    G = symmetric_expand(product_over_roots(c, formal), n)
    return evaluate_at_classes(G, V.classes, degree)


def evaluate_at_classes(G, classes, degree=None):
    """Evaluate a series in sigma_1..sigma_n at ring elements c_1..c_n."""
    n = len(G.vars)
    degree = G.order if degree is None else degree
    base = base_ring(G.ring)
    for cl in classes:
        if isinstance(cl, RingElement):
            base = base.union(cl.ring)
    ring = TateRing(base, G.ring.low, G.ring.high, G.ring.t, G.ring.span) if G.is_tate else base
    G = promote(G, ring)
    cls = []
    for cl in classes:
        if isinstance(cl, RingElement):
            cls.append(RingElement._raw(base, _embed(cl, base)))
        else:
            cls.append(base.constant(cl))
    cache = {}

    def power(beta):
        if beta not in cache:
            acc = base.one()
            for ck, b in zip(cls, beta):
                if b:
                    acc = acc * ck ** b
            cache[beta] = acc
        return cache[beta]

    out = {}
    for k, c in G.terms.items():
        beta = k[:n]
        if sum(w * b for w, b in zip(G.weights, beta)) > degree:
            continue
        rest = k[n:]
        lead = rest[:1] if G.is_tate else ()
        g0 = rest[1:] if G.is_tate else rest
        for g, s in power(beta).terms:
            key = lead + tuple(a + b for a, b in zip(g0, g))
            out[key] = out.get(key, 0) + s * c
    out = {k: v for k, v in out.items() if v}
    if G.is_tate:
        return TruncSeries._from_flat(ring, (), (), 0, out, G.high, clean=False)
    return RingElement._raw(base, out)


def _embed(a, target):
    slots = a.ring.embedding(target)
    out = {}
    for e, c in a.terms:
        g = [0] * target.ngens
        for i, j in enumerate(slots):
            g[j] = e[i]
        out[tuple(g)] = c
    return out


def orientation_quotient(g):
    """The class g(x)/x for a coordinate change g(x) = x + O(x^2)."""
    if len(g.vars) != 1:
        raise PreconditionError("coordinate change must be a one-variable series")
    x = g.vars[0]
    if g.order < 1:
        raise PrecisionError("coordinate change needs order at least 1")
    if g.coefficient((0,)):
        raise PreconditionError("coordinate change must vanish at 0")
    lin = g.coefficient((1,))
    if lin != 1:
        raise PreconditionError(f"coordinate change must have linear coefficient 1, got {lin}")
    return ExpClass(shift_down(g, x), "quotient")


def hirzebruch_series(law):
    """x / exp_F(x)."""
    exp = fgl_exp(law)
    return ExpClass(series_invert(shift_down(exp, exp.vars[0])), f"hirzebruch[{law.name}]")


def euler_of_twist(law, V, t="t"):
    """e(V tensor L) = prod_i (x_i +_F t), a series in the roots and t."""
    if V.roots is None:
        raise PreconditionError("euler_of_twist needs Chern roots")
    if t in V.roots:
        raise RingMismatchError(f"twist variable {t!r} clashes with a root")
    D = law.order
    vars = tuple(V.roots) + (t,)
    T = TruncSeries.variable(law.ring, (t,), t, D)
    acc = TruncSeries.one(law.ring, vars, D)
    for r in V.roots:
        x = TruncSeries.variable(law.ring, (r,), r, D)
        acc = acc * fgl_apply(law, x, T).with_vars(vars)
    return acc


def genus_cpn(Q, n):
    """Coefficient of x^n in Q(x)^(n+1)."""
    if n < 0:
        raise PreconditionError("n must be non-negative")
    if Q.order < n:
        raise PrecisionError(f"series known to order {Q.order}, genus of CP^{n} needs {n}")
    f = Q.f.truncate(n)
    return (f ** (n + 1)).coefficient((n,))


# ---------------------------------------------------------------------------
# classical series

def _exp_coeffs(order, scale=1):
    out = [mpq(1)]
    for k in range(1, order + 1):
        out.append(out[-1] * scale / k)
    return out


def todd_series(order, ring=None, var="x"):
    """x / (1 - e^(-x))."""
    ring = ring or GradedRing("Q")
    c = _exp_coeffs(order + 1, -1)
    # (1 - e^(-x)) / x = -sum_{k>=1} c_k x^(k-1)
    q = TruncSeries(ring, (var,), order, {(k - 1,): -c[k] for k in range(1, order + 2)})
    return ExpClass(series_invert(q), "todd")


def l_series(order, ring=None, var="x"):
    """x / tanh(x)."""
    ring = ring or GradedRing("Q")
    c = _exp_coeffs(order + 1)
    cosh = TruncSeries(ring, (var,), order, {(k,): c[k] for k in range(0, order + 1, 2)})
    sinh_x = TruncSeries(ring, (var,), order, {(k - 1,): c[k] for k in range(1, order + 2, 2)})
    return ExpClass(cosh * series_invert(sinh_x), "signature")


def one_series(order, ring=None, var="x"):
    ring = ring or GradedRing("Q")
    return ExpClass(TruncSeries.one(ring, (var,), order), "one")
