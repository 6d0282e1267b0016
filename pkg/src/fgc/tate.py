"""The Euler-Tate class at series level.

Everything here lives in R((t))[[x_1..x_n]] with |t| = 2.  A context fixes
the law, the x-truncation D and the output window [low, high]; the law
must be known to total degree D + high + (extra per operation), and
:func:`tate_context` builds built-in laws at a sufficient order.
"""
from __future__ import annotations

from dataclasses import dataclass

from .algebra.rings import TateRing
from .algebra.series import TateSeries, TruncSeries, series_invert, to_tate, with_window
from .charclass import BundleData, ExpClass, class_on_bundle, substitute_elementary, symmetric_expand
from .errors import PrecisionError, PreconditionError, WindowError
from .fgl import FormalGroupLaw, fgl_standard


@dataclass(frozen=True)
class TateContext:
    law: FormalGroupLaw
    order: int = 6
    low: int = -8
    high: int = 8
    t: str = "t"

    def __post_init__(self):
        if self.order < 0:
            raise PreconditionError("x-truncation must be non-negative")
        if not self.low <= 0 <= self.high:
            raise PreconditionError(f"window [{self.low}, {self.high}] must contain 0")
        if self.law.order < self.order + 1:
            raise PrecisionError(f"law known to order {self.law.order}; need at least {self.order + 1}")

    @property
    def ring(self):
        return TateRing(self.law.ring, self.low, self.high, self.t, self.order)

    def work_ring(self, low=0, extra=0):
        """Wider window for intermediate steps that later shift by t^-extra."""
        return TateRing(self.law.ring, min(low, self.low), self.high + extra, self.t, self.order)


def required_law_order(order, high, rank=1, invert=False):
    """Total degree of F needed for full precision through t^high."""
    return order + high + (2 * rank if invert else max(1, rank))


def minimal_window(rank, order, invert=False):
    """Lowest t-exponent that occurs: tch(V) reaches t^-min(n, D), e(V(x)L)^-1 reaches t^-(n+D)."""
    if invert:
        return -(rank + order)
    return -min(rank, order)


def tate_context(law, order=6, window=(-8, 8), rank=1, invert=False, k=None, ring=None):
    """Context with a built-in law (by name) computed to the order the window needs."""
    low, high = window
    if isinstance(law, FormalGroupLaw):
        return TateContext(law, order, low, high)
    need = max(required_law_order(order, high, rank, invert), order + 1)
    return TateContext(fgl_standard(law, need, k=k, ring=ring), order, low, high)


def _twist_factor(ctx, root, ring, shift):
    """(x +_F t) * t^shift as a Tate series in the single variable ``root``."""
    F = ctx.law.F.rename({"x": "_x", "y": "_y"}).rename({"_x": root, "_y": ctx.t})
    return to_tate(F, ctx.t, ring, ctx.order, shift=shift)


def euler_tate_series(ctx, var="x"):
    """(x +_F t) / t."""
    if ctx.low > -1 and ctx.order >= 1:
        raise WindowError("the Euler-Tate series needs t^-1; widen the window")
    return _twist_factor(ctx, var, ctx.ring, -1)


def euler_twist_tate(ctx, V, ring=None):
    """e(V tensor L) = prod (x_i +_F t) in the Laurent ring."""
    ring = ring or ctx.ring
    roots = tuple(V.roots)
    acc = TateSeries.t_power(ring, roots, 0, ctx.order)
    for r in roots:
        acc = acc * _twist_factor(ctx, r, ring, 0).with_vars(roots)
    return acc


def tch_on_bundle(ctx, V):
    """tch(V) = e(V tensor L) / e(L)^n.

    Roots give a series in the roots; ChernClasses give an x-free Laurent
    series through the characteristic series expansion.
    """
    if V.roots is None:
        return class_on_bundle(ExpClass(euler_tate_series(ctx), "tch"), V, ctx.order)
    n = V.rank
    work = ctx.work_ring(-n, n)
    e = euler_twist_tate(ctx, V, work)
    tn = TateSeries.t_power(work, tuple(V.roots), n, ctx.order)
    return with_window(e * series_invert(tn), ctx.ring)


def tch_by_expansion(ctx, V):
    """tch(V) through the characteristic series: G(e_1(x),..,e_n(x)) for G = expand(prod f(x_i))."""
    if V.roots is None:
        raise PreconditionError("expansion check works on Chern roots")
    f = ExpClass(euler_tate_series(ctx), "tch")
    formal = tuple(f"_r{i}" for i in range(1, V.rank + 1))
    from .charclass import product_over_roots

    G = symmetric_expand(product_over_roots(f, formal), V.rank)
    return substitute_elementary(G, tuple(V.roots))


def tate_invert_euler(ctx, V):
    """The inverse of e(V tensor L) in R((t))[[x_1..x_n]]."""
    if V.roots is None:
        raise PreconditionError("tate_invert_euler needs Chern roots")
    need = minimal_window(V.rank, ctx.order, invert=True)
    if ctx.low > need and V.rank:
        raise WindowError(f"inverse reaches t^{need}; window bottom is t^{ctx.low}")
    # e(V tensor L) is a product of line-bundle factors; invert each and multiply
    work = ctx.work_ring(extra=2 * V.rank)
    roots = tuple(V.roots)
    acc = TateSeries.t_power(work, roots, 0, ctx.order)
    for r in roots:
        acc = acc * series_invert(_twist_factor(ctx, r, work, 0)).with_vars(roots)
    return with_window(acc, ctx.ring)


def beta_coefficient(ctx):
    """Coefficient of x in the Euler-Tate series, with its unit verdict."""
    f = euler_tate_series(ctx)
    beta = f.coefficient((1,))
    try:
        v, lead = beta.leading()
        unit = lead.is_unit()[0]
    except ArithmeticError:
        v, lead, unit = None, None, False
    return beta, {"unit": unit, "leading_exponent": v, "leading_coefficient": str(lead) if lead is not None else None}


def elementary_tate_sum(ctx, V):
    """sum_k e_k(roots) t^-k, exact."""
    from itertools import combinations

    roots = tuple(V.roots)
    n = len(roots)
    terms = {}
    for k in range(n + 1):
        if k > ctx.order:
            break
        for idx in combinations(range(n), k):
            mono = tuple(1 if i in idx else 0 for i in range(n))
            terms[(-k, mono)] = 1
    return TateSeries(ctx.ring, roots, ctx.order, terms)


def total_chern_check(ctx, V, order=None, series=None):
    """Compare tch(V) (or ``series``) with sum_k e_k t^-k through x-degree ``order``."""
    if ctx.law.name != "additive":
        raise PreconditionError("the total Chern class identity holds for the additive law")
    order = ctx.order if order is None else order
    if order > ctx.order:
        raise PrecisionError(f"context truncates at {ctx.order}, check asks for {order}")
    lhs = tch_on_bundle(ctx, V) if series is None else series
    rhs = elementary_tate_sum(ctx, V)
    diff = lhs.first_mismatch(rhs, order=order, high=ctx.high)
    return {
        "passed": diff is None,
        "rank": V.rank,
        "order": order,
        "window": [ctx.low, min(ctx.high, lhs.effective_high)],
        "mismatch": diff,
    }


def roots_bundle(n):
    return BundleData.root_names(n)


def as_tate(f, ctx):
    """Promote a plain series in the context's coefficient ring to its Tate ring."""
    from .algebra.series import promote

    if isinstance(f, TruncSeries) and f.is_tate:
        return with_window(f, ctx.ring)
    return promote(f, ctx.ring)
