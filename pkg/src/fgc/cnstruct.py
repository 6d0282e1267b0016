"""C^n-structures: symmetric, normalized unit series with a bar cocycle condition.

Faces of the bar construction act on an n-variable series f by pulling
back along maps (x_0..x_n) -> n coordinates:

* d_0 drops x_0,
* d_i (1 <= i <= n) replaces the pair (x_{i-1}, x_i) by x_{i-1} +_F x_i,
* d_{n+1} drops x_n.

The cocycle defect is the alternating product prod_i (f o d_i)^((-1)^i).
At level 1 every normalized unit series is accepted (orientations of MU
are exactly such series); the defect there is still reported as the
``homomorphic`` flag.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .algebra.series import TruncSeries, series_invert, series_substitute, to_tate
from .errors import PrecisionError, PreconditionError
from .fgl import FormalGroupLaw, fgl_apply
from .tate import TateContext, beta_coefficient, euler_tate_series


def slot_names(n, start=1, prefix="x"):
    return tuple(f"{prefix}{i}" for i in range(start, start + n))


@dataclass(frozen=True)
class CnStructure:
    n: int
    law: FormalGroupLaw
    f: TruncSeries
    verified_to: int = -1

    def __post_init__(self):
        if self.n < 0:
            raise PreconditionError("n must be non-negative")
        want = 1 if self.n == 0 else self.n
        if len(self.f.vars) != want:
            raise PreconditionError(f"a C^{self.n} series has {want} variable(s), got {len(self.f.vars)}")

    @property
    def order(self):
        return self.f.order

    @property
    def ring(self):
        return self.f.ring


def _coord(law, name, order):
    return TruncSeries.variable(law.ring, (name,), name, order)


def bar_map(i, n, law, order=None, names=None):
    """Bindings realizing the face d_i for an n-variable series.

    ``names`` are the series' variable names (default x1..xn); the
    replacements are series in x0..xn.
    """
    if not 0 <= i <= n + 1:
        raise PreconditionError(f"face index {i} outside 0..{n + 1}")
    order = law.order if order is None else order
    names = slot_names(n) if names is None else tuple(names)
    X = [_coord(law, f"x{k}", order) for k in range(n + 1)]
    out = {}
    for k, name in enumerate(names, start=1):
        if i == 0 or k > i:
            out[name] = X[k]
        elif k < i or i == n + 1:
            out[name] = X[k - 1]
        else:
            out[name] = fgl_apply(law.truncate(order), X[k - 1], X[k])
    return out


def face_coordinates(i, n, law, order=None):
    """The face d_i as an n-tuple of series in x0..xn (for simplicial checks)."""
    b = bar_map(i, n, law, order)
    return tuple(b[name] for name in slot_names(n))


def _require_unit(f):
    c0 = f.constant_term()
    if not (c0 - 1).is_zero():
        raise PreconditionError(f"series must have constant term 1, got {c0}")


def pullback(f, i, law, order=None):
    n = len(f.vars)
    order = min(f.order, law.order) if order is None else order
    out_vars = slot_names(n + 1, start=0)
    g = series_substitute(f, bar_map(i, n, law, order, f.vars))
    return g.with_vars(out_vars)


def cocycle_defect(f, law, order=None):
    """prod_{i=0}^{n+1} (f o d_i)^((-1)^i) in x0..xn."""
    if isinstance(f, CnStructure):
        f, law = f.f, f.law
    _require_unit(f)
    n = len(f.vars)
    order = min(f.order, law.order) if order is None else order
    f = f.truncate(order)
    num = den = None
    for i in range(n + 2):
        p = pullback(f, i, law, order)
        if i % 2 == 0:
            num = p if num is None else num * p
        else:
            den = p if den is None else den * p
    return num * series_invert(den)


def bar_differential(g, law, order=None):
    """Delta g, reindexed to x1..x_{n+1}."""
    n = len(g.vars)
    _require_unit(g)
    if n >= 1:
        if not g.is_symmetric():
            raise PreconditionError("bar differential input must be symmetric")
        if not _normalized(g)[0]:
            raise PreconditionError("bar differential input must be normalized")
    d = cocycle_defect(g, law, order)
    return d.rename({f"x{k}": f"_y{k}" for k in range(n + 1)}).rename(
        {f"_y{k}": f"x{k + 1}" for k in range(n + 1)}
    )


def _one_like(f):
    return f.one_like()


def _normalized(f):
    """f with any single variable set to 0 equals 1 (within precision)."""
    one = _one_like(f)
    for v in f.vars:
        diff = f.set_zero(v).first_mismatch(one)
        if diff is not None:
            return False, {"check": "normalized", "var": v, **diff}
    return True, None


def _first_failure_degree(diff):
    return sum(diff["mono"])


def verify_cn(s, order=None):
    """Check the C^n conditions up to ``order``; returns ``(report, structure)``."""
    order = s.order if order is None else order
    if order > s.order:
        raise PrecisionError(f"verify order {order} exceeds the series truncation {s.order}")
    f = s.f.truncate(order)
    report = {"n": s.n, "order": order}
    failure = None
    if f.is_tate:
        report["window"] = [f.ring.low, f.effective_high]
    if s.n == 0:
        c0 = f.constant_term()
        report["normalized"] = (c0 - 1).is_zero()
        if not report["normalized"]:
            failure = {"check": "normalized", "value": str(c0)}
        if order < 1:
            raise PrecisionError("the C^0 unit check needs order >= 1")
        b = f.coefficient((1,))
        if f.is_tate:
            try:
                v, lead = b.leading()
                unit = lead.is_unit()[0]
            except ArithmeticError:
                v, lead, unit = None, None, False
            report["bottom_leading"] = None if v is None else {"t": v, "coeff": str(lead)}
        else:
            unit = b.is_unit()[0]
            report["bottom_leading"] = {"t": None, "coeff": str(b)}
        report["unit"] = unit
        if not unit and failure is None:
            failure = {"check": "unit", "value": str(b)}
        report["passed"] = report["normalized"] and unit
    else:
        report["symmetric"] = f.is_symmetric()
        if not report["symmetric"]:
            failure = {"check": "symmetric"}
        ok, diff = _normalized(f)
        report["normalized"] = ok
        if not ok and failure is None:
            failure = diff
        unit = (f.constant_term() - 1).is_zero()
        if not unit:
            report["cocycle_to"] = -1
            failure = failure or {"check": "unit", "value": str(f.constant_term())}
        else:
            defect = cocycle_defect(f, s.law, order)
            diff = defect.first_mismatch(defect.one_like())
            if s.n == 1:
                report["homomorphic"] = diff is None
                report["cocycle_to"] = order
            else:
                report["cocycle_to"] = order if diff is None else _first_failure_degree(diff) - 1
                if diff is not None and failure is None:
                    failure = {"check": "cocycle", **diff}
        report["passed"] = report["symmetric"] and ok and report["cocycle_to"] >= order
    report["first_failure"] = failure
    if report["passed"] and order > s.verified_to:
        s = replace(s, verified_to=order)
    return report, s


def sharp(s, ctx: TateContext, check=True):
    """C^{m+1} over R -> C^m over R((t)): put t in the last slot."""
    if s.n < 2:
        raise PreconditionError("sharp needs a C^n structure with n >= 2")
    if s.f.is_tate:
        raise PreconditionError("sharp input must have plain coefficients")
    if check and s.verified_to < ctx.order:
        report, s = verify_cn(s, min(ctx.order, s.order))
        if not report["passed"]:
            raise PreconditionError(f"sharp input fails verification: {report['first_failure']}")
    if s.verified_to < 0:
        raise PreconditionError("sharp input is unverified")
    last = s.f.vars[-1]
    if ctx.t in s.f.vars[:-1]:
        raise PreconditionError(f"variable {ctx.t!r} clashes with the Tate variable")
    f = s.f.rename({last: ctx.t})
    g = to_tate(f, ctx.t, ctx.ring, min(ctx.order, s.order))
    out = CnStructure(s.n - 1, s.law, g)
    report, out = verify_cn(out, min(g.order, s.verified_to))
    return out, report


def sharp0(ctx):
    """The C^0 structure (x +_F t)/t over the Tate ring."""
    y = euler_tate_series(ctx)
    s = CnStructure(0, ctx.law, y)
    report, s = verify_cn(s)
    beta, verdict = beta_coefficient(ctx)
    report["beta_unit"] = verdict["unit"]
    return s, report


def adjoint_series(g, ctx):
    """(Delta g)(x, t) = g(x) g(t) / g(x +_F t) over the Tate ring."""
    if len(g.vars) != 1:
        raise PreconditionError("adjoint_series takes a one-variable series")
    _require_unit(g)
    d = bar_differential(g.rename({g.vars[0]: "x1"}), ctx.law)
    d = d.rename({"x1": "x", "x2": ctx.t})
    return to_tate(d, ctx.t, ctx.ring, min(ctx.order, d.order))
