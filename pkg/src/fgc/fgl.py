"""Formal group laws as verified two-variable series."""
from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .algebra.rings import GradedRing, RingElement
from .algebra.series import (
    TruncSeries,
    derivative,
    integrate,
    series_invert,
    series_reversion,
    series_sqrt,
    series_substitute,
)
from .errors import PreconditionError

MAX_ORDER = 40
MAX_GENS = 12

LAWS = ("additive", "multiplicative", "universal_rational", "jacobi_quartic", "broken-example")


@dataclass(frozen=True)
class FormalGroupLaw:
    F: TruncSeries
    name: str = ""
    verified_to: int = -1

    @property
    def ring(self):
        return self.F.ring

    @property
    def order(self):
        return self.F.order

    def __call__(self, f, g):
        return fgl_apply(self, f, g)

    def coefficient(self, i, j) -> RingElement:
        """a_ij, the coefficient of x^i y^j."""
        return self.F.coefficient((i, j))

    def truncate(self, order):
        return replace(self, F=self.F.truncate(order), verified_to=min(self.verified_to, order))

    def with_ring(self, ring):
        from .algebra.series import promote

        return replace(self, F=promote(self.F, ring))

    def __str__(self):
        return f"{self.name or 'F'}(x,y) = {self.F}"


def _xy(ring, order):
    x = TruncSeries.variable(ring, ("x", "y"), "x", order)
    y = TruncSeries.variable(ring, ("x", "y"), "y", order)
    return x, y


def _one_var(ring, order, name="x"):
    return TruncSeries.variable(ring, (name,), name, order)


def parse_law(text):
    """``"universal_rational(6)"`` -> ``("universal_rational", 6)``."""
    m = re.fullmatch(r"\s*([A-Za-z_-]+)\s*(?:\(\s*(\d+)\s*\))?\s*", text)
    if not m:
        raise PreconditionError(f"cannot read law name {text!r}")
    name = m.group(1).replace("-", "_")
    if name == "broken_example":
        name = "broken-example"
    if name not in LAWS:
        raise PreconditionError(f"unknown law {m.group(1)!r}; choose from {', '.join(LAWS)}")
    return name, int(m.group(2)) if m.group(2) else None


def standard_ring(which, k=None, base="Q"):
    if which == "multiplicative":
        return GradedRing(base, (("u", 2),))
    if which == "universal_rational":
        return GradedRing("Q", tuple((f"m{i}", 2 * i) for i in range(1, (k or 0) + 1)))
    if which == "jacobi_quartic":
        return GradedRing("Q", (("delta", 4), ("epsilon", 8)))
    return GradedRing(base)


def fgl_standard(which, order, k=None, ring=None) -> FormalGroupLaw:
    """Build a built-in law to truncation ``order``.

    ``which`` may carry its parameter, e.g. ``"universal_rational(4)"``.
    ``ring`` overrides the default coefficient ring when the law allows it.
    """
    name, param = parse_law(which)
    k = param if k is None else k
    if order < 1:
        raise PreconditionError("order must be at least 1")
    if order > MAX_ORDER:
        raise PreconditionError(f"order {order} exceeds the supported bound {MAX_ORDER}")
    if name == "additive":
        ring = ring or GradedRing("Q")
        x, y = _xy(ring, order)
        F, label = x + y, "additive"
    elif name == "multiplicative":
        ring = ring or standard_ring("multiplicative", base="Z")
        if dict(ring.gens).get("u") != 2:
            raise PreconditionError("multiplicative law needs a generator u of degree 2")
        x, y = _xy(ring, order)
        F, label = x + y + ring.gen("u") * x * y, "multiplicative"
    elif name == "universal_rational":
        if k is None or k < 1:
            raise PreconditionError("universal_rational needs k >= 1 logarithm coefficients")
        if k > MAX_GENS:
            raise PreconditionError(f"universal_rational({k}) exceeds the supported bound {MAX_GENS}")
        want = standard_ring("universal_rational", k)
        ring = ring or want
        if not ring.is_q_algebra or not ring.contains(want):
            raise PreconditionError(f"universal_rational({k}) needs a Q base containing {want}")
        F, label = _universal_rational(ring, k, order), f"universal_rational({k})"
    elif name == "jacobi_quartic":
        want = standard_ring("jacobi_quartic")
        ring = ring or want
        if not ring.is_q_algebra or not ring.contains(want):
            raise PreconditionError("jacobi_quartic needs Q[delta(4), epsilon(8)]")
        F, label = _jacobi_quartic(ring, order), "jacobi_quartic"
    else:
        ring = ring or GradedRing("Q")
        x, y = _xy(ring, order)
        F, label = x + y + x * x, "broken-example"
        return FormalGroupLaw(F, label, -1)
    return FormalGroupLaw(F, label, order)


def _universal_rational(ring, k, order):
    x = _one_var(ring, order)
    log = x
    for i in range(1, k + 1):
        if i + 1 <= order:
            log = log + ring.gen(f"m{i}") * x ** (i + 1)
    exp = series_reversion(log)
    lx = log
    ly = log.rename({"x": "y"})
    return series_substitute(exp, {"x": lx + ly}).with_vars(("x", "y"))


def _jacobi_quartic(ring, order):
    delta, eps = ring.gen("delta"), ring.gen("epsilon")
    t = _one_var(ring, order)
    R = series_sqrt(1 - 2 * delta * t * t + eps * t ** 4)
    x, y = _xy(ring, order)
    Rx = R.with_vars(("x", "y"))
    Ry = R.rename({"x": "y"}).with_vars(("x", "y"))
    num = x * Ry + y * Rx
    den = series_invert(1 - eps * x * x * y * y)
    return num * den


def fgl_apply(law, f, g):
    """F(f, g): the formal sum f +_F g."""
    F = law.F
    if not isinstance(f, TruncSeries):
        f = _constant_like(g, f, law)
    if not isinstance(g, TruncSeries):
        g = _constant_like(f, g, law)
    return series_substitute(F, {"x": f, "y": g})


def _constant_like(other, value, law):
    if value != 0:
        raise PreconditionError("formal sum arguments must have zero constant term")
    if isinstance(other, TruncSeries):
        return other._like({})
    return TruncSeries.zero(law.ring, ("x",), law.order)


def fgl_inverse(law) -> TruncSeries:
    """The formal inverse iota(x), with F(x, iota(x)) = 0."""
    F = law.F
    D = law.order
    x = _one_var(law.ring, D)
    # F(x, y) = x + y + x*y*H(x, y): fixed point iota = -x - x*iota*H(x, iota)
    H = F - F.set_zero("y") - F.set_zero("x")
    g = -x
    for step in range(2, D + 1):
        xs = x.truncate(step)
        g = g._like(g.terms, order=step)  # correct below step; the iteration fixes degree step
        g = -xs - series_substitute(H, {"x": xs, "y": g})
    return g


def fgl_nseries(law, n) -> TruncSeries:
    """The n-series [n]_F(x)."""
    x = _one_var(law.ring, law.order)
    if n == 0:
        return x._like({})
    m = abs(n)
    acc = x
    for _ in range(m - 1):
        acc = fgl_apply(law, acc, x)
    if n < 0:
        acc = series_substitute(acc, {"x": fgl_inverse(law)})
    return acc


def fgl_log(law) -> TruncSeries:
    """log_F with log_F'(x) = 1 / (dF/dy)(x, 0)."""
    if not law.ring.is_q_algebra:
        raise PreconditionError("the logarithm needs a Q-algebra coefficient ring")
    dy = _drop_var(derivative(law.F, "y").set_zero("y"), "y")
    return integrate(series_invert(dy), "x")


def fgl_exp(law) -> TruncSeries:
    return series_reversion(fgl_log(law))


def _drop_var(f, name):
    i = f.vars.index(name)
    nv = len(f.vars)
    keep = tuple(v for v in f.vars if v != name)
    weights = tuple(w for v, w in zip(f.vars, f.weights) if v != name)
    flat = {}
    for k, c in f.terms.items():
        if k[i]:
            raise PreconditionError(f"series still depends on {name}")
        flat[k[:i] + k[i + 1:nv] + k[nv:]] = c
    return TruncSeries._from_flat(f.ring, keep, weights, f.order, flat, f.high, clean=False)


def _mismatch(check, f, g, order=None):
    diff = f.first_mismatch(g, order)
    if diff is None:
        return None
    diff = {"check": check, **diff}
    diff["vars"] = list(f.vars)
    return diff


def fgl_verify(law, order=None):
    """Check the axioms up to ``order``; returns ``(report, law)``.

    The returned law has ``verified_to`` raised when every check passes.
    """
    order = law.order if order is None else order
    if order > law.order:
        raise PreconditionError(f"verify order {order} exceeds the law's truncation {law.order}")
    F = law.F.truncate(order)
    ring = F.ring
    x, y = _xy(ring, order)
    failures = []

    fx0 = F.set_zero("y")
    f0y = F.set_zero("x")
    unit_fail = _mismatch("unital", fx0, x) or _mismatch("unital", f0y, y)
    if unit_fail:
        failures.append(unit_fail)

    swapped = F.permute((1, 0))
    comm_fail = _mismatch("commutative", F, swapped)
    if comm_fail:
        failures.append(comm_fail)

    xyz = ("x", "y", "z")
    X = TruncSeries.variable(ring, xyz, "x", order)
    Y = TruncSeries.variable(ring, xyz, "y", order)
    Z = TruncSeries.variable(ring, xyz, "z", order)
    Fxy = F.with_vars(xyz)
    Fyz = F.rename({"x": "y", "y": "z"}).with_vars(xyz)
    lhs = series_substitute(F, {"x": Fxy, "y": Z}).with_vars(xyz)
    rhs = series_substitute(F, {"x": X, "y": Fyz}).with_vars(xyz)
    assoc_fail = _mismatch("associative", lhs, rhs)
    associative_to = order
    if assoc_fail:
        associative_to = sum(assoc_fail["mono"]) - 1
        failures.append(assoc_fail)

    deg = F.cohomological_degree()
    homogeneous = deg in (2, "any")

    report = {
        "law": law.name,
        "order": order,
        "unital": unit_fail is None,
        "commutative": comm_fail is None,
        "associative_to": associative_to,
        "homogeneous": homogeneous,
        "first_failure": failures[0] if failures else None,
    }
    report["passed"] = (
        report["unital"] and report["commutative"] and associative_to == order
    )
    if report["passed"] and order > law.verified_to:
        law = replace(law, verified_to=order)
    return report, law
