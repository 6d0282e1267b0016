"""The acceptance checks, runnable from the CLI and from the test suite.

Each check returns a :class:`Result`.  The default configuration runs at
the stated sizes; ``Config(order=k)`` caps every degree at k and shrinks
the random sample counts, for a fast smoke run.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .algebra.rings import GradedRing
from .algebra.series import (
    TateSeries,
    TruncSeries,
    series_invert,
    series_reversion,
    series_sqrt,
    series_substitute,
    with_window,
)
from .charclass import (
    BundleData,
    genus_cpn,
    hirzebruch_series,
    l_series,
    one_series,
    substitute_elementary,
    symmetric_expand,
    todd_series,
)
from .cnstruct import (
    CnStructure,
    bar_differential,
    cocycle_defect,
    face_coordinates,
    sharp,
    sharp0,
    verify_cn,
)
from .fgl import fgl_standard, fgl_verify
from .tate import (
    euler_twist_tate,
    beta_coefficient,
    tate_context,
    tate_invert_euler,
    tch_by_expansion,
    tch_on_bundle,
    total_chern_check,
)

QU = GradedRing("Q", (("u", 2),))


@dataclass
class Result:
    number: int
    name: str
    passed: bool = True
    details: list = field(default_factory=list)
    seconds: float = 0.0

    def fail(self, what):
        self.passed = False
        self.details.append(what)

    def note(self, what):
        self.details.append(what)

    def to_json(self):
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "details": self.details}


@dataclass(frozen=True)
class Config:
    order: int | None = None
    seed: int = 0

    def cap(self, stated):
        return stated if self.order is None else min(stated, self.order)

    def count(self, stated, quick):
        return stated if self.order is None else quick


# ---------------------------------------------------------------------------


def check_fgl_axioms(cfg):
    res = Result(1, "fgl axioms")
    order = cfg.cap(9)
    for which in ("additive", "multiplicative", "universal_rational(6)", "jacobi_quartic"):
        report, _ = fgl_verify(fgl_standard(which, order))
        if not report["passed"]:
            res.fail(f"{which}: {report['first_failure']}")
    report, _ = fgl_verify(fgl_standard("broken-example", max(2, cfg.cap(4))))
    ff = report["first_failure"]
    if report["unital"] or ff is None or ff["check"] != "unital":
        res.fail("broken-example was not rejected for unitality")
    else:
        res.note(f"broken-example fails unital at {ff['mono']}: {ff['lhs']} != {ff['rhs']}")
    return res


def check_total_chern(cfg):
    res = Result(2, "total chern class")
    rng = random.Random(cfg.seed)
    order = cfg.cap(8)
    ranks = sorted({rng.randint(0, 5) for _ in range(4)} | {5})
    for n in ranks:
        ctx = tate_context("additive", order, (-min(n, order), 2), rank=n)
        r = total_chern_check(ctx, BundleData.root_names(n), order)
        if not r["passed"]:
            res.fail(f"rank {n}: {r['mismatch']}")
    res.note(f"ranks {ranks}")
    return res


def check_two_formulas(cfg):
    res = Result(3, "tch two-formula agreement")
    order = cfg.cap(6)
    for which in ("additive", "multiplicative", "universal_rational(4)"):
        for n in range(0, 5):
            ctx = tate_context(which, order, (-max(1, n), cfg.cap(4)), rank=n)
            V = BundleData.root_names(n)
            a = tch_on_bundle(ctx, V)
            b = tch_by_expansion(ctx, V)
            diff = a.first_mismatch(b)
            if diff is not None:
                res.fail(f"{which} rank {n}: {diff}")
    return res


def check_beta(cfg):
    res = Result(4, "beta unit")
    ctx = tate_context("universal_rational(4)", max(1, cfg.cap(6)), (-1, 3))
    beta, verdict = beta_coefficient(ctx)
    F = ctx.law
    if not verdict["unit"] or verdict["leading_exponent"] != -1:
        res.fail(f"universal_rational(4): {verdict}")
    m1 = F.ring.gen("m1")
    if F.coefficient(1, 1) != -2 * m1:
        res.fail(f"a11 = {F.coefficient(1, 1)}")
    for j in range(0, 4):
        want = F.ring.one() if j == 0 else F.coefficient(1, j)
        got = _t_coeff(beta, j - 1)
        if got != want:
            res.fail(f"t^{j - 1}: {got} != {want}")
    ctx = tate_context("multiplicative", max(1, cfg.cap(6)), (-1, 3), ring=QU)
    beta, verdict = beta_coefficient(ctx)
    u = QU.gen("u")
    want = TateSeries(beta.ring, (), beta.order, {(-1, ()): 1, (0, ()): u}, None)
    if beta.first_mismatch(want) is not None or not verdict["unit"]:
        res.fail(f"multiplicative beta = {beta}")
    return res


def _t_coeff(f, j):
    for te, _mono, c in f.sorted_terms():
        if te == j:
            return c
    return f.ring.base.zero()


def _random_unit(ring, rng, degree, order, bound=3, var="x1"):
    """1 + random integer coefficients up to ``degree`` (kept non-trivial)."""
    x = TruncSeries.variable(ring, (var,), var, order)
    f = TruncSeries.one(ring, (var,), order)
    for k in range(1, degree + 1):
        c = rng.randint(-bound, bound)
        if k == 1 and c == 0:
            c = 1
        if c:
            f = f + c * x ** k
    return f


def _simplicial(law, n_max, order):
    """d_i d_j == d_{j-1} d_i (i < j) on the coordinate maps, n <= n_max."""
    bad = []
    for n in range(1, n_max + 1):
        # faces from n+1 coordinates down to n, then to n-1
        for j in range(n + 2):
            for i in range(j):
                lhs = _compose(law, n, i, j, order)
                rhs = _compose(law, n, j - 1, i, order)
                if lhs != rhs:
                    bad.append((n, i, j))
    return bad


def _compose(law, n, a, b, order):
    """Coordinates of d_a o d_b: (n+1 vars) -> n -> n-1 coordinates."""
    inner = face_coordinates(b, n, law, order)  # n coordinates in x0..xn
    if n - 1 < 1:
        return ()
    lower = tuple(f"x{k}" for k in range(n))
    outer = [c.with_vars(lower) for c in face_coordinates(a, n - 1, law, order)]
    binds = {f"x{k}": inner[k] for k in range(n)}
    names = tuple(f"x{k}" for k in range(n + 1))
    return tuple(series_substitute(c, binds).with_vars(names) for c in outer)


def check_cocycles(cfg):
    res = Result(5, "cocycle suite")
    rng = random.Random(cfg.seed + 5)
    order = cfg.cap(6)
    law = fgl_standard("multiplicative", order + 2, ring=QU)
    f = 1 + QU.gen("u") * TruncSeries.variable(QU, ("x1",), "x1", order)
    d = cocycle_defect(f, law)
    if d.first_mismatch(d.one_like()) is not None:
        res.fail(f"1+ux defect {d}")
    report, _ = verify_cn(CnStructure(1, law, f))
    if not (report["passed"] and report["homomorphic"]):
        res.fail(f"1+ux over multiplicative: {report}")
    count = cfg.count(20, 4)
    for which in ("additive", "multiplicative"):
        law = fgl_standard(which, order + 2)
        ring = law.ring
        for _ in range(count):
            h = _random_unit(ring, rng, 6, order)
            g2 = bar_differential(h, law)
            r2, s2 = verify_cn(CnStructure(2, law, g2), order)
            if not r2["passed"]:
                res.fail(f"{which} level 2: {r2['first_failure']}")
                continue
            g3 = bar_differential(g2, law)
            r3, _ = verify_cn(CnStructure(3, law, g3), order)
            if not r3["passed"]:
                res.fail(f"{which} level 3: {r3['first_failure']}")
        bad = _simplicial(law, 3, min(order, 4))
        if bad:
            res.fail(f"{which} simplicial relations fail at {bad}")
    res.note(f"{count} random series per law")
    return res


def check_sharp(cfg):
    res = Result(6, "sharp suite")
    rng = random.Random(cfg.seed + 6)
    D = cfg.cap(6)
    P = cfg.cap(6)
    N = D + P
    count = cfg.count(3, 1)
    for which in ("additive", "multiplicative", "jacobi_quartic"):
        law = fgl_standard(which, N + 1)
        ctx = tate_context(law, D, (-6, P))
        for _ in range(count):
            h = _random_unit(law.ring, rng, 6, N)
            s2 = CnStructure(2, law, bar_differential(h, law))
            out, report = sharp(s2, ctx)
            if not report["passed"]:
                res.fail(f"{which} sharp C2: {report['first_failure']}")
            s3 = CnStructure(3, law, bar_differential(s2.f, law, D))
            out, report = sharp(s3, ctx)
            if not report["passed"]:
                res.fail(f"{which} sharp C3: {report['first_failure']}")
    for which in ("additive", "multiplicative", "universal_rational(4)", "jacobi_quartic"):
        ctx = tate_context(which, D, (-6, P))
        s, report = sharp0(ctx)
        if not (report["passed"] and report["beta_unit"]):
            res.fail(f"{which} sharp0: {report}")
    return res


def check_invertibility(cfg):
    res = Result(7, "tate invertibility")
    D = cfg.cap(6)
    P = cfg.cap(4)
    for which in ("additive", "multiplicative", "universal_rational(4)", "jacobi_quartic"):
        for n in range(0, 4):
            ctx = tate_context(which, D, (-(n + D), P), rank=n, invert=True)
            V = BundleData.root_names(n)
            inv = tate_invert_euler(ctx, V)
            e = euler_twist_tate(ctx, V, ctx.work_ring(extra=2 * n))
            prod = e * with_window(inv, e.ring)
            one = TateSeries.t_power(prod.ring, tuple(V.roots), 0, D)
            diff = prod.first_mismatch(one, high=P)
            if diff is not None or prod.effective_high < P:
                res.fail(f"{which} rank {n}: {diff}, precision t^{prod.effective_high}")
    return res


def check_genera(cfg):
    res = Result(8, "genus oracles")
    top = cfg.cap(6)
    Q = GradedRing("Q")
    for n in range(1, top + 1):
        g = genus_cpn(todd_series(n + 1), n)
        if g != Q.one():
            res.fail(f"Todd genus of CP^{n} = {g}")
        g = genus_cpn(one_series(n + 1), n)
        if not g.is_zero():
            res.fail(f"genus of series 1 on CP^{n} = {g}")
    g = genus_cpn(l_series(3), 2)
    if g != Q.one():
        res.fail(f"L genus of CP^2 = {g}")
    h = hirzebruch_series(fgl_standard("additive", 6)).f
    if h.terms != h.one_like().terms:
        res.fail(f"hirzebruch_series(additive) = {h}")
    return res


def _random_symmetric(rng, n, degree, ring):
    """Sum of random multiples of monomial symmetric functions m_lambda."""
    vars = tuple(f"r{i}" for i in range(1, n + 1))
    terms = {}
    for _ in range(rng.randint(1, 4)):
        d = rng.randint(0, degree)
        parts = [p for p in _partitions(d) if len(p) <= n]
        lam = rng.choice(parts)
        c = rng.randint(-5, 5)
        padded = tuple(lam) + (0,) * (n - len(lam))
        from itertools import permutations

        for perm in set(permutations(padded)):
            terms[perm] = terms.get(perm, 0) + c
    return TruncSeries(ring, vars, degree, {k: v for k, v in terms.items() if v})


def _partitions(d, largest=None):
    largest = d if largest is None else largest
    if d == 0:
        return [()]
    out = []
    for first in range(min(d, largest), 0, -1):
        for rest in _partitions(d - first, first):
            out.append((first,) + rest)
    return out


def _random_series(rng, ring, order, unit):
    x = TruncSeries.variable(ring, ("x",), "x", order)
    f = TruncSeries.one(ring, ("x",), order) if unit else x
    for k in range(1 if unit else 2, order + 1):
        c = rng.randint(-4, 4)
        if c:
            f = f + c * x ** k
    return f


def check_roundtrips(cfg):
    res = Result(9, "round trips")
    rng = random.Random(cfg.seed + 9)
    count = cfg.count(50, 10)
    Q = GradedRing("Q")
    for _ in range(count):
        n = rng.randint(1, 4)
        p = _random_symmetric(rng, n, cfg.cap(8), Q)
        back = substitute_elementary(symmetric_expand(p, n), p.vars)
        if back != p:
            res.fail(f"symmetric expansion round trip: {p}")
    order = cfg.cap(8)
    for _ in range(count):
        f = _random_series(rng, Q, order, unit=True)
        if f * series_invert(f) != f.one_like():
            res.fail(f"invert: {f}")
        g = _random_series(rng, Q, order, unit=False)
        r = series_reversion(g)
        if series_substitute(g, {"x": r}) != TruncSeries.variable(Q, ("x",), "x", order):
            res.fail(f"reversion: {g}")
        s = series_sqrt(f * f)
        if s * s != f * f:
            res.fail(f"sqrt: {f}")
    law = fgl_standard("multiplicative", cfg.cap(6) + 4, ring=QU)
    for _ in range(cfg.count(6, 2)):
        n = rng.randint(1, 4)
        k = rng.randint(0, n)
        V = BundleData.root_names(n)
        A = BundleData.from_roots(V.roots[:k])
        B = BundleData.from_roots(V.roots[k:])
        ctx = tate_context(law, cfg.cap(4), (-n, 2), rank=n)
        whole = tch_on_bundle(ctx, V)
        parts = tch_on_bundle(ctx, A).with_vars(V.roots) * tch_on_bundle(ctx, B).with_vars(V.roots)
        if whole.first_mismatch(parts, high=min(whole.effective_high, parts.effective_high)) is not None:
            res.fail(f"tch multiplicativity, split {k}+{n - k}")
    return res


CHECKS = (
    check_fgl_axioms,
    check_total_chern,
    check_two_formulas,
    check_beta,
    check_cocycles,
    check_sharp,
    check_invertibility,
    check_genera,
    check_roundtrips,
)


def run(cfg=Config(), only=None):
    out = []
    for number, check in enumerate(CHECKS, start=1):
        if only is not None and number not in only:
            continue
        t0 = time.perf_counter()
        try:
            r = check(cfg)
        except Exception as exc:  # a crash is a failed criterion, not a crashed selftest
            r = Result(number, check.__name__.removeprefix("check_"), False,
                       [f"{type(exc).__name__}: {exc}"])
        r.seconds = time.perf_counter() - t0
        out.append(r)
    return out
