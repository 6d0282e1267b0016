import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _util import ser
from fgc.algebra import GradedRing, TateSeries, TruncSeries
from fgc.cnstruct import (
    CnStructure,
    adjoint_series,
    bar_differential,
    bar_map,
    cocycle_defect,
    sharp,
    sharp0,
    verify_cn,
)
from fgc.errors import PreconditionError
from fgc.fgl import fgl_standard
from fgc.selftest import _compose, _random_unit, _simplicial
from fgc.tate import tate_context

QU = GradedRing("Q", (("u", 2),))
QV = GradedRing("Q", (("v", 2),))

ADD_V = fgl_standard("additive", 10, ring=QV)
MULT = fgl_standard("multiplicative", 10, ring=QU)
ADD_U = fgl_standard("additive", 10, ring=QU)


def one_plus(ring, gen, order=8, var="x1"):
    return ser(ring, (var,), order, f"1+{gen}*{var}")


def test_bar_map_examples():
    b = bar_map(1, 1, ADD_V, 5)
    assert b["x1"] == ser(QV, ("x0", "x1"), 5, "x0+x1")
    b = bar_map(0, 1, ADD_V, 5)
    assert b["x1"] == TruncSeries.variable(QV, ("x1",), "x1", 5)
    b = bar_map(2, 2, ADD_V, 5)
    assert b["x1"] == TruncSeries.variable(QV, ("x0",), "x0", 5)
    assert b["x2"] == ser(QV, ("x1", "x2"), 5, "x1+x2")
    last = bar_map(3, 2, ADD_V, 5)
    assert [s.vars for s in last.values()] == [("x0",), ("x1",)]


def test_bar_map_index_range():
    with pytest.raises(PreconditionError):
        bar_map(4, 2, ADD_V)


def test_multiplicative_c1_defect_is_one():
    d = cocycle_defect(one_plus(QU, "u"), MULT)
    assert d.first_mismatch(d.one_like()) is None
    assert set(d.terms) == {(0, 0, 0)}


def test_additive_c1_defect():
    # oracle: (1+u x0)(1+u x1)/(1+u(x0+x1)) expanded with sympy
    d = cocycle_defect(one_plus(QU, "u", 4), ADD_U)
    want = ser(QU, ("x0", "x1"), 4,
               "1 + u^2*x0*x1 - u^3*x0^2*x1 - u^3*x0*x1^2 + u^4*x0^3*x1 + 2*u^4*x0^2*x1^2 + u^4*x0*x1^3")
    assert d == want


def test_trivial_defect():
    for n in (1, 2, 3):
        f = TruncSeries.one(QU, [f"x{i}" for i in range(1, n + 1)], 4)
        d = cocycle_defect(f, MULT)
        assert d.first_mismatch(d.one_like()) is None


def test_verify_c1():
    report, s = verify_cn(CnStructure(1, MULT, one_plus(QU, "u")))
    assert report["passed"] and report["homomorphic"]
    assert s.verified_to == 8
    # any normalized unit series is a C^1 structure; the homomorphism flag records the defect
    report, _ = verify_cn(CnStructure(1, ADD_U, one_plus(QU, "u")))
    assert report["passed"] and not report["homomorphic"]


def test_verify_c2_coboundary():
    d = bar_differential(one_plus(QV, "v", 8), ADD_V)
    report, s = verify_cn(CnStructure(2, ADD_V, d), 6)
    assert report == {
        "n": 2, "order": 6, "symmetric": True, "normalized": True,
        "cocycle_to": 6, "passed": True, "first_failure": None,
    }


def test_verify_reports_failures():
    f = ser(QU, ("x1", "x2"), 4, "1+x1*x2+x1^2*x2")
    report, s = verify_cn(CnStructure(2, ADD_U, f))
    assert not report["symmetric"] and not report["passed"]
    assert s.verified_to == -1
    f = ser(QU, ("x1", "x2"), 4, "1+x1")
    report, _ = verify_cn(CnStructure(2, ADD_U, f))
    assert not report["normalized"]
    assert report["first_failure"]["check"] == "symmetric" or report["first_failure"]["check"] == "normalized"


def test_verify_cocycle_failure_is_located():
    # symmetric and normalized, but not a cocycle
    f = ser(QU, ("x1", "x2"), 4, "1+x1*x2")
    report, _ = verify_cn(CnStructure(2, ADD_U, f))
    assert report["symmetric"] and report["normalized"]
    assert not report["passed"]
    # degree-2 parts cancel; the first defect is in degree 4
    assert report["cocycle_to"] == 3
    assert report["first_failure"]["check"] == "cocycle"


def test_bar_differential_examples():
    assert bar_differential(TruncSeries.one(QV, ("x1",), 6), ADD_V) == TruncSeries.one(QV, ("x1", "x2"), 6)
    d = bar_differential(one_plus(QV, "v", 4), ADD_V)
    assert d == ser(QV, ("x1", "x2"), 4,
                    "1 + v^2*x1*x2 - v^3*x1^2*x2 - v^3*x1*x2^2 + v^4*x1^3*x2 + 2*v^4*x1^2*x2^2 + v^4*x1*x2^3")
    d = bar_differential(one_plus(QU, "u"), MULT)
    assert d.first_mismatch(d.one_like()) is None


def test_bar_differential_rejects_non_unit():
    with pytest.raises(PreconditionError):
        bar_differential(ser(QU, ("x1",), 4, "2+x1"), MULT)


def test_delta_of_symmetric_two_variable_series_is_not_symmetric():
    # Delta g(x2, x1, x0) = Delta g(x0, x1, x2)^-1 for symmetric g, so random
    # symmetric g does not give a C^3 structure
    g = ser(QU, ("x1", "x2"), 5, "1+x1*x2")
    d = bar_differential(g, ADD_U)
    assert not d.is_symmetric()
    rev = d.permute((2, 1, 0))
    assert (d * rev).first_mismatch(d.one_like()) is None


def test_delta_delta_is_one():
    rng = random.Random(3)
    for law in (ADD_U, MULT):
        h = _random_unit(QU, rng, 5, 6)
        dd = bar_differential(bar_differential(h, law), law)
        assert dd.first_mismatch(dd.one_like()) is None


def test_simplicial_relations():
    for law in (ADD_U, MULT, fgl_standard("jacobi_quartic", 5)):
        assert _simplicial(law, 3, 4) == []


def test_simplicial_relations_are_not_vacuous():
    # the other composite order does not agree in general
    lhs = _compose(MULT, 2, 0, 2, 4)
    rhs = _compose(MULT, 2, 0, 1, 4)
    assert lhs != rhs


def test_sharp_of_delta():
    law = fgl_standard("additive", 12, ring=QV)
    d = bar_differential(one_plus(QV, "v", 12), law)
    ctx = tate_context(law, 6, (-6, 6))
    out, report = sharp(CnStructure(2, law, d), ctx)
    assert out.n == 1 and report["passed"]
    g = out.f
    assert g.vars == ("x1",)
    # (1+vx)(1+vt)/(1+v(x+t)): the x t coefficient is v^2
    c = {(te, m): str(cf) for te, m, cf in g.sorted_terms()}
    assert c[(1, (1,))] == "v^2"
    assert c[(0, (0,))] == "1"
    assert g.effective_high == 6


def test_sharp_trivial():
    ctx = tate_context(MULT, 4, (-4, 4))
    one = TruncSeries.one(QU, ("x1", "x2"), 8)
    out, report = sharp(CnStructure(2, MULT, one), ctx)
    assert report["passed"]
    assert out.f.first_mismatch(out.f.one_like()) is None
    d = bar_differential(one_plus(QU, "u"), MULT)
    out, _ = sharp(CnStructure(2, MULT, d), ctx)
    assert out.f.first_mismatch(out.f.one_like()) is None


def test_sharp_rejects_unverified():
    ctx = tate_context(ADD_U, 4, (-4, 4))
    f = ser(QU, ("x1", "x2"), 8, "1+x1*x2")
    with pytest.raises(PreconditionError):
        sharp(CnStructure(2, ADD_U, f), ctx)
    with pytest.raises(PreconditionError):
        sharp(CnStructure(1, ADD_U, one_plus(QU, "u")), ctx)


def test_sharp0():
    ctx = tate_context("additive", 5, (-6, 6))
    s, report = sharp0(ctx)
    assert report["passed"] and report["beta_unit"]
    assert s.f.first_mismatch(TateSeries(ctx.ring, ("x",), 5, {(0, (0,)): 1, (-1, (1,)): 1})) is None
    ctx = tate_context("multiplicative", 5, (-6, 6), ring=QU)
    s, report = sharp0(ctx)
    assert report["bottom_leading"] == {"t": -1, "coeff": "1"}
    want = TateSeries(ctx.ring, ("x",), 5, {(0, (0,)): 1, (-1, (1,)): 1, (0, (1,)): QU.gen("u")})
    assert s.f.first_mismatch(want) is None


def test_adjoint_series():
    ctx = tate_context(ADD_V, 4, (-4, 4))
    one = adjoint_series(TruncSeries.one(QV, ("x",), 8), ctx)
    assert one.first_mismatch(one.one_like()) is None
    a = adjoint_series(one_plus(QV, "v", 8, "x"), ctx)
    c = {(te, m): str(cf) for te, m, cf in a.sorted_terms()}
    assert c[(1, (1,))] == "v^2" and c[(2, (1,))] == "-v^3"
    ctx = tate_context(MULT, 4, (-4, 4))
    a = adjoint_series(one_plus(QU, "u", 8, "x"), ctx)
    assert a.first_mismatch(a.one_like()) is None


# -- properties ---------------------------------------------------------------

@settings(max_examples=10)
@given(st.sampled_from(["additive", "multiplicative", "jacobi_quartic"]), st.integers(0, 10_000))
def test_coboundaries_are_cocycles(which, seed):
    law = fgl_standard(which, 7)
    h = _random_unit(law.ring, random.Random(seed), 4, 5)
    d = bar_differential(h, law)
    report, _ = verify_cn(CnStructure(2, law, d), 5)
    assert report["passed"]
    for v in d.vars:
        assert d.set_zero(v).first_mismatch(d.one_like()) is None


@settings(max_examples=6)
@given(st.sampled_from(["additive", "multiplicative"]), st.integers(0, 10_000))
def test_sharp_preserves_structure(which, seed):
    law = fgl_standard(which, 9)
    h = _random_unit(law.ring, random.Random(seed), 4, 8)
    ctx = tate_context(law, 4, (-4, 4))
    out, report = sharp(CnStructure(2, law, bar_differential(h, law)), ctx)
    assert report["passed"]
    assert out.f.set_zero("x1").first_mismatch(out.f.one_like()) is None


@pytest.mark.parametrize("n", [1, 2, 3])
def test_one_is_always_a_structure(n):
    for law in (ADD_U, MULT):
        f = TruncSeries.one(QU, [f"x{i}" for i in range(1, n + 1)], 5)
        assert verify_cn(CnStructure(n, law, f))[0]["passed"]
