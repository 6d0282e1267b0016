import json

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from _util import ser
from fgc.algebra import (
    GradedRing,
    TateRing,
    TateSeries,
    TruncSeries,
    series_arith,
    series_invert,
    series_reversion,
    series_sqrt,
    series_substitute,
    tate_arith,
)
from fgc.algebra.jsonio import dumps, series_from_json, series_to_json
from fgc.algebra.series import to_tate
from fgc.errors import NotAUnitError, PreconditionError, WindowError

Q = GradedRing("Q")
ZU = GradedRing("Z", (("u", 2),))
QD = GradedRing("Q", (("delta", 4),))


def test_product_truncates():
    a = ser(Q, "x", 5, "1+x")
    b = ser(Q, "x", 5, "1-x")
    assert a * b == ser(Q, "x", 5, "1-x^2")


def test_product_below_precision_vanishes():
    x = TruncSeries.variable(Q, ("x", "y"), "x", 1)
    y = TruncSeries.variable(Q, ("x", "y"), "y", 1)
    p = series_arith(x, y, "mul")
    assert p.is_zero() and p.order == 1


def test_product_over_zu():
    f = ser(ZU, "x", 4, "1+u*x").with_vars(("x", "y"))
    g = ser(ZU, "y", 4, "1+u*y").with_vars(("x", "y"))
    assert f * g == ser(ZU, "xy", 4, "1+u*x+u*y+u^2*x*y")


def test_order_is_min_of_operands():
    assert (ser(Q, "x", 3, "x") + ser(Q, "x", 7, "x^2")).order == 3


def test_substitute_examples():
    f = ser(Q, "x", 6, "1+x")
    yz = ser(Q, ("y", "z"), 6, "y+z")
    assert series_substitute(f, {"x": yz}).with_vars(("y", "z")) == ser(Q, ("y", "z"), 6, "1+y+z")
    sq = ser(Q, "x", 6, "x^2")
    xt = ser(Q, ("x", "t"), 6, "x+t")
    got = series_substitute(sq, {"x": xt}).with_vars(("x", "t"))
    assert got == ser(Q, ("x", "t"), 6, "x^2+2*x*t+t^2")


def test_substitute_multiplicative_diagonal():
    F = ser(ZU, "xy", 6, "x+y+u*x*y")
    x = TruncSeries.variable(ZU, ("x",), "x", 6)
    got = series_substitute(F, {"y": x}).with_vars(("x",))
    assert got == ser(ZU, "x", 6, "2*x+u*x^2")


def test_substitute_rejects_constant_term():
    f = ser(Q, "x", 4, "x")
    with pytest.raises(PreconditionError):
        series_substitute(f, {"x": ser(Q, "y", 4, "1+y")})


def test_invert_geometric():
    assert series_invert(ser(Q, "x", 5, "1+x")) == ser(Q, "x", 5, "1-x+x^2-x^3+x^4-x^5")
    assert series_invert(ser(Q, "x", 5, "1")) == ser(Q, "x", 5, "1")


def test_invert_two_variables():
    f = ser(ZU, "xy", 4, "1+u*x+u*y")
    g = series_invert(f)
    assert f * g == f.one_like()
    # (1 + u s)^-1 with s = x + y
    assert g.homogeneous_part(2) == ser(ZU, "xy", 4, "u^2*x^2+2*u^2*x*y+u^2*y^2")


def test_invert_needs_unit():
    with pytest.raises(NotAUnitError):
        series_invert(ser(ZU, "x", 3, "2+x"))
    with pytest.raises(NotAUnitError):
        series_invert(ser(Q, "x", 3, "x"))


def test_reversion_catalan():
    # oracle: sympy solve of g + g^2 = x, coefficients (-1)^k C_k
    g = series_reversion(ser(Q, "x", 5, "x+x^2"))
    assert g == ser(Q, "x", 5, "x-x^2+2*x^3-5*x^4+14*x^5")


def test_reversion_of_identity():
    assert series_reversion(ser(Q, "x", 5, "x")) == ser(Q, "x", 5, "x")


def test_reversion_log_exp():
    QU = GradedRing("Q", (("u", 2),))
    u = QU.gen("u")
    D = 6
    log = TruncSeries(QU, ("x",), D, {(k,): mpq((-1) ** (k + 1), k) * u ** (k - 1) for k in range(1, D + 1)})
    fact = 1
    exp_terms = {}
    for k in range(1, D + 1):
        fact *= k
        exp_terms[(k,)] = mpq(1, fact) * u ** (k - 1)
    assert series_reversion(log) == TruncSeries(QU, ("x",), D, exp_terms)


def test_sqrt_examples():
    # oracle: sympy series of sqrt(1+4x) and sqrt(1-2*delta*x^2)
    assert series_sqrt(ser(Q, "x", 4, "1+4*x")) == ser(Q, "x", 4, "1+2*x-2*x^2+4*x^3-10*x^4")
    assert series_sqrt(ser(Q, "x", 4, "1")) == ser(Q, "x", 4, "1")
    got = series_sqrt(ser(QD, "x", 6, "1-2*delta*x^2"))
    assert got == ser(QD, "x", 6, "1-delta*x^2-1/2*delta^2*x^4-1/2*delta^3*x^6")


def test_sqrt_preconditions():
    with pytest.raises(PreconditionError):
        series_sqrt(ser(Q, "x", 3, "4+x"))
    with pytest.raises(PreconditionError):
        series_sqrt(ser(ZU, "x", 3, "1+u*x"))


# -- Tate series --------------------------------------------------------------

TR = TateRing(Q, -8, 8, "t", 6)


def test_invert_t():
    t = TateSeries.t_power(TR, (), 1, 6)
    assert tate_arith(t, which="invert") == TateSeries.t_power(TR, (), -1, 6)


def test_invert_x_plus_t():
    f = TateSeries(TR, ("x",), 3, {(1, (0,)): 1, (0, (1,)): 1})
    g = tate_arith(f, which="invert")
    want = TateSeries(TR, ("x",), 3, {(-1, (0,)): 1, (-2, (1,)): -1, (-3, (2,)): 1, (-4, (3,)): -1})
    assert g.first_mismatch(want) is None
    assert (f * g).first_mismatch(f.one_like()) is None


def test_laurent_product():
    a = TateSeries(TR, ("x", "y"), 4, {(0, (0, 0)): 1, (-1, (1, 0)): 1})
    b = TateSeries(TR, ("x", "y"), 4, {(0, (0, 0)): 1, (-1, (0, 1)): 1})
    want = TateSeries(TR, ("x", "y"), 4, {(0, (0, 0)): 1, (-1, (1, 0)): 1, (-1, (0, 1)): 1, (-2, (1, 1)): 1})
    assert tate_arith(a, b, "mul") == want


def test_invert_requires_leading_unit():
    zt = TateRing(ZU, -4, 4, "t", 3)
    f = TateSeries(zt, ("x",), 3, {(1, (0,)): 2, (0, (1,)): 1})
    with pytest.raises(NotAUnitError):
        tate_arith(f, which="invert")


def test_window_bottom_is_enforced():
    ring = TateRing(Q, -2, 4, "t", 3)
    t = TateSeries.t_power(ring, ("x",), -2, 3)
    with pytest.raises(WindowError):
        t * t


def test_skew_precision_of_plain_series():
    f = ser(Q, ("x", "t"), 5, "x*t+t^3")
    g = to_tate(f, "t", TateRing(Q, -3, 6, "t", 5))
    # t^j x^a is known when j + |a| <= 5
    assert g.high == 5
    assert g.effective_high == 0
    assert g.coefficient((1,)).high == 4
    assert g.coefficient((0,)).first_mismatch(TateSeries.t_power(g.ring, (), 3, 5)) is None


# -- JSON ---------------------------------------------------------------------

def test_json_roundtrip_plain():
    f = ser(GradedRing("Q", (("m1", 2),)), "xy", 4, "x+y-2*m1*x*y")
    back = series_from_json(json.loads(dumps(series_to_json(f))))
    assert back == f


def test_json_is_canonical():
    a = ser(Q, "xy", 3, "y^2+x+3*x*y")
    b = ser(Q, "xy", 3, "3*x*y+x") + ser(Q, "xy", 3, "y^2")
    assert dumps(series_to_json(a)) == dumps(series_to_json(b))
    monos = [t["mono"] for t in series_to_json(a)["terms"]]
    assert monos == [[1, 0], [1, 1], [0, 2]]


def test_json_tate_window():
    f = TateSeries(TR, ("x",), 3, {(-1, (1,)): 1, (0, (0,)): 1}, high=None)
    obj = series_to_json(f)
    assert obj["tate"]["low"] == -1
    assert [t["t"] for t in obj["terms"]] == [-1, 0]


# -- properties ---------------------------------------------------------------

coeff = st.integers(-5, 5)


@st.composite
def series(draw, vars=("x", "y"), order=5, unit=False):
    terms = draw(st.dictionaries(st.tuples(*[st.integers(0, order)] * len(vars)), coeff, max_size=8))
    terms = {m: c for m, c in terms.items() if sum(m) <= order}
    if unit:
        terms[(0,) * len(vars)] = 1
    return TruncSeries(Q, vars, order, terms)


@given(series(), series(), st.integers(0, 5))
def test_truncation_commutes_with_product(f, g, D):
    assert (f.truncate(D) * g.truncate(D)) == (f * g).truncate(D)
    assert (f.truncate(D) + g.truncate(D)) == (f + g).truncate(D)


@given(series(unit=True))
def test_invert_roundtrip(f):
    assert f * series_invert(f) == f.one_like()


@given(series(vars=("x",), order=7))
def test_reversion_roundtrip(f):
    terms = {k: c for k, c in f.terms.items() if k[0] >= 2}
    g = TruncSeries._from_flat(Q, ("x",), (1,), 7, terms) + TruncSeries.variable(Q, ("x",), "x", 7)
    r = series_reversion(g)
    x = TruncSeries.variable(Q, ("x",), "x", 7)
    assert series_substitute(g, {"x": r}) == x
    assert series_substitute(r, {"x": g}) == x


@given(series(vars=("x",), order=7, unit=True))
def test_sqrt_roundtrip(f):
    s = series_sqrt(f)
    assert s * s == f


@given(series(vars=("x",), order=4, unit=True))
def test_tate_invert_roundtrip(f):
    ring = TateRing(Q, -8, 6, "t", 4)
    # f(x/t): Laurent coefficients with a unit x-constant part
    h = TateSeries(ring, ("x",), 4, {(-k[0], k): c for k, c in f.terms.items()})
    inv = tate_arith(h, which="invert")
    assert (h * inv).first_mismatch(h.one_like()) is None
