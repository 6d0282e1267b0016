import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from fgc.algebra import GradedRing, parse_coeff
from fgc.errors import ParseError, RingMismatchError

ZU = GradedRing("Z", (("u", 2),))
QM = GradedRing("Q", (("m1", 2), ("m2", 4)))
QDE = GradedRing("Q", (("delta", 4), ("epsilon", 8)))


def test_difference_of_squares():
    u = ZU.gen("u")
    assert (u + 1) * (u - 1) == u ** 2 - 1


def test_adding_zero_is_identity():
    a = QM.parse("3*m1^2 - m2")
    assert a + QM.zero() == a


def test_generator_product():
    m1, m2 = QM.gen("m1"), QM.gen("m2")
    assert (2 * m1) * (3 * m2) == 6 * m1 * m2
    assert str((2 * m1) * (3 * m2)) == "6*m1*m2"


def test_units():
    ok, inv = ZU.constant(-1).is_unit()
    assert ok and inv == ZU.constant(-1)
    assert ZU.gen("u").is_unit() == (False, None)
    assert ZU.constant(2).is_unit() == (False, None)
    ok, inv = GradedRing("Q").constant(mpq(3, 4)).is_unit()
    assert ok and inv == GradedRing("Q").constant(mpq(4, 3))


def test_homogeneous_degree():
    assert QM.gen("m1").homogeneous_degree() == 2
    assert (QDE.gen("delta") * QDE.gen("epsilon")).homogeneous_degree() == 12
    assert (ZU.one() + ZU.gen("u")).homogeneous_degree() == "inhomogeneous"
    assert ZU.zero().homogeneous_degree() == "any"


def test_parse_examples():
    assert parse_coeff("-2*m1", QM) == -2 * QM.gen("m1")
    u = ZU.gen("u")
    assert parse_coeff("(u+1)^2", ZU) == u ** 2 + 2 * u + 1


def test_parse_unknown_generator():
    with pytest.raises(ParseError, match="m3"):
        parse_coeff("m3", QM)


def test_parse_reports_position():
    with pytest.raises(ParseError) as info:
        parse_coeff("m1 + * m2", QM)
    assert info.value.position == 5


def test_parse_rejects_fraction_over_z():
    with pytest.raises(ParseError):
        parse_coeff("1/2*u", ZU)


def test_fractions_are_reduced():
    a = QM.parse("6/4*m1")
    assert str(a) == "3/2*m1"


def test_ring_mismatch():
    with pytest.raises(RingMismatchError):
        ZU.gen("u") + QM.gen("m1")


def test_odd_degree_rejected():
    with pytest.raises(ValueError):
        GradedRing("Q", (("a", 3),))


def test_union_and_contains():
    both = ZU.union(QM)
    assert both.base == "Q"
    assert both.contains(QM) and not ZU.contains(QM)


# -- properties ---------------------------------------------------------------

small = st.integers(-4, 4)


@st.composite
def elements(draw):
    terms = draw(st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), small, max_size=4))
    return QM.element(terms)


@given(elements(), elements(), elements())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == QM.zero()


@given(elements())
def test_parse_roundtrip(a):
    assert parse_coeff(str(a), QM) == a
