import math

import pytest
from hypothesis import given, strategies as st

from polysel import terms as tm


def exponent_tuples(p=None, max_exp=4):
    dims = st.just(p) if p else st.integers(1, 4)
    return dims.flatmap(
        lambda d: st.lists(st.integers(0, max_exp), min_size=d, max_size=d).map(tuple)
    )


def test_order():
    assert tm.order((2, 1)) == 3
    assert tm.order((0, 0)) == 0
    assert tm.order((0, 4, 1)) == 5


def test_length_and_type():
    assert tm.length_and_type((3, 1)) == (2, (1, 3))
    assert tm.length_and_type((1, 3)) == (2, (1, 3))
    assert tm.length_and_type((4, 0)) == (1, (4,))
    assert tm.length_and_type((0, 0)) == (0, ())


def test_precedes():
    assert tm.precedes((1, 0), (1, 1))
    assert not tm.precedes((2, 0), (1, 1))
    assert not tm.precedes((1, 1), (2, 0))
    assert tm.precedes((0, 0), (0, 0))
    with pytest.raises(ValueError):
        tm.precedes((1,), (1, 0))


def test_parents():
    assert tm.parents((1, 1)) == {(0, 1), (1, 0)}
    assert tm.parents((2, 0)) == {(1, 0)}
    assert tm.parents((0, 0)) == frozenset()


def test_children_within_quadratic_surface():
    full = tm.generate_full_surface(2, 2)
    assert tm.children_within((1, 0), full) == {(2, 0), (1, 1)}
    assert tm.children_within((2, 0), full) == frozenset()
    assert tm.children_within((0, 1), full) == {(1, 1), (0, 2)}


def test_full_surface_counts():
    assert len(tm.generate_full_surface(5, 4)) == 126
    surf = tm.generate_full_surface(2, 2)
    assert set(surf) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert len(tm.generate_full_surface(1, 1)) == 2


@pytest.mark.parametrize("p", range(1, 7))
@pytest.mark.parametrize("degree", range(1, 6))
def test_full_surface_count_is_binomial(p, degree):
    assert len(tm.generate_full_surface(p, degree)) == math.comb(p + degree, degree)


def test_full_surface_canonical_order():
    surf = tm.generate_full_surface(3, 2)
    keyed = [(tm.order(t), t) for t in surf]
    assert keyed == sorted(keyed)
    assert surf[0] == (0, 0, 0)


def test_full_surface_bounds():
    with pytest.raises(ValueError):
        tm.generate_full_surface(0, 2)
    with pytest.raises(ValueError):
        tm.generate_full_surface(2, 0)
    with pytest.raises(ValueError):
        tm.generate_full_surface(33, 2)
    with pytest.raises(ValueError):
        tm.generate_full_surface(30, 9)  # count blows past the materialization cap


@pytest.mark.parametrize("p,degree", [(2, 2), (3, 3), (2, 4), (3, 4)])
def test_parents_children_adjoint(p, degree):
    full = tm.generate_full_surface(p, degree)
    fullset = frozenset(full)
    for a in full:
        for b in tm.children_within(a, fullset):
            assert a in tm.parents(b)
    for b in full:
        for a in tm.parents(b):
            assert b in tm.children_within(a, fullset)


@given(exponent_tuples())
def test_parent_count_equals_length(t):
    assert len(tm.parents(t)) == tm.length(t)


@given(exponent_tuples())
def test_parent_drops_order_by_one(t):
    for q in tm.parents(t):
        assert tm.order(q) + 1 == tm.order(t)
        assert tm.precedes(q, t)


@given(st.integers(1, 4).flatmap(lambda d: st.tuples(*[exponent_tuples(p=d)] * 3)))
def test_precedes_is_a_partial_order(triple):
    a, b, c = triple
    assert tm.precedes(a, a)
    if tm.precedes(a, b) and tm.precedes(b, a):
        assert a == b
    if tm.precedes(a, b) and tm.precedes(b, c):
        assert tm.precedes(a, c)


def test_term_str():
    assert tm.term_str((0, 0)) == "1"
    assert tm.term_str((2, 0, 1)) == "x1^2*x3"
    assert tm.term_str((1, 1)) == "x1*x2"


@given(exponent_tuples())
def test_parse_term_roundtrip(t):
    assert tm.parse_term(tm.term_str(t), len(t)) == t


def test_parse_term_rejects_junk():
    with pytest.raises(ValueError):
        tm.parse_term("y1", 2)
    with pytest.raises(ValueError):
        tm.parse_term("x3", 2)
    with pytest.raises(ValueError):
        tm.parse_term("x1*x1", 2)
