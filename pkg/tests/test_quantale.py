from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from vlam import quantale as Q
from vlam.quantale import INF

fractions = st.fractions(min_value=0, max_value=50, max_denominator=12)
unit_fractions = st.fractions(min_value=0, max_value=1, max_denominator=12)


def values(q):
    if q.kind == "boolean":
        return st.sampled_from([0, 1]).map(q.value)
    if q.kind == "goedel":
        return unit_fractions.map(q.value)
    return st.one_of(fractions, st.just(INF)).map(q.value)


INSTANCES = [Q.BOOLEAN, Q.LAWVERE, Q.ULTRAMETRIC, Q.GOEDEL]


@pytest.mark.parametrize("q", INSTANCES, ids=lambda q: q.kind)
def test_integral(q):
    assert q.unit() == q.top()
    assert q.leq(q.bottom(), q.top())


def test_tensor_examples():
    L, U, B = Q.LAWVERE, Q.ULTRAMETRIC, Q.BOOLEAN
    assert L.tensor(L.value(2), L.value(3)) == L.value(5)
    assert U.tensor(U.value(2), U.value(3)) == U.value(3)
    assert B.tensor(B.value(1), B.value(1)) == B.value(1)
    assert L.tensor(L.value(2), L.value(INF)) == L.bottom()


def test_join_examples():
    L, B = Q.LAWVERE, Q.BOOLEAN
    assert L.join([]) == L.value(INF)
    assert L.join([L.value(3), L.value(5)]) == L.value(3)
    assert B.join([B.value(0), B.value(1)]) == B.value(1)


def test_leq_examples():
    L, G = Q.LAWVERE, Q.GOEDEL
    assert L.leq(L.value(5), L.value(3))
    assert not L.leq(L.value(3), L.value(5))
    assert G.leq(G.value(Fraction(1, 2)), G.value(Fraction(3, 4)))


def test_way_below_examples():
    L, G = Q.LAWVERE, Q.GOEDEL
    assert L.way_below(L.value(INF), L.value(INF))
    assert G.way_below(G.value(0), G.value(0))
    assert not L.way_below(L.value(2), L.value(3))
    assert L.way_below(L.value(3), L.value(2))


def test_approximants_examples():
    L, B = Q.LAWVERE, Q.BOOLEAN
    assert L.approximants(L.value(1), 2) == [L.value(2), L.value(Fraction(3, 2))]
    assert B.approximants(B.value(1), 1) == [B.value(1)]
    assert L.approximants(L.value(INF), 1) == [L.value(INF)]
    with pytest.raises(Q.QuantaleError):
        L.approximants(L.value(1), 0)


def test_mixed_instances_rejected():
    with pytest.raises(Q.QuantaleError):
        Q.LAWVERE.tensor(Q.LAWVERE.value(1), Q.ULTRAMETRIC.value(1))


def test_out_of_range_rejected():
    with pytest.raises(Q.QuantaleError):
        Q.BOOLEAN.value(2)
    with pytest.raises(Q.QuantaleError):
        Q.GOEDEL.value(Fraction(3, 2))
    with pytest.raises(Q.QuantaleError):
        Q.LAWVERE.value(-1)


def test_parse_textual_values():
    assert Q.BOOLEAN.parse("true") == Q.BOOLEAN.top()
    assert Q.BOOLEAN.parse("false") == Q.BOOLEAN.bottom()
    assert Q.LAWVERE.parse("inf") == Q.LAWVERE.bottom()
    assert Q.LAWVERE.parse("0.25") == Q.LAWVERE.value(Fraction(1, 4))
    assert Q.LAWVERE.parse("3/4") == Q.LAWVERE.value(Fraction(3, 4))


@pytest.mark.parametrize("q", INSTANCES, ids=lambda q: q.kind)
@given(data=st.data())
def test_monoid_laws(q, data):
    a, b, c = (data.draw(values(q)) for _ in range(3))
    assert q.tensor(a, q.tensor(b, c)) == q.tensor(q.tensor(a, b), c)
    assert q.tensor(a, b) == q.tensor(b, a)
    assert q.tensor(a, q.unit()) == a


@pytest.mark.parametrize("q", INSTANCES, ids=lambda q: q.kind)
@given(data=st.data())
def test_way_below_implies_leq(q, data):
    a, b = data.draw(values(q)), data.draw(values(q))
    if q.way_below(a, b):
        assert q.leq(a, b)


@pytest.mark.parametrize("q", INSTANCES, ids=lambda q: q.kind)
@given(data=st.data())
def test_join_is_least_upper_bound(q, data):
    s = data.draw(st.lists(values(q), max_size=5))
    uppers = data.draw(st.lists(values(q), max_size=5))
    j = q.join(s)
    assert all(q.leq(x, j) for x in s)
    for u in uppers:
        if all(q.leq(x, u) for x in s):
            assert q.leq(j, u)


@pytest.mark.parametrize("q", INSTANCES, ids=lambda q: q.kind)
@given(data=st.data())
def test_tensor_distributes_over_join(q, data):
    a = data.draw(values(q))
    s = data.draw(st.lists(values(q), max_size=5))
    assert q.tensor(a, q.join(s)) == q.join([q.tensor(a, x) for x in s])


@pytest.mark.parametrize("q", INSTANCES, ids=lambda q: q.kind)
@given(data=st.data())
def test_tensor_monotone(q, data):
    a, b, c = (data.draw(values(q)) for _ in range(3))
    if q.leq(a, b):
        assert q.leq(q.tensor(a, c), q.tensor(b, c))


@pytest.mark.parametrize("q", INSTANCES, ids=lambda q: q.kind)
@given(data=st.data())
def test_approximants_are_way_below_and_climb(q, data):
    v = data.draw(values(q))
    xs = q.approximants(v, 4)
    assert all(q.way_below(r, v) for r in xs)
    assert all(q.leq(a, b) for a, b in zip(xs, xs[1:]))
