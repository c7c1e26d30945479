from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lyness import DomainError, ParameterCycle, phi_products


def test_periodic_indexing():
    c = ParameterCycle([2, 4, 7, 0.001])
    assert c.k == 4
    assert [c.a(n) for n in range(1, 10)] == [2, 4, 7, 0.001, 2, 4, 7, 0.001, 2]


@pytest.mark.parametrize("bad", [[], [1, 0], [2, -1], [1, float("nan")], [float("inf")]])
def test_rejects_nonpositive_or_nonfinite(bad):
    with pytest.raises(DomainError):
        ParameterCycle(bad)


def test_primitive_period_and_rank():
    assert ParameterCycle([1, 2, 1, 2]).primitive_period == 2
    assert ParameterCycle([1, 2, 1, 3]).primitive_period == 4
    assert ParameterCycle([3] * 6).primitive_period == 1
    assert ParameterCycle([1, 1, 1, 1, 1, 2, 3]).rank == 3
    # exact comparison: a last-bit difference is a different value
    assert ParameterCycle([0.1 + 0.2, 0.3]).rank == 2


def test_shift_and_concatenation():
    c = ParameterCycle([1, 2, 3])
    assert c.shift(1).values == (2, 3, 1)
    assert c.shift(-1).values == (3, 1, 2)
    assert (c + (1, 1)).values == (1, 2, 3, 1, 1)


def test_phi_products():
    assert phi_products(ParameterCycle([2, 6, 3, 0.5, 1 / 6])).phi == (2, 6, 3, 0.5, 1 / 6)
    phi = ParameterCycle([1, 2, 3, 4, 5, 6, 7, 8, 9, 10]).phi_products().phi
    assert phi == (6, 14, 24, 36, 50)
    assert ParameterCycle([2, 6, 3, 0.5, 1 / 6]).phi_products().straddles_one
    with pytest.raises(DomainError):
        phi_products(ParameterCycle([1, 2, 3]))


def test_parse_and_round_trip():
    c = ParameterCycle.parse("2, 6, 3, 1/2, 1/6")
    assert c.values == (2.0, 6.0, 3.0, 0.5, 1 / 6)
    assert c.as_fractions()[3] == Fraction(1, 2)
    assert ParameterCycle.parse(c.to_string()) == c
    for bad in ("", "1,,2", "a,b", "1/0", "2,-1"):
        with pytest.raises(DomainError):
            ParameterCycle.parse(bad)


@given(st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=12),
       st.integers(-20, 20))
def test_shift_preserves_rank_and_period(vals, s):
    c = ParameterCycle(vals)
    d = c.shift(s)
    assert d.rank == c.rank
    assert d.primitive_period == c.primitive_period
    assert d.shift(-s) == c
    assert ParameterCycle.parse(c.to_string()) == c
