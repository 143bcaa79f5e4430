import math

import pytest
from hypothesis import given, strategies as st

from oracles.indices import brute
from sparsefourier.errors import DimensionError, DomainError
from sparsefourier.indexsets import Shape, build, contains, from_text, to_text

S_3_2 = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (2, 0), (3, 0)]
T_2_2 = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]


def test_build_examples():
    assert list(build("Y", 1, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert list(build("S", 3, 2)) == S_3_2
    assert list(build("T", 2, 2)) == T_2_2


def test_contains_examples():
    S = build("S", 3, 2)
    assert contains(S, (1, 1))
    assert not contains(S, (1, 2))
    assert contains(build("Y", 5, 2), (5, 5))
    with pytest.raises(DimensionError):
        contains(S, (1, 1, 1))


def test_parameter_errors():
    with pytest.raises(DomainError):
        build("Y", -1, 2)
    with pytest.raises(DimensionError):
        build("Y", 2, 0)
    with pytest.raises(ValueError):
        Shape.parse("Q")


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_brute_force_suite(d):
    top = {1: 20, 2: 20, 3: 12, 4: 7}[d]
    for N in range(0, top + 1):
        Y, T, S = (build(s, N, d) for s in "YTS")
        assert list(Y) == brute("Y", N, d)
        assert list(T) == brute("T", N, d)
        assert list(S) == brute("S", N, d)
        assert len(Y) == (N + 1) ** d
        assert len(T) == math.comb(N + d, d)
        assert set(S) <= set(Y) and len(S) <= len(Y)


def test_hyperbolic_growth():
    ratios = [len(build("S", N, 2)) / (N * math.log(N)) for N in range(4, 65)]
    assert max(ratios) < 3.0


@given(shape=st.sampled_from("YTS"), N=st.integers(0, 12), d=st.integers(1, 3))
def test_sorted_unique_deterministic(shape, N, d):
    a, b = build(shape, N, d), build(shape, N, d)
    assert a.indices == b.indices
    assert list(a.indices) == sorted(set(a.indices))
    assert all(contains(a, n) for n in a)


@given(shape=st.sampled_from("YTS"), N=st.integers(0, 8),
       n=st.tuples(st.integers(0, 12), st.integers(0, 12)))
def test_contains_matches_enumeration(shape, N, n):
    assert contains(build(shape, N, 2), n) == (n in brute(shape, N, 2))


def test_text_round_trip():
    S = build("S", 3, 2)
    text = to_text(S)
    assert text.splitlines()[1] == "0 1"
    assert from_text(text) == list(S)
