from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from sqsumfree.core import (
    INT128_MAX,
    Gap,
    IntegerSet,
    SolverConfig,
    ceil_sqrt,
    check_i128,
    integer_sqrt,
    is_perfect_square,
    is_squarefree,
)


@given(st.integers(min_value=0, max_value=10**30))
def test_integer_sqrt_brackets(m):
    s = integer_sqrt(m)
    assert s * s <= m < (s + 1) ** 2


@given(st.integers(min_value=-50, max_value=10**20))
def test_ceil_sqrt_is_least(m):
    s = ceil_sqrt(m)
    assert s * s >= m
    assert s == 0 or (s - 1) ** 2 < m


def test_perfect_squares_and_squarefree():
    assert [v for v in range(30) if is_perfect_square(v)] == [0, 1, 4, 9, 16, 25]
    assert not is_perfect_square(-4)
    assert [v for v in range(1, 20) if is_squarefree(v)] == [1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19]


def test_i128_guard():
    assert check_i128(INT128_MAX) == INT128_MAX
    with pytest.raises(OverflowError):
        check_i128(INT128_MAX + 1)


def test_integer_set_validation():
    A = IntegerSet.of([5, 2, 2, 9], universe_bound=10)
    assert A.elements == (2, 5, 9) and len(A) == 3 and 5 in A
    with pytest.raises(ValueError):
        IntegerSet((0, 1), 5)
    with pytest.raises(ValueError):
        IntegerSet((3, 2), 5)
    with pytest.raises(ValueError):
        IntegerSet((1, 7), 5)


def test_gap_basics():
    Q = Gap(3, (2, 10), (2, 1))
    assert Q.rank == 2 and Q.volume == 6
    assert Q.enumerate() == [3, 13, 5, 15, 7, 17]
    assert Q.min_element() == 3 and Q.max_element() == 17
    assert Q.value((1, 1)) == 15
    assert Gap.from_dict(Q.to_dict()) == Q
    neg = Gap(20, (-3,), (4,))
    assert neg.min_element() == 8 and not neg.is_positive
    with pytest.raises(ValueError):
        Gap(0, (0,), (1,))
    with pytest.raises(ValueError):
        Q.value((3, 0))


def test_config_roundtrip_and_validation():
    cfg = SolverConfig(c=3.0, seed=7)
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        SolverConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        SolverConfig(c=1.0)
    with pytest.raises(ValueError):
        SolverConfig(tol=1e-3)
