from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmslab import _kernels
from bmslab.permoracle import (
    BudgetError,
    Partition,
    aut_order,
    bms_connected_bruteforce,
    bms_disconnected_bruteforce,
    genus0_formula,
    partitions_of,
    riemann_hurwitz_L,
    unstable_onepoint,
    unstable_twopoint,
)


def test_partition_normalizes_and_parses():
    assert Partition([1, 3, 2]).parts == (3, 2, 1)
    assert Partition.parse("2, 2,1") == Partition((2, 2, 1))
    with pytest.raises(ValueError):
        Partition([2, 0])


def test_partition_counts():
    assert [len(partitions_of(n)) for n in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]


def test_aut_order():
    assert aut_order((3, 1)) == 1
    assert aut_order((1, 1)) == 2
    assert aut_order((2, 2, 1)) == 2


def test_riemann_hurwitz():
    assert riemann_hurwitz_L(2, 0, (2,)) == 3
    assert riemann_hurwitz_L(2, 1, (3,)) == 2
    assert riemann_hurwitz_L(2, 1, (1,)) is None


def test_disconnected_examples():
    assert bms_disconnected_bruteforce(2, (2,), 3) == 1
    assert bms_disconnected_bruteforce(1, (1,), 1) == 1
    assert bms_disconnected_bruteforce(2, (1, 1), 2) == 1


def test_connected_examples():
    assert bms_connected_bruteforce(2, 0, (3,)) == Fraction(5, 3)
    assert bms_connected_bruteforce(2, 1, (3,)) == Fraction(1, 3)
    assert bms_connected_bruteforce(2, 0, (1, 1, 1)) == 2


def test_genus0_examples():
    assert genus0_formula(2, (1, 1, 1)) == 2
    assert genus0_formula(2, (3,)) == Fraction(5, 3)
    assert genus0_formula(3, (1,)) == 1


def test_unstable_examples():
    assert unstable_onepoint(2, 2) == 1
    assert unstable_twopoint(2, 1, 1) == 1
    assert unstable_twopoint(2, 1, 2) == 2


def test_budget_guard():
    with pytest.raises(BudgetError):
        bms_connected_bruteforce(4, 0, (5,))


@pytest.mark.parametrize("m", [2, 3])
def test_bruteforce_against_closed_forms(m):
    for size in range(1, 6 if m == 2 else 5):
        for mu in partitions_of(size):
            b = bms_connected_bruteforce(m, 0, mu)
            assert b == genus0_formula(m, mu)
            if mu.length == 1:
                assert b == unstable_onepoint(m, mu[0])
            if mu.length == 2:
                assert b == unstable_twopoint(m, mu[0], mu[1])


def _splittings(parts):
    """Set partitions of the indices of ``parts``."""
    if not parts:
        yield []
        return
    first, rest = parts[0], parts[1:]
    for p in _splittings(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def _connected_with_cycles(m, nu, L):
    """Connected count on the cycles ``nu`` with total cycle count exactly ``L``."""
    g = 0
    while (Lg := riemann_hurwitz_L(m, g, nu)) is not None:
        if Lg == L:
            return bms_connected_bruteforce(m, g, nu)
        g += 1
    return Fraction(0)


def _from_components(m, blocks, L):
    if not blocks:
        return Fraction(int(L == 0))
    nu, rest = blocks[0], blocks[1:]
    return sum(
        (_connected_with_cycles(m, nu, Lb) * _from_components(m, rest, L - Lb) for Lb in range(m, L + 1)),
        Fraction(0),
    )


@pytest.mark.parametrize("m", [2, 3])
@pytest.mark.parametrize("mu", [(2, 1), (1, 1, 1), (2, 2), (3, 1), (2, 1, 1)])
def test_disconnected_is_sum_over_orbits(m, mu):
    # with the representative fixed, orbits are unions of its cycles and the weight factorizes
    mu = Partition(mu)
    for L in range(m * mu.size + 1):
        total = Fraction(0)
        for blocks in _splittings(list(mu.parts)):
            total += _from_components(m, blocks, L)
        assert bms_disconnected_bruteforce(m, mu, L) == total


@given(st.integers(1, 5).flatmap(lambda n: st.sampled_from(partitions_of(n))), st.integers(0, 2), st.sampled_from([2, 3]))
def test_values_nonnegative_with_bounded_denominator(mu, g, m):
    b = bms_connected_bruteforce(m, g, mu)
    assert b >= 0
    assert (math.factorial(mu.size) // aut_order(mu)) % b.denominator == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_kernels_agree(n, monkeypatch):
    perms = _kernels.all_permutations(n)
    target = perms[-1]
    monkeypatch.setenv("BMSLAB_NO_NUMBA", "1")
    a = _kernels.count_tuples(perms, target, 2, 2 * n)
    monkeypatch.delenv("BMSLAB_NO_NUMBA")
    b = _kernels.count_tuples(perms, target, 2, 2 * n)
    assert (a == b).all()
