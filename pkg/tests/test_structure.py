from __future__ import annotations

import random

import pytest

from sqsumfree.core import Gap, IntegerSet, SolverConfig, VerificationError
from sqsumfree.extremal import construct_example1
from sqsumfree.structure import (
    DichotomyOutcome,
    dichotomy,
    fit_gap,
    greedy_disjoint_blocks,
    iterate_dichotomy,
    merge_algorithm,
    verify_outcome,
)
from sqsumfree.sumset import fixed_count_sums


def test_blocks_on_interval():
    split = greedy_disjoint_blocks(IntegerSet.of(range(1, 65)))
    assert not split.failed and split.blocks
    for B, l in zip(split.blocks, split.l1):
        assert len(fixed_count_sums(B, l)) >= 32
        assert len(B) <= split.max_block and l <= split.max_l
    seen = [e for B in split.blocks for e in B.elements]
    assert len(seen) == len(set(seen))


def test_blocks_flag_on_adversarial_input():
    # sparse input: any block returned must still satisfy the predicate
    split = greedy_disjoint_blocks(IntegerSet.of(2**i for i in range(16)))
    for B, l in zip(split.blocks, split.l1):
        assert len(fixed_count_sums(B, l)) >= 8
    with pytest.raises(ValueError):
        greedy_disjoint_blocks(IntegerSet.of(range(1, 10)))


def test_merge_single_step():
    res = merge_algorithm([range(10)] * 4, [0], SolverConfig(h=1, c=2.0))
    t = res.trace
    assert t.k == 1 and t.b == [10, 19] and t.m == [4, 1] and t.l == [1, 3]
    assert t.consumed == [0] and not t.violations()


def test_merge_dilated_progressions():
    blocks = [[s * i for i in range(8)] for s in (1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1)]
    res = merge_algorithm(blocks, list(range(0, 400, 7)), SolverConfig(h=2, c=1.5), n=1000)
    t = res.trace
    assert all(b2 >= b1 for b1, b2 in zip(t.b, t.b[1:])) and not t.violations()


def test_merge_reduced_h_flag_and_errors():
    res = merge_algorithm([range(5)] * 4, [1, 2], SolverConfig(h=5, c=1.1))
    assert any("h reduced" in f for f in res.trace.flags)
    with pytest.raises(ValueError):
        merge_algorithm([range(5)] * 3, [1], SolverConfig())


def test_fit_gap_examples():
    assert fit_gap([3, 5, 7, 9]) == Gap(3, (2,), (3,))
    assert fit_gap([0, 1, 10, 11], max_rank=2) == Gap(0, (1, 10), (1, 1))
    rng = random.Random(8)
    assert fit_gap(rng.sample(range(1, 10**6), 60), kappa=100) is None
    with pytest.raises(ValueError):
        fit_gap([4])


def test_dichotomy_divisor_branches():
    out = dichotomy(IntegerSet.of(range(6, 193, 6)))
    assert out.branch == "divisor" and out.d == 6
    A = construct_example1(40_000)
    out = dichotomy(A)
    assert out.branch == "divisor" and out.d == A.elements[0]


def test_dichotomy_gap_branch_on_interval():
    out = dichotomy(IntegerSet.of(range(1, 65)))
    assert out.branch == "gap" and out.q == 1
    assert out.gap.offset == 1 and out.gap.sizes == (135,)


def test_dichotomy_residue_repair():
    rng = random.Random(1)
    for _ in range(10):
        A = IntegerSet.of(rng.sample(range(1, 3000), 60))
        out = dichotomy(A, rng.randint(1, 5), SolverConfig(c=3.0))
        assert out.branch in ("gap", "divisor", "inconclusive")
        verify_outcome(A, out)


def test_verifier_rejects_forgeries():
    A = IntegerSet.of(range(1, 65))
    good = dichotomy(A)
    bad = DichotomyOutcome("gap", good.A_prime, good.A_doubleprime, gap=Gap(1, (1,), (500,)), q=1, z=0)
    with pytest.raises(VerificationError):
        verify_outcome(A, bad)
    bad = DichotomyOutcome("divisor", good.A_prime, good.A_doubleprime, d=2)
    with pytest.raises(VerificationError):
        verify_outcome(A, bad)


def test_iteration_terminates():
    A = IntegerSet.of(36 * b for b in range(1, 200))
    res = iterate_dichotomy(A)
    assert res.terminated in ("gap", "inconclusive", "set too small")
    assert res.p_values[-1] % 36 == 0
