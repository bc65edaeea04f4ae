from __future__ import annotations

import math
import random

import numpy as np
import pytest

from sqsumfree.analytic import (
    BumpSpec,
    WeylInstance,
    bump_build,
    bump_eval,
    bump_fourier,
    divisor_count,
    divisor_sweep,
    divisor_witness,
    poisson_check,
    tail_bound_check,
    weyl_audit_corpus,
    weyl_bound_ratio,
    weyl_sum,
    weyl_sum_reference,
)
from sqsumfree.core import BudgetExceeded


@pytest.fixture(scope="module")
def bump():
    return bump_build(BumpSpec(0.0, 1000.0, 0.03), grid_log2=16)


def test_weyl_trivial_cases():
    assert weyl_sum(WeylInstance(1, 7, 0.3, 2, 1, 1)) == pytest.approx(2.0)
    assert weyl_sum(WeylInstance(1, 1, 0.0, 5, 13, 9)) == pytest.approx(2 * 13 * 9)
    with pytest.raises(ValueError):
        WeylInstance(2, 4, 0.0, 0, 1, 1)
    with pytest.raises(BudgetExceeded):
        weyl_sum(WeylInstance(1, 3, 0.0, 0, 10**5, 10**4))


def test_weyl_matches_reference():
    rng = random.Random(2)
    for _ in range(5):
        q = rng.randint(2, 200)
        a = rng.choice([v for v in range(1, q + 1) if math.gcd(v, q) == 1])
        inst = WeylInstance(a, q, rng.random(), rng.randint(-20, 20), rng.randint(1, 40), rng.randint(1, 40))
        assert weyl_sum(inst) == pytest.approx(weyl_sum_reference(inst), rel=1e-9)


def test_weyl_periodicity():
    rng = random.Random(4)
    for _ in range(20):
        q = rng.randint(2, 300)
        a = rng.choice([v for v in range(1, q) if math.gcd(v, q) == 1] or [1])
        base = WeylInstance(a, q, rng.random(), rng.randint(-9, 9), rng.randint(1, 60), rng.randint(1, 30))
        s = weyl_sum(base)
        shifted_a = WeylInstance(a + q, q, base.theta, base.start, base.N, base.M)
        shifted_t = WeylInstance(a, q, base.theta + 1, base.start, base.N, base.M)
        assert weyl_sum(shifted_a) == pytest.approx(s, rel=1e-9)
        assert weyl_sum(shifted_t) == pytest.approx(s, rel=1e-9)


def test_weyl_ratio():
    inst = WeylInstance(1, 1, 0.0, 0, 10, 10)
    r = weyl_bound_ratio(inst)
    assert r == pytest.approx(200 / ((10 * math.sqrt(10) + 100) * math.log(100) ** 6)) and r < 2
    with pytest.raises(ValueError):
        weyl_bound_ratio(WeylInstance(1, 1, 0.0, 0, 1, 1))
    with pytest.raises(ValueError):
        weyl_bound_ratio(WeylInstance(1, 997, 0.0, 0, 10, 10))
    corpus = weyl_audit_corpus(0)
    assert all(c.M * c.N >= 3 and (c.M * c.N) ** 3 >= c.q**4 for c in corpus)


def test_divisor_examples():
    assert divisor_witness(12, 3).d == 1
    w = divisor_witness(64, 3)
    assert (w.d, w.tau_n) == (4, 7)
    assert divisor_witness(1_000_003, 3).d == 1
    assert divisor_count(360) == 24
    with pytest.raises(ValueError):
        divisor_witness(10, 2)


def test_divisor_sweep_small():
    assert divisor_sweep(20_000)["ok"]


def test_bump_shape(bump):
    assert bump_eval(bump, 0.0) == 0.0 and bump_eval(bump, 1000.0) == 0.0
    assert bump_eval(bump, 500.0) == pytest.approx(1.0, abs=1e-9)
    assert bump_eval(bump, -5.0) == 0.0 and bump_eval(bump, 1200.0) == 0.0
    xs = np.linspace(-10, 1010, 5001)
    vals = bump_eval(bump, xs)
    assert vals.min() >= 0 and vals.max() <= 1
    assert np.all(np.abs(vals[(xs >= 30) & (xs <= 970)] - 1) <= 1e-9)
    f0 = bump_fourier(bump, 0.0).real
    assert 1000 * (1 - 0.06) <= f0 <= 1000
    assert np.trapezoid(bump.grid_f, bump.grid_x) == pytest.approx(f0, rel=1e-8)
    with pytest.raises(ValueError):
        BumpSpec(0, 10, 0.1)


def test_bump_fourier_matches_quadrature(bump):
    for lam in (0.0007, 0.003, 0.02):
        numeric = np.trapezoid(bump.grid_f * np.exp(-2j * np.pi * lam * bump.grid_x), bump.grid_x)
        assert abs(numeric - bump_fourier(bump, lam)) <= 1e-6 * bump.f_hat0


def test_poisson_single_term_and_scaling(bump):
    r = poisson_check(bump, 2000.0, 500.0)
    assert r.lhs == pytest.approx(1.0) and r.diff <= 1e-9 * bump.f_hat0
    for T in (37.0, 74.0):
        assert poisson_check(bump, T, 3.3).diff <= 1e-9 * bump.f_hat0
    with pytest.raises(ValueError):
        poisson_check(bump, 0.0, 1.0)


def test_tail_bound():
    s, b = tail_bound_check(0.5, 1)
    assert s < b == pytest.approx(40 * math.exp(-math.sqrt(0.5) / 2))
    s, b = tail_bound_check(0.9, 100)
    assert s <= b
    s, _ = tail_bound_check(0.4, 10**12)
    assert s == pytest.approx(0.0, abs=1e-100)
    with pytest.raises(ValueError):
        tail_bound_check(1.5, 3)
