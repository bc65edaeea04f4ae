"""Quadratic Weyl sums  sum_{0<|m|<=M} |sum_{z in I} e(a*m*z^2/q + theta*m*z)|."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from sympy import isprime

from ..core import BudgetExceeded

TERM_BUDGET = 10**8
_CHUNK = 1 << 21


@dataclass(frozen=True)
class WeylInstance:
    a: int
    q: int
    theta: float
    start: int
    N: int
    M: int

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("q must be positive")
        if math.gcd(self.a, self.q) != 1:
            raise ValueError("a and q must be coprime")
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be positive")

    def to_dict(self) -> dict:
        return {"a": self.a, "q": self.q, "theta": self.theta, "start": self.start, "N": self.N, "M": self.M}


def _inner_abs(inst: WeylInstance, ms: np.ndarray) -> np.ndarray:
    """|sum_z e(a*m*z^2/q + theta*m*z)| for every m in ``ms``."""
    q = inst.q
    z = np.arange(inst.start, inst.start + inst.N, dtype=np.int64)
    zsq = ((z % q) * (z % q)) % q
    theta = inst.theta - math.floor(inst.theta)
    am = (inst.a % q * (ms % q)) % q
    quad = ((am[:, None] * zsq[None, :]) % q).astype(np.float64) / q
    lin = theta * (ms[:, None] * z[None, :]).astype(np.float64)
    phase = quad + lin
    phase -= np.floor(phase)
    terms = np.exp(2j * np.pi * phase)
    # reduction along the contiguous axis uses numpy's pairwise summation
    return np.abs(terms.sum(axis=1))


def weyl_sum(inst: WeylInstance) -> float:
    """Evaluate the sum in double precision.

    The terms for -m are conjugates of those for m, so only m = 1..M are
    evaluated. The quadratic phase is reduced modulo q in integers.
    """
    if inst.M * inst.N > TERM_BUDGET:
        raise BudgetExceeded(f"M*N = {inst.M * inst.N} exceeds {TERM_BUDGET}")
    rows = max(1, _CHUNK // inst.N)
    parts = []
    for lo in range(1, inst.M + 1, rows):
        ms = np.arange(lo, min(inst.M, lo + rows - 1) + 1, dtype=np.int64)
        parts.extend(_inner_abs(inst, ms).tolist())
    total = 2.0 * math.fsum(parts)
    return min(max(total, 0.0), 2.0 * inst.M * inst.N)


def weyl_sum_reference(inst: WeylInstance, dps: int = 40) -> float:
    """Straight re-summation over every m != 0 in mpmath at ``dps`` digits."""
    with mpmath.workdps(dps):
        theta = mpmath.mpf(inst.theta)
        q = inst.q
        total = mpmath.mpf(0)
        for m in range(-inst.M, inst.M + 1):
            if m == 0:
                continue
            s = mpmath.mpc(0)
            for z in range(inst.start, inst.start + inst.N):
                ph = mpmath.mpf((inst.a * m * z * z) % q) / q + theta * m * z
                s += mpmath.expjpi(2 * ph)
            total += abs(s)
        return float(total)


def weyl_bound_ratio(inst: WeylInstance, alpha: float = 6.0) -> float:
    """weyl_sum / ((M*sqrt(N) + M*N/sqrt(q)) * ln(MN)**alpha).

    Requires MN >= q**(4/3) and MN >= 3.
    """
    MN = inst.M * inst.N
    if MN < 3:
        raise ValueError("need M*N >= 3 so that ln(MN) > 1")
    if MN**3 < inst.q**4:
        raise ValueError("need M*N >= q**(4/3)")
    denom = (inst.M * math.sqrt(inst.N) + MN / math.sqrt(inst.q)) * math.log(MN) ** alpha
    return weyl_sum(inst) / denom


def weyl_audit_corpus(seed: int = 0, qmax: int = 997, per_q: int = 2, q_count: int = 40) -> list[WeylInstance]:
    """Seeded instances with q <= qmax (primes and composites) and MN >= q**(4/3)."""
    rng = np.random.default_rng(seed)
    qs = sorted(set(int(v) for v in rng.integers(2, qmax + 1, size=q_count)) | {997, 996, 2, 3})
    primes = [q for q in qs if isprime(q)]
    if not primes:
        qs.append(991)
    out = []
    for q in sorted(qs):
        need = math.ceil(q ** (4 / 3))
        while need**3 < q**4:
            need += 1
        for _ in range(per_q):
            N = int(rng.integers(max(2, math.isqrt(need) // 2), 2 * math.isqrt(need) + 3))
            M = max(1, -(-need // N)) + int(rng.integers(0, 4))
            a = int(rng.integers(1, q + 1))
            while math.gcd(a, q) != 1:
                a = int(rng.integers(1, q + 1))
            theta = float(rng.random())
            start = int(rng.integers(-50, 51))
            out.append(WeylInstance(a, q, theta, start, N, M))
    return out
