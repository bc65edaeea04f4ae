"""Small divisors carrying a controlled share of the divisor count."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sympy import factorint

from ..core import BudgetExceeded, VerificationError

FACTOR_LIMIT = 10**18


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for e in factorint(n).values())


def _beta(k: int) -> float:
    return k * math.log(k + 1)


def _inequality_holds(k: int, tau_d: int, tau_n: int) -> bool:
    """(k+1)^k * tau(d)^beta(k) >= tau(n), compared in logs."""
    lhs = k * math.log(k + 1) + _beta(k) * math.log(tau_d)
    return lhs >= math.log(tau_n) - 1e-12


@dataclass(frozen=True)
class DivisorWitness:
    n: int
    k: int
    d: int
    tau_n: int
    tau_d: int

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "d": self.d, "tau_n": self.tau_n, "tau_d": self.tau_d, "ok": True}


def _witness_from_factors(factors: dict[int, int], k: int) -> int:
    d = 1
    low = []
    for prime, e in sorted(factors.items()):
        if e >= k:
            d *= prime ** (e // k)
        else:
            low.append(prime)
    for prime in low[: len(low) // k]:
        d *= prime
    return d


def divisor_witness(n: int, k: int) -> DivisorWitness:
    """d | n with d**k <= n and (k+1)**k * tau(d)**(k ln(k+1)) >= tau(n).

    d takes floor(a/k) copies of every prime with exponent a >= k, times the
    floor(v/k) smallest of the v primes whose exponent is below k.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if k < 3:
        raise ValueError("k must be at least 3")
    if n > FACTOR_LIMIT:
        raise BudgetExceeded(f"n={n} exceeds the factorisation budget")
    factors = factorint(n)
    d = _witness_from_factors(factors, k)
    tau_n = math.prod(e + 1 for e in factors.values())
    tau_d = divisor_count(d)
    if n % d or d**k > n or not _inequality_holds(k, tau_d, tau_n):
        raise VerificationError(f"divisor witness failed for n={n}, k={k}")
    return DivisorWitness(n, k, d, tau_n, tau_d)


def _tau_sieve(limit: int) -> np.ndarray:
    tau = np.zeros(limit + 1, dtype=np.int32)
    for d in range(1, limit + 1):
        tau[d::d] += 1
    return tau


def _spf_sieve(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    return spf


def divisor_sweep(limit: int, ks=(3, 4, 5)) -> dict:
    """Check the witness triple for every n <= limit and each k; returns violation counts.

    Factorisations come from a smallest-prime-factor sieve and divisor counts
    from an independent additive sieve.
    """
    tau = _tau_sieve(limit)
    spf = _spf_sieve(limit).tolist()
    tau_l = tau.tolist()
    violations = {k: 0 for k in ks}
    for n in range(1, limit + 1):
        factors: dict[int, int] = {}
        m = n
        while m > 1:
            p = spf[m]
            factors[p] = factors.get(p, 0) + 1
            m //= p
        for k in ks:
            d = _witness_from_factors(factors, k)
            if n % d or d**k > n or not _inequality_holds(k, tau_l[d], tau_l[n]):
                violations[k] += 1
    return {"limit": limit, "ks": list(ks), "violations": violations, "ok": not any(violations.values())}
