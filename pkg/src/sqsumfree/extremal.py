"""Exact SF(n) by branch and bound, the two lower-bound constructions, scaling rows."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sympy import isprime, prevprime

from .core import (
    DEFAULT_CONFIG,
    BudgetExceeded,
    Gap,
    IntegerSet,
    SolverConfig,
    VerificationError,
    is_squarefree,
)
from .gap_squares import verify_gap_membership
from .sumset import first_square_with_witness, is_proper, subset_sums


@dataclass
class SfRecord:
    n: int
    sf_value: int
    witness: IntegerSet
    exact: bool
    lower_construction_size: int
    nodes: int = 0
    ms: float = 0.0
    bracket: Optional[tuple[int, int]] = None

    @property
    def ratio(self) -> float:
        return self.sf_value / self.n ** (1 / 3)

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "sf": self.sf_value,
            "exact": self.exact,
            "witness": list(self.witness.elements),
            "lower_construction_size": self.lower_construction_size,
            "ratio": self.ratio,
            "nodes": self.nodes,
            "ms": self.ms,
        }
        if self.bracket is not None:
            d["bracket"] = list(self.bracket)
        return d


def _ceil_two_thirds_power(n: int) -> int:
    """Smallest x with x**3 >= n**2, i.e. ceil(n**(2/3)) without rounding error."""
    target = n * n
    x = max(1, int(round(target ** (1 / 3))))
    while x**3 < target:
        x += 1
    while x > 1 and (x - 1) ** 3 >= target:
        x -= 1
    return x


def example1_parameters(n: int) -> tuple[int, int]:
    """(p, k) for the multiples-of-p construction."""
    if n < 8:
        raise ValueError("construct_example1 needs n >= 8")
    p = _ceil_two_thirds_power(n)
    while p <= n:
        k = n // p
        if k >= 1 and is_squarefree(p) and k * (k + 1) // 2 < p:
            return p, k
        p += 1
    raise ValueError(f"no admissible p <= {n}")


def construct_example1(n: int) -> IntegerSet:
    """{p, 2p, ..., kp} with p square-free near n^(2/3) and 1+...+k < p."""
    p, k = example1_parameters(n)
    A = IntegerSet(tuple(p * m for m in range(1, k + 1)), n)
    hit = first_square_with_witness(A)
    if hit is not None:
        raise VerificationError(f"construction for n={n} has square subset sum {hit[0]}")
    return A


def example2_parameters(n: int) -> tuple[int, int, int]:
    """(q1, q2, N): two primes just below n^(3/4) and N = max(2, floor(n^(1/4)) // 2)."""
    fourth = math.isqrt(math.isqrt(n))
    N = max(2, fourth // 2)
    three_quarters = int(round(n ** 0.75))
    while three_quarters**4 > n**3:
        three_quarters -= 1
    while (three_quarters + 1) ** 4 <= n**3:
        three_quarters += 1
    top = three_quarters - N
    if top < 3:
        raise ValueError(f"n={n} too small for two primes")
    q2 = top if isprime(top) else prevprime(top)
    if q2 <= 2:
        raise ValueError(f"n={n} too small for two primes")
    q1 = prevprime(q2)
    while N * (q1 + q2) > n:
        q2 = q1
        if q2 <= 2:
            raise ValueError(f"n={n} too small for two primes")
        q1 = prevprime(q2)
    return int(q1), int(q2), N


def construct_example2(
    n: int, q1: int | None = None, q2: int | None = None, N: int | None = None
) -> tuple[IntegerSet, Gap]:
    """A = {q1*x + q2*y : 1 <= x, y <= N} and a proper rank-2 GAP containing S_A.

    Coordinate sums over a subset of A reach N * (1 + ... + N), so the
    containing GAP is {q1*x + q2*y : 1 <= x, y <= N**2 * (N + 1) / 2}.
    """
    if q1 is None or q2 is None or N is None:
        dq1, dq2, dN = example2_parameters(n)
        q1 = dq1 if q1 is None else q1
        q2 = dq2 if q2 is None else q2
        N = dN if N is None else N
    if q1 == q2 or not (isprime(q1) and isprime(q2)):
        raise ValueError("q1 and q2 must be distinct primes")
    elements = sorted(q1 * x + q2 * y for x in range(1, N + 1) for y in range(1, N + 1))
    if len(set(elements)) != len(elements):
        raise VerificationError("A is not a proper rank-2 GAP")
    A = IntegerSet.of(elements, universe_bound=max(n, elements[-1]))
    T = N * N * (N + 1) // 2
    container = Gap(q1 + q2, (q1, q2), (T - 1, T - 1))
    if container.volume <= 10**6 and not is_proper(container):
        raise VerificationError("containing GAP is not proper")
    bs = subset_sums(A)
    for s in bs.to_list():
        if verify_gap_membership(container, s) is None:
            raise VerificationError(f"subset sum {s} escapes the containing GAP")
    return A, container


def longest_ap_length(values: Sequence[int]) -> int:
    """Length of the longest arithmetic progression (any positive step) in a finite set."""
    vals = sorted(set(values))
    if len(vals) <= 2:
        return len(vals)
    present = set(vals)
    best = 2
    for i, a in enumerate(vals):
        for b in vals[i + 1 :]:
            d = b - a
            if (a - d) in present:
                continue  # not the start of a maximal progression
            if a + best * d > vals[-1]:
                break
            length = 2
            v = b + d
            while v in present:
                length += 1
                v += d
            best = max(best, length)
    return best


def _square_mask(limit: int) -> int:
    mask = 0
    z = 1
    while z * z <= limit:
        mask |= 1 << (z * z)
        z += 1
    return mask


class _Search:
    def __init__(self, n: int, node_budget: int):
        self.n = n
        self.sq = _square_mask(n * (n + 1) // 2)
        self.nodes = 0
        self.node_budget = node_budget

    def admissible(self, S: int, cands: Sequence[int]) -> list[int]:
        sq = self.sq
        return [c for c in cands if not ((S << c) & sq)]

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise BudgetExceeded("branch-and-bound node budget exhausted")

    def maximize(self, best: list[int]) -> list[int]:
        """Largest square-sum-free subset; ``best`` is the incumbent (descending order)."""
        self.best = list(best)
        start = self.admissible(1, list(range(self.n, 0, -1)))
        self._max(1, [], start)
        return self.best

    def _max(self, S: int, chosen: list[int], adm: list[int]) -> None:
        self.tick()
        if len(chosen) > len(self.best):
            self.best = list(chosen)
        if not adm or len(chosen) + len(adm) <= len(self.best):
            return
        c, rest = adm[0], adm[1:]
        self._max(S, chosen, rest)
        if len(chosen) + 1 + len(rest) <= len(self.best):
            return
        S2 = S | (S << c)
        chosen.append(c)
        self._max(S2, chosen, self.admissible(S2, rest))
        chosen.pop()

    def lexmin(self, size: int) -> Optional[list[int]]:
        """Lexicographically smallest ascending square-sum-free set of the given size."""
        start = self.admissible(1, list(range(1, self.n + 1)))
        return self._lex(1, [], start, size)

    def _lex(self, S: int, chosen: list[int], adm: list[int], size: int) -> Optional[list[int]]:
        self.tick()
        if len(chosen) == size:
            return list(chosen)
        for i, c in enumerate(adm):
            if len(chosen) + len(adm) - i < size:
                return None
            S2 = S | (S << c)
            chosen.append(c)
            found = self._lex(S2, chosen, self.admissible(S2, adm[i + 1 :]), size)
            chosen.pop()
            if found is not None:
                return found
        return None


def sf_exact(n: int, config: SolverConfig = DEFAULT_CONFIG) -> SfRecord:
    """SF(n) with a lexicographically smallest optimal witness.

    Branch and bound over candidates in descending order, excluding before
    including; branches are pruned when the chosen count plus the admissible
    remainder cannot beat the incumbent, and candidates whose addition would
    create a square subset sum are dropped as soon as they become inadmissible.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > config.sf_max_n:
        raise BudgetExceeded(f"n={n} exceeds the search budget sf_max_n={config.sf_max_n}")
    t0 = time.perf_counter()
    lower = construct_example1(n) if n >= 8 else IntegerSet((), n)
    search = _Search(n, config.sf_node_budget)
    exact = True
    try:
        best = search.maximize(sorted(lower.elements, reverse=True))
        witness = search.lexmin(len(best))
        if witness is None:
            raise VerificationError("optimum found but no lexicographic witness")
    except BudgetExceeded:
        exact = False
        witness = sorted(search.best)
    W = IntegerSet(tuple(sorted(witness)), n)
    if first_square_with_witness(W) is not None:
        raise VerificationError(f"SF witness for n={n} has a square subset sum")
    ms = (time.perf_counter() - t0) * 1000
    rec = SfRecord(n, len(W), W, exact, len(lower), search.nodes, ms)
    if not exact:
        rec.bracket = (len(lower), len(W))
    return rec


def sf_bruteforce(n: int) -> tuple[int, tuple[int, ...]]:
    """SF(n) by testing all 2**n - 1 subsets; returns (value, lexmin optimal set).

    A subset is bad when some sub-subset sums to a square: mark every mask whose
    own total is a square, close upward over supersets, then take the largest
    popcount among the unmarked masks.
    """
    if not 1 <= n <= 26:
        raise ValueError("exhaustive oracle limited to 1 <= n <= 26")
    size = 1 << n
    total = n * (n + 1) // 2
    is_sq = np.zeros(total + 1, dtype=bool)
    z = 1
    while z * z <= total:
        is_sq[z * z] = True
        z += 1
    sums = np.zeros(1, dtype=np.int16)
    pop = np.zeros(1, dtype=np.uint8)
    for i in range(n):
        sums = np.concatenate((sums, sums + (i + 1)))
        pop = np.concatenate((pop, pop + 1))
    bad = is_sq[sums]
    del sums
    for i in range(n):
        view = bad.reshape(-1, 2, 1 << i)
        view[:, 1, :] |= view[:, 0, :]
    good = ~bad
    best = int(pop[good].max())
    masks = np.flatnonzero(good & (pop == best))
    sets = [tuple(j + 1 for j in range(n) if (int(m) >> j) & 1) for m in masks]
    assert size == good.size
    return best, min(sets)


def scaling_report(n_values: Sequence[int], config: SolverConfig = DEFAULT_CONFIG) -> list[dict]:
    """One row per n: exact SF(n) when within budget, else the construction lower bound."""
    rows = []
    for n in n_values:
        if n < 1:
            raise ValueError("n must be positive")
        lower_size = len(construct_example1(n)) if n >= 8 else 0
        if n <= config.sf_max_n:
            rec = sf_exact(n, config)
            rows.append(
                {
                    "n": n,
                    "sf": rec.sf_value,
                    "exact": rec.exact,
                    "witness": list(rec.witness.elements),
                    "lower": lower_size,
                    "ratio": rec.ratio,
                    "nodes": rec.nodes,
                    "ms": rec.ms,
                }
            )
        else:
            A = construct_example1(n)
            rows.append(
                {
                    "n": n,
                    "sf": len(A),
                    "exact": False,
                    "witness": list(A.elements),
                    "lower": len(A),
                    "ratio": len(A) / n ** (1 / 3),
                    "nodes": 0,
                    "ms": 0.0,
                }
            )
    return rows
