"""Subset-sum and sumset algebra.

Subset sums are computed with a word-parallel shift-or over ``uint64`` words:
each element costs one shifted OR across the words that can be reached so far.
A parallel ``generation`` array remembers which element first produced every
reachable value, so a witness subset for any value can be rebuilt by
backtracking without per-element snapshots.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    DEFAULT_CONFIG,
    BudgetExceeded,
    Gap,
    IntegerSet,
    VerificationError,
    check_i128,
    integer_sqrt,
)

_ONE = np.uint64(1)


@dataclass(frozen=True)
class SumBitset:
    """Characteristic bit array of S_A over ``[0, s_max]``; bit 0 is never set."""

    words: np.ndarray
    s_max: int
    elements: tuple[int, ...]
    generation: Optional[np.ndarray] = None

    def __contains__(self, value: object) -> bool:
        if not isinstance(value, (int, np.integer)):
            return False
        v = int(value)
        if v <= 0 or v > self.s_max:
            return False
        return bool((int(self.words[v >> 6]) >> (v & 63)) & 1)

    def contains_many(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.int64)
        ok = (values > 0) & (values <= self.s_max)
        out = np.zeros(values.shape, dtype=bool)
        v = values[ok]
        out[ok] = ((self.words[v >> 6] >> (v & 63).astype(np.uint64)) & _ONE).astype(bool)
        return out

    def to_array(self) -> np.ndarray:
        """Members as a sorted int64 array."""
        bits = np.unpackbits(self.words.view(np.uint8), bitorder="little")[: self.s_max + 1]
        return np.flatnonzero(bits).astype(np.int64)

    def to_list(self) -> list[int]:
        return [int(v) for v in self.to_array()]

    def count(self) -> int:
        return int(np.unpackbits(self.words.view(np.uint8)).sum())

    def witness(self, value: int) -> list[int]:
        """A subset of the generating elements summing to ``value`` (ascending)."""
        if self.generation is None:
            raise ValueError("bitset was built without witness tracking")
        if value not in self:
            raise ValueError(f"{value} is not a subset sum")
        out = []
        v = value
        limit = len(self.elements)
        while v > 0:
            i = int(self.generation[v])
            if i >= limit:
                raise VerificationError("generation index is not decreasing")
            a = self.elements[i]
            out.append(a)
            v -= a
            limit = i
        if v != 0:
            raise VerificationError("witness backtrace overshot")
        return sorted(out)


def _as_elements(A) -> tuple[int, ...]:
    if isinstance(A, IntegerSet):
        return A.elements
    els = tuple(sorted(set(int(a) for a in A)))
    if els and els[0] <= 0:
        raise ValueError("subset sums need positive elements")
    return els


def _shift_or_into(dst: np.ndarray, src: np.ndarray, shift: int, hi: int) -> None:
    """dst[: hi] |= (src << shift)[: hi], with src read before any write."""
    w, b = divmod(shift, 64)
    if w >= hi:
        return
    n = hi - w
    if b == 0:
        dst[w:hi] |= src[:n]
        return
    dst[w:hi] |= src[:n] << np.uint64(b)
    if n > 1:
        dst[w + 1 : hi] |= src[: n - 1] >> np.uint64(64 - b)


def subset_sums(A, *, track_witness: bool = False, budget_bits: int | None = None) -> SumBitset:
    """Exact S_A as a bitset, processing elements in increasing order."""
    els = _as_elements(A)
    total = check_i128(sum(els))
    budget = DEFAULT_CONFIG.sum_budget_bits if budget_bits is None else budget_bits
    if total + 1 > budget:
        raise BudgetExceeded(f"sum {total} exceeds the bit budget {budget}")
    nw = (total >> 6) + 1
    words = np.zeros(nw, dtype=np.uint64)
    words[0] = _ONE  # empty sum, cleared at the end
    gen = None
    if track_witness:
        dtype = np.uint8 if len(els) < 255 else (np.uint16 if len(els) < 65535 else np.uint32)
        gen = np.full(total + 1, np.iinfo(dtype).max, dtype=dtype)
    reach = 0
    for i, a in enumerate(els):
        reach += a
        hi = (reach >> 6) + 1
        if gen is None:
            old = words[: hi].copy()
            _shift_or_into(words, old, a, hi)
        else:
            old = words[:hi].copy()
            _shift_or_into(words, old, a, hi)
            fresh = words[:hi] & ~old
            idx = np.flatnonzero(fresh)
            if idx.size:
                bits = np.unpackbits(fresh[idx].view(np.uint8), bitorder="little").reshape(-1, 64)
                rows, cols = np.nonzero(bits)
                gen[idx[rows] * 64 + cols] = i
    words[0] &= ~_ONE
    # bits past s_max are never set: every reachable value is <= total
    words.setflags(write=False)
    if gen is not None:
        gen.setflags(write=False)
    return SumBitset(words, total, els, gen)


def subset_sums_batch(sets: Sequence, jobs: int = 1) -> list[SumBitset]:
    """Evaluate independent instances, optionally across processes; order is preserved."""
    if jobs <= 1 or len(sets) <= 1:
        return [subset_sums(A) for A in sets]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(subset_sums, sets))


def fixed_count_sums(A, l: int) -> IntegerSet:
    """l*A: sums of exactly ``l`` distinct elements, by a layered shift-or DP."""
    els = _as_elements(A)
    if not 1 <= l <= len(els):
        raise ValueError(f"l={l} outside [1, {len(els)}]")
    layers = [1] + [0] * l
    for i, a in enumerate(els):
        for j in range(min(l, i + 1), 0, -1):
            if layers[j - 1]:
                layers[j] |= layers[j - 1] << a
    bits = layers[l]
    values = []
    while bits:
        low = bits & -bits
        values.append(low.bit_length() - 1)
        bits ^= low
    return IntegerSet.of(values, universe_bound=max(1, sum(els)))


def first_square_with_witness(A, p: int = 1) -> Optional[tuple[int, IntegerSet]]:
    """Smallest value of the form p*z**2 (z >= 1) in S_A, with a subset summing to it.

    With ``p == 1`` this is the smallest square subset sum.
    """
    if p < 1:
        raise ValueError("p must be positive")
    els = _as_elements(A)
    if not els:
        return None
    bs = subset_sums(els, track_witness=True)
    zmax = integer_sqrt(bs.s_max // p)
    if zmax < 1:
        return None
    zs = np.arange(1, zmax + 1, dtype=np.int64)
    targets = p * zs * zs
    hits = np.flatnonzero(bs.contains_many(targets))
    if hits.size == 0:
        return None
    value = int(targets[hits[0]])
    subset = bs.witness(value)
    if sum(subset) != value or len(set(subset)) != len(subset) or not set(subset) <= set(els):
        raise VerificationError("witness subset does not re-sum to the target")
    return value, IntegerSet.of(subset, universe_bound=max(1, els[-1]))


def is_square_sum_free(A) -> bool:
    return first_square_with_witness(A) is None


def sumset(X: Iterable[int], Y: Iterable[int]) -> set[int]:
    Y = list(set(Y))
    return {x + y for x in set(X) for y in Y}


def difference_set(X: Iterable[int], Y: Iterable[int]) -> set[int]:
    Y = list(set(Y))
    return {x - y for x in set(X) for y in Y}


def ruzsa_cover(X: Iterable[int], Y: Iterable[int]) -> list[int]:
    """Greedy covering: translates T with X inside T + (Y - Y) and |T| <= |X+Y| / |Y|.

    T is a maximal subset of X whose translates t + Y are pairwise disjoint,
    built by scanning X in increasing order.
    """
    X = sorted(set(X))
    Yset = set(Y)
    if not X or not Yset:
        raise ValueError("X and Y must be nonempty")
    T: list[int] = []
    used: set[int] = set()
    for x in X:
        shifted = {x + y for y in Yset}
        if used.isdisjoint(shifted):
            T.append(x)
            used |= shifted
    diffs = difference_set(Yset, Yset)
    for x in X:
        if not any((x - t) in diffs for t in T):
            raise VerificationError(f"{x} is not covered by the translates")
    if len(T) > len(sumset(X, Yset)) // len(Yset):
        raise VerificationError("covering exceeds |X+Y|/|Y| translates")
    return T


def positive_form(Q: Gap, budget: int | None = None) -> Gap:
    """Rewrite a GAP with positive elements so that every step is positive."""
    if Q.min_element() <= 0:
        raise ValueError("GAP contains a nonpositive element")
    offset = Q.offset + sum(s * L for s, L in zip(Q.steps, Q.sizes) if s < 0)
    out = Gap(offset, tuple(abs(s) for s in Q.steps), Q.sizes)
    budget = DEFAULT_CONFIG.enum_budget if budget is None else budget
    if Q.volume <= budget and sorted(out.enumerate(budget)) != sorted(Q.enumerate(budget)):
        raise VerificationError("positive form changed the element multiset")
    return out


def is_proper(Q: Gap, budget: int | None = None) -> bool:
    """True iff every coordinate tuple gives a distinct value."""
    budget = DEFAULT_CONFIG.enum_budget if budget is None else budget
    values = Q.enumerate(budget)
    return len(set(values)) == len(values)


def brute_force_subset_sums(A: Sequence[int]) -> set[int]:
    """Enumerate every nonempty subset; reference oracle for small inputs."""
    els = list(A)
    out = set()
    for r in range(1, len(els) + 1):
        for combo in itertools.combinations(els, r):
            out.add(sum(combo))
    return out


def longest_ap_run(bs: SumBitset, step: int) -> tuple[int, int]:
    """Longest run ``r, r+step, ..., r+L*step`` inside the bitset; returns (r, L).

    Returns (0, -1) when the bitset is empty.
    """
    if step < 1:
        raise ValueError("step must be positive")
    members = bs.to_array()
    if members.size == 0:
        return 0, -1
    best_r, best_len = 0, 0
    for res in range(step):
        cls = members[members % step == res]
        if cls.size == 0:
            continue
        idx = cls // step
        breaks = np.flatnonzero(np.diff(idx) != 1)
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [idx.size - 1]))
        lengths = ends - starts + 1
        k = int(np.argmax(lengths))
        r = int(cls[starts[k]])
        if lengths[k] > best_len or (lengths[k] == best_len and r < best_r):
            best_r, best_len = r, int(lengths[k])
    return best_r, best_len - 1


def gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, int(v))
    return g
