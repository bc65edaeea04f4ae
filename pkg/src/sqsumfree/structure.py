"""Block splitting, the doubling merge, GAP fitting and the divisor-or-GAP dichotomy.

Everything here is a desk-scale heuristic that carries certificates: whatever
is returned has been re-checked, and a run that cannot certify anything says
so instead of guessing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .congruence import CongruenceInstance, NoSolutionInBound, solve_quadratic_congruence
from .core import DEFAULT_CONFIG, BudgetExceeded, Gap, IntegerSet, SolverConfig, VerificationError
from .sumset import fixed_count_sums, gcd_all, is_proper, longest_ap_run, subset_sums


# ---------------------------------------------------------------- bit helpers

def _to_bits(values: Iterable[int]) -> int:
    bits = 0
    for v in values:
        if v < 0:
            raise ValueError("merge sets must be nonnegative")
        bits |= 1 << v
    return bits


def _from_bits(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def _smallest(bits: int, count: int) -> int:
    """Keep the ``count`` smallest members of a bitset."""
    out = 0
    for _ in range(count):
        low = bits & -bits
        out |= low
        bits ^= low
    return out


def _sum_bits(x: int, y: int) -> int:
    out = 0
    for e in _from_bits(x):
        out |= y << e
    return out


def _layers(block: Sequence[int], lmax: int) -> list[int]:
    layers = [1] + [0] * lmax
    for i, a in enumerate(block):
        for j in range(min(lmax, i + 1), 0, -1):
            if layers[j - 1]:
                layers[j] |= layers[j - 1] << a
    return layers


# ---------------------------------------------------------------- blocks

@dataclass
class BlockSplit:
    blocks: list[IntegerSet]
    l1: list[int]
    failed: bool
    max_block: int
    max_l: int

    def to_dict(self) -> dict:
        return {
            "blocks": [list(b.elements) for b in self.blocks],
            "l1": self.l1,
            "failed": self.failed,
            "max_block": self.max_block,
            "max_l": self.max_l,
        }


def greedy_disjoint_blocks(A_prime: IntegerSet, config: SolverConfig = DEFAULT_CONFIG) -> BlockSplit:
    """Cut A' into runs of consecutive elements with |l*block| >= |A'|/2.

    Each block is the shortest run (at most 20 log2|A'| elements) for which
    some l <= 10 log2|A'| works; l is the smallest such. Leftover elements that
    cannot form another block are dropped; the split is flagged as failed when
    no block at all could be formed.
    """
    els = list(A_prime.elements)
    n = len(els)
    if n < 16:
        raise ValueError("need |A'| >= 16")
    lg = math.log2(n)
    max_block = int(20 * lg)
    max_l = int(10 * lg)
    need = n / 2
    blocks, l1s = [], []
    pos = 0
    while pos < n:
        found = None
        for size in range(2, min(max_block, n - pos) + 1):
            block = els[pos : pos + size]
            layers = _layers(block, min(max_l, size))
            for l in range(1, min(max_l, size) + 1):
                if layers[l].bit_count() >= need:
                    found = (block, l)
                    break
            if found:
                break
        if found is None:
            break
        block, l = found
        B = IntegerSet(tuple(block), A_prime.universe_bound)
        if len(fixed_count_sums(B, l)) < need:
            raise VerificationError("block predicate failed on re-check")
        blocks.append(B)
        l1s.append(l)
        pos += len(block)
    return BlockSplit(blocks, l1s, not blocks, max_block, max_l)


# ---------------------------------------------------------------- merge

@dataclass
class MergeTrace:
    b: list[int]
    l: list[int]
    m: list[int]
    k: int
    c: float
    h: int
    consumed: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    stop_reason: str = ""
    n: int = 0
    p: int = 1

    def k_bound(self) -> float:
        """log_{c/2}(l1*n/(b1*p)); infinite when c <= 2."""
        if self.c <= 2:
            return math.inf
        arg = self.l[0] * self.n / (self.b[0] * self.p)
        if arg <= 0:
            return -math.inf
        return math.log(arg) / math.log(self.c / 2)

    def violations(self) -> list[str]:
        out = []
        if any(b2 < b1 for b1, b2 in zip(self.b, self.b[1:])):
            out.append("b_t not monotone")
        if any(l2 != 2 * l1 + 1 for l1, l2 in zip(self.l, self.l[1:])):
            out.append("l_{t+1} != 2 l_t + 1")
        if any(lt > 2 ** (t + 1) * self.l[0] for t, lt in enumerate(self.l)):
            out.append("l_t exceeds 2^t l_1")
        if any(m2 * 4 != m1 for m1, m2 in zip(self.m, self.m[1:])):
            out.append("m_t not quartered")
        if self.k > self.k_bound():
            out.append("k exceeds log_{c/2}(l1 n / (b1 p))")
        return out

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "l": self.l,
            "m": self.m,
            "k": self.k,
            "c": self.c,
            "h": self.h,
            "consumed": self.consumed,
            "flags": self.flags,
            "stop_reason": self.stop_reason,
            "k_bound": self.k_bound() if math.isfinite(self.k_bound()) else None,
        }


@dataclass
class MergeResult:
    trace: MergeTrace
    final_sets: list[list[int]]


def _best_tuple(S: int, pool: list[int], h: int, exact: bool) -> tuple[int, tuple[int, ...]]:
    """Maximise |union_d (S + a_d)| over h-subsets of the pool; ties go to the lex-least tuple."""
    if exact:
        best = (-1, ())
        for combo in itertools.combinations(pool, h):
            u = 0
            for a in combo:
                u |= S << a
            size = u.bit_count()
            if size > best[0]:
                best = (size, combo)
        return best
    chosen: list[int] = []
    u = 0
    rest = list(pool)
    for _ in range(h):
        top = (-1, None)
        for a in rest:
            size = (u | (S << a)).bit_count()
            if size > top[0]:
                top = (size, a)
        chosen.append(top[1])
        u |= S << top[1]
        rest.remove(top[1])
    return u.bit_count(), tuple(sorted(chosen))


def merge_algorithm(
    blocks: Sequence[Iterable[int]],
    A_doubleprime: Iterable[int],
    config: SolverConfig = DEFAULT_CONFIG,
    l1: int = 1,
    *,
    n: int | None = None,
    p: int = 1,
) -> MergeResult:
    """Repeatedly merge pairs B_i + B_j + {a_1..a_h} and stop once growth falls below c.

    ``blocks`` are the round-one sets B^1_i (already l1-fold sums). Each round
    forms m_t/4 new sets, each from a fresh pair i < j and h elements of A''
    chosen to maximise the union, removes the used elements from A'', and
    truncates all new sets to their common minimum size.
    """
    sets = [sorted(set(int(v) for v in B)) for B in blocks]
    if len(sets) < 4:
        raise ValueError("blocks exhausted: need at least 4 blocks")
    m = 4 ** int(math.log(len(sets), 4) + 1e-9)
    sets = sets[:m]
    b1 = min(len(s) for s in sets)
    if b1 == 0:
        raise ValueError("empty block")
    bits = [_smallest(_to_bits(s), b1) for s in sets]
    pool = sorted(set(int(a) for a in A_doubleprime))
    if n is None:
        n = max([max(s) for s in sets] + pool + [1])
    trace = MergeTrace(b=[b1], l=[l1], m=[m], k=0, c=config.c, h=config.h, n=n, p=p)
    t = 1
    while True:
        if m < 4:
            trace.k = t - 1
            trace.stop_reason = "blocks exhausted"
            break
        if not pool:
            trace.k = t - 1
            trace.stop_reason = "A'' exhausted"
            break
        used = [False] * m
        new = []
        for _ in range(m // 4):
            h = config.h
            if h > len(pool):
                h = len(pool)
                if h == 0:
                    break
                trace.flags.append(f"round {t}: h reduced to {h}")
            exact = math.comb(len(pool), h) <= config.argmax_exact_budget
            if not exact and f"round {t}: greedy argmax" not in trace.flags:
                trace.flags.append(f"round {t}: greedy argmax")
            best = None
            for i in range(m):
                if used[i]:
                    continue
                for j in range(i + 1, m):
                    if used[j]:
                        continue
                    S = _sum_bits(bits[i], bits[j])
                    size, combo = _best_tuple(S, pool, h, exact)
                    if best is None or size > best[0]:
                        best = (size, i, j, combo, S)
            size, i, j, combo, S = best
            used[i] = used[j] = True
            u = 0
            for a in combo:
                u |= S << a
                pool.remove(a)
                trace.consumed.append(a)
            new.append(u)
        if not new:
            trace.k = t - 1
            trace.stop_reason = "A'' exhausted"
            break
        b_next = min(u.bit_count() for u in new)
        bits = [_smallest(u, b_next) for u in new]
        m //= 4
        trace.b.append(b_next)
        trace.l.append(2 * trace.l[-1] + 1)
        trace.m.append(m)
        if b_next < config.c * trace.b[-2]:
            trace.k = t
            trace.stop_reason = "growth below c"
            break
        t += 1
    bad = trace.violations()
    if bad:
        raise VerificationError(f"merge trace invariants failed: {bad}")
    return MergeResult(trace, [_from_bits(u) for u in bits])


# ---------------------------------------------------------------- GAP fitting

def _rank2_candidates(vals: list[int], limit: int = 12) -> list[int]:
    diffs: dict[int, int] = {}
    if len(vals) <= 400:
        pairs = itertools.combinations(vals, 2)
    else:
        pairs = zip(vals, vals[1:])
    for x, y in pairs:
        diffs[y - x] = diffs.get(y - x, 0) + 1
    ranked = sorted(diffs, key=lambda d: (-diffs[d], d))
    return ranked[:limit]


def _fit_rank2(vals: list[int], s1: int, s2: int) -> Optional[Gap]:
    """Smallest box for X in {offset + x1*s1 + x2*s2}, reducing x1 modulo s2."""
    if math.gcd(s1, s2) != 1:
        return None
    base = vals[0]
    inv = pow(s1, -1, s2)
    coords = []
    for v in vals:
        x1 = ((v - base) * inv) % s2
        rest = v - base - x1 * s1
        if rest % s2:
            return None
        coords.append((x1, rest // s2))
    lo1 = min(c[0] for c in coords)
    lo2 = min(c[1] for c in coords)
    sizes = (max(c[0] for c in coords) - lo1, max(c[1] for c in coords) - lo2)
    return Gap(base + lo1 * s1 + lo2 * s2, (s1, s2), sizes)


def fit_gap(
    X: Iterable[int], max_rank: int = 2, kappa: float | None = None, budget: int | None = None
) -> Optional[Gap]:
    """A GAP of rank <= max_rank containing X with volume <= kappa*|X|, or None.

    Returns the smallest-volume fit found, preferring rank 1 on ties.
    """
    vals = sorted(set(int(v) for v in (X.elements if isinstance(X, IntegerSet) else X)))
    if len(vals) < 2:
        raise ValueError("need |X| >= 2")
    if max_rank not in (1, 2):
        raise ValueError("max_rank must be 1 or 2")
    kappa = DEFAULT_CONFIG.kappa if kappa is None else kappa
    budget = DEFAULT_CONFIG.enum_budget if budget is None else budget
    g = gcd_all(v - vals[0] for v in vals)
    fits = [Gap(vals[0], (g,), ((vals[-1] - vals[0]) // g,))]
    if max_rank == 2:
        scaled = [(v - vals[0]) // g for v in vals]
        cands = _rank2_candidates(scaled)
        for s1, s2 in itertools.combinations(sorted(cands), 2):
            Q = _fit_rank2(scaled, s1, s2)
            if Q is not None and all(L > 0 for L in Q.sizes):
                fits.append(Gap(vals[0] + g * Q.offset, (g * s1, g * s2), Q.sizes))
    best = None
    for Q in fits:
        if Q.volume > kappa * len(vals):
            continue
        if Q.rank == 2 and (Q.volume > budget or not is_proper(Q, budget)):
            continue
        if best is None or Q.volume < best.volume:
            best = Q
    if best is not None:
        members = _gap_members(best)
        if members is not None and not set(vals) <= members:
            raise VerificationError("fitted GAP does not contain X")
    return best


def _gap_members(Q: Gap, budget: int = 10**7) -> Optional[set[int]]:
    return Q.element_set(budget) if Q.volume <= budget else None


# ---------------------------------------------------------------- dichotomy

@dataclass
class DichotomyOutcome:
    branch: str  # "gap", "divisor" or "inconclusive"
    A_prime: IntegerSet
    A_doubleprime: IntegerSet
    gap: Optional[Gap] = None
    q: Optional[int] = None
    z: Optional[int] = None
    added: tuple[int, ...] = ()
    d: Optional[int] = None
    p: int = 1
    trace: Optional[MergeTrace] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "branch": self.branch,
            "p": self.p,
            "A_prime": list(self.A_prime.elements),
            "A_doubleprime": list(self.A_doubleprime.elements),
            "notes": self.notes,
        }
        if self.branch == "gap":
            out.update(gap=self.gap.to_dict(), q=self.q, z=self.z, added=list(self.added))
        if self.branch == "divisor":
            out["d"] = self.d
        if self.trace is not None:
            out["trace"] = self.trace.to_dict()
        return out


def _split(A: IntegerSet, config: SolverConfig) -> tuple[list[int], list[int]]:
    els = list(A.elements)
    size = math.ceil(len(els) ** config.prefix_exponent - 1e-12)
    return els[:size], els[size:]


def _pipeline_trace(A1: list[int], A2: list[int], config: SolverConfig, n: int, p: int) -> tuple[Optional[MergeTrace], list[str]]:
    notes = []
    if len(A1) < 16:
        return None, ["A' below 16 elements: merge pipeline skipped"]
    split = greedy_disjoint_blocks(IntegerSet(tuple(A1), max(A1)), config)
    if len(split.blocks) < 4:
        return None, [f"only {len(split.blocks)} blocks: merge pipeline skipped"]
    l1 = min(max(split.l1), min(len(b) for b in split.blocks))
    firsts = [fixed_count_sums(b, l1).elements for b in split.blocks]
    try:
        res = merge_algorithm(firsts, A2, config, l1, n=n, p=p)
    except ValueError as exc:
        return None, [f"merge skipped: {exc}"]
    return res.trace, notes


def dichotomy(A: IntegerSet, p: int = 1, config: SolverConfig = DEFAULT_CONFIG, *, run_pipeline: bool = True) -> DichotomyOutcome:
    """Either a certified residue-compatible GAP inside S_{A'} or a common divisor of A''.

    A' is the smallest ceil(|A|^(2/3)) elements. With q = gcd(A'), the GAP is
    the longest progression of step q inside S_{A'}. If the residues of A''
    modulo q share a factor d > 1 with q, d divides every element of A''.
    Otherwise a bounded solution of sum x_i s_i + r = p z^2 (mod q) selects x_i
    elements from each residue class s_i of A''; they are moved into A' and
    the GAP is shifted by their total.
    """
    if len(A) < 32:
        raise ValueError("dichotomy needs |A| >= 32")
    if p < 1:
        raise ValueError("p must be positive")
    A1, A2 = _split(A, config)
    trace, notes = (None, []) if not run_pipeline else _pipeline_trace(A1, A2, config, A.universe_bound, p)
    q = gcd_all(A1)
    bs = subset_sums(A1)
    r, L = longest_ap_run(bs, q)
    classes: dict[int, list[int]] = {}
    for a in A2:
        classes.setdefault(a % q, []).append(a)
    d = gcd_all(list(classes) + [q]) if classes else q
    ub = A.universe_bound
    if d > 1 and A2:
        out = DichotomyOutcome(
            "divisor", IntegerSet(tuple(A1), ub), IntegerSet(tuple(A2), ub), d=d, p=p, trace=trace, notes=notes
        )
        verify_outcome(A, out)
        return out
    # here d == 1, so the nonzero residues together with q have gcd 1
    residues = sorted(s for s in classes if s)
    x: tuple[int, ...] = ()
    z = 0
    try:
        if q > 1:
            sol = solve_quadratic_congruence(CongruenceInstance(tuple(residues), r % q, p, q), config.D)
            x, z = sol.x, sol.z
    except (NoSolutionInBound, BudgetExceeded) as exc:
        notes.append(f"residue repair failed: {exc}")
        return DichotomyOutcome("inconclusive", IntegerSet(tuple(A1), ub), IntegerSet(tuple(A2), ub), p=p, trace=trace, notes=notes)
    added: list[int] = []
    for s, xi in zip(residues, x):
        if xi > len(classes[s]):
            notes.append(f"class {s} has {len(classes[s])} elements, needs {xi}")
            return DichotomyOutcome("inconclusive", IntegerSet(tuple(A1), ub), IntegerSet(tuple(A2), ub), p=p, trace=trace, notes=notes)
        added.extend(classes[s][:xi])
    new1 = sorted(A1 + added)
    new2 = sorted(set(A2) - set(added))
    Q = Gap(r + sum(added), (q,), (L,))
    out = DichotomyOutcome(
        "gap",
        IntegerSet(tuple(new1), ub),
        IntegerSet(tuple(new2), ub),
        gap=Q,
        q=q,
        z=z % q if q > 1 else 0,
        added=tuple(sorted(added)),
        p=p,
        trace=trace,
        notes=notes,
    )
    verify_outcome(A, out)
    return out


def _reachable_sums(values: Sequence[int]) -> int:
    """Subset sums as one Python integer bitmask; independent of the numpy engine."""
    reach = 1
    for v in values:
        reach |= reach << v
    return reach & ~1


def verify_outcome(A: IntegerSet, out: DichotomyOutcome, budget: int = 10**7) -> None:
    """Re-check an outcome from scratch; raises VerificationError on any failure."""
    A1, A2 = set(out.A_prime.elements), set(out.A_doubleprime.elements)
    if A1 & A2 or A1 | A2 != set(A.elements):
        raise VerificationError("A' and A'' do not partition A")
    if out.branch == "divisor":
        if out.d is None or out.d <= 1 or any(a % out.d for a in A2):
            raise VerificationError("divisor certificate failed")
        if out.gap is not None:
            raise VerificationError("both branches populated")
    elif out.branch == "gap":
        Q = out.gap
        if Q is None or Q.rank > 2 or out.d is not None:
            raise VerificationError("GAP branch malformed")
        if Q.volume > budget:
            raise BudgetExceeded("GAP too large to re-verify")
        reach = _reachable_sums(sorted(A1))
        for v in Q.enumerate(budget):
            if v <= 0 or not (reach >> v) & 1:
                raise VerificationError(f"GAP element {v} is not a subset sum of A'")
        q = out.q
        if any(s % q for s in Q.steps):
            raise VerificationError("GAP steps are not multiples of q")
        if (Q.offset - out.p * out.z * out.z) % q:
            raise VerificationError("residue identity r = p z^2 (mod q) fails")
    elif out.branch != "inconclusive":
        raise VerificationError(f"unknown branch {out.branch}")


@dataclass
class IterationResult:
    outcomes: list[DichotomyOutcome]
    p_values: list[int]
    terminated: str

    def to_dict(self) -> dict:
        return {"outcomes": [o.to_dict() for o in self.outcomes], "p": self.p_values, "terminated": self.terminated}


def iterate_dichotomy(A: IntegerSet, p: int = 1, config: SolverConfig = DEFAULT_CONFIG, max_rounds: int = 64) -> IterationResult:
    """Repeat the dichotomy, dividing A'' by d and multiplying p by d on divisor branches."""
    outcomes, ps = [], [p]
    cur = A
    for _ in range(max_rounds):
        if len(cur) < 32:
            return IterationResult(outcomes, ps, "set too small")
        out = dichotomy(cur, p, config, run_pipeline=False)
        outcomes.append(out)
        if out.branch != "divisor":
            return IterationResult(outcomes, ps, out.branch)
        nxt = IntegerSet.of([a // out.d for a in out.A_doubleprime.elements])
        if nxt.elements[-1] >= cur.elements[-1]:
            raise VerificationError("max(A) did not decrease")
        cur = nxt
        p *= out.d
        ps.append(p)
    raise VerificationError("iteration did not terminate within max_rounds")
