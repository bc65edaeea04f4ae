"""Locate numbers of the form p*z**2 inside rank-1 and rank-2 GAPs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Gap, VerificationError, ceil_sqrt, check_i128

_INT64_SAFE = 1 << 62


class NoResidueRoot(ValueError):
    """r is not congruent to p times a square modulo q."""


def residue_roots(p: int, r: int, q: int) -> list[int]:
    """All z in [0, q) with p*z**2 = r (mod q), by direct scan."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if q == 1:
        return [0]
    z = np.arange(q, dtype=object if q > 3_000_000_000 else np.int64)
    vals = (p % q) * ((z * z) % q) % q
    return [int(v) for v in np.flatnonzero(vals == r % q)]


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _solve_rank2(value: int, offset: int, s1: int, s2: int, L1: int, L2: int) -> Optional[tuple[int, int]]:
    """Coordinates (x1, x2) in the box with offset + s1*x1 + s2*x2 == value, smallest x1 first."""
    v = value - offset
    g = math.gcd(s1, s2)
    if v % g:
        return None
    a, b, v = s1 // g, s2 // g, v // g
    m = abs(b)
    x1_0 = (v * pow(a, -1, m)) % m if m > 1 else 0
    x2_0 = (v - a * x1_0) // b
    # x1 = x1_0 + k*m, x2 = x2_0 - k*e
    e = a * (1 if b > 0 else -1)
    k_lo = _ceil_div(-x1_0, m)
    k_hi = _floor_div(L1 - x1_0, m)
    if e > 0:
        k_lo = max(k_lo, _ceil_div(x2_0 - L2, e))
        k_hi = min(k_hi, _floor_div(x2_0, e))
    else:
        ep = -e
        k_lo = max(k_lo, _ceil_div(-x2_0, ep))
        k_hi = min(k_hi, _floor_div(L2 - x2_0, ep))
    if k_lo > k_hi:
        return None
    x1 = x1_0 + k_lo * m
    x2 = x2_0 - k_lo * e
    return x1, x2


def verify_gap_membership(Q: Gap, value: int) -> Optional[tuple[int, ...]]:
    """Coordinates of ``value`` in a GAP of rank <= 2, or None if it is not an element."""
    if Q.rank == 1:
        (s,), (L,) = Q.steps, Q.sizes
        d = value - Q.offset
        if d % s:
            return None
        x = d // s
        return (x,) if 0 <= x <= L else None
    if Q.rank == 2:
        hit = _solve_rank2(value, Q.offset, Q.steps[0], Q.steps[1], Q.sizes[0], Q.sizes[1])
        if hit is None:
            return None
        if Q.value(hit) != value:
            raise VerificationError("rank-2 coordinate solve is inconsistent")
        return hit
    raise ValueError("membership solve supports rank 1 and 2 only")


@dataclass(frozen=True)
class ApSquareInstance:
    """The progression {r + q*x : 0 <= x <= L} and the multiplier p."""

    r: int
    q: int
    L: int
    p: int = 1

    def __post_init__(self) -> None:
        if self.q < 1 or self.p < 1 or self.L < 0:
            raise ValueError("need q >= 1, p >= 1, L >= 0")

    @property
    def gap(self) -> Gap:
        return Gap(self.r, (self.q,), (self.L,))

    def solvability_condition(self) -> bool:
        """(L/pq)**2 >= 10*t/pq + 20 with t from the smallest residue root."""
        roots = residue_roots(self.p, self.r, self.q)
        if not roots:
            return False
        z0 = roots[0]
        t = (self.r - self.p * z0 * z0) // self.q
        pq = self.p * self.q
        # multiply through by (pq)**2
        return self.L * self.L >= 10 * t * pq + 20 * pq * pq


@dataclass(frozen=True)
class ApSquareResult:
    z: int
    x: int
    path: str  # "window", "sandwich" or "scan"
    z0: int
    t: int

    @property
    def constructive(self) -> bool:
        return self.path != "scan"


def find_pz2_in_ap(inst: ApSquareInstance) -> Optional[ApSquareResult]:
    """p*z**2 inside {r + q*x : 0 <= x <= L}.

    Writes r = p*z0**2 + t*q with z0 the smallest residue root and looks for
    x0 >= 0 with t <= pq*x0**2 + 2p*z0*x0 <= t + L; then z = z0 + q*x0 works.
    The first try takes x0 with t/pq < x0**2 and (x0+1)**2 <= (t+L)/pq. When that
    window is empty the least x0 meeting the lower inequality is tried. Only if
    both fail does it scan every candidate square in the progression.
    Raises NoResidueRoot when r is not p times a square modulo q.
    """
    r, q, L, p = inst.r, inst.q, inst.L, inst.p
    roots = residue_roots(p, r, q)
    if not roots:
        raise NoResidueRoot(f"{r} is not {p}*square mod {q}")
    z0 = roots[0]
    t = (r - p * z0 * z0) // q
    pq = check_i128(p * q)
    Q = inst.gap

    def done(x0: int, path: str) -> ApSquareResult:
        z = z0 + q * x0
        val = check_i128(p * z * z)
        coords = verify_gap_membership(Q, val)
        if coords is None:
            raise VerificationError(f"p*z^2={val} not in the progression")
        return ApSquareResult(z, coords[0], path, z0, t)

    x0 = 0 if t < 0 else ceil_sqrt(t // pq + 1)
    if pq * (x0 + 1) ** 2 <= t + L:
        return done(x0, "window")

    def f(x: int) -> int:
        return pq * x * x + 2 * p * z0 * x

    if t <= 0:
        x0 = 0
    else:
        # root of pq*x^2 + 2p*z0*x - t, refined to the least integer with f(x) >= t
        disc = (p * z0) ** 2 + pq * t
        x0 = max(0, (math.isqrt(disc) - p * z0) // pq)
        while x0 > 0 and f(x0 - 1) >= t:
            x0 -= 1
        while f(x0) < t:
            x0 += 1
    if t <= f(x0) <= t + L:
        return done(x0, "sandwich")

    lo = max(0, r)
    hi = r + q * L
    if hi < 0:
        return None
    w = ceil_sqrt(_ceil_div(lo, p))
    while p * w * w <= hi:
        if (p * w * w - r) % q == 0:
            val = p * w * w
            coords = verify_gap_membership(Q, val)
            if coords is None:
                raise VerificationError("scan hit failed membership")
            return ApSquareResult(w, coords[0], "scan", z0, t)
        w += 1
    return None


@dataclass(frozen=True)
class Gap2SquareInstance:
    """The GAP {r + q*(q1*x1 + q2*x2) : 0 <= xi <= Li} with gcd(q1, q2) = 1."""

    r: int
    q: int
    q1: int
    q2: int
    L1: int
    L2: int
    p: int = 1

    def __post_init__(self) -> None:
        if self.q < 1 or self.p < 1 or self.q1 < 1 or self.q2 < 1:
            raise ValueError("need q, p, q1, q2 >= 1")
        if self.L1 < 0 or self.L2 < 0:
            raise ValueError("sizes must be nonnegative")
        if math.gcd(self.q1, self.q2) != 1:
            raise ValueError("q1 and q2 must be coprime")

    @property
    def gap(self) -> Gap:
        return Gap(self.r, (self.q * self.q1, self.q * self.q2), (self.L1, self.L2))


@dataclass(frozen=True)
class Gap2SquareResult:
    w: int
    x1: int
    x2: int
    window: str  # "I_z" or "full"


def _box_solve(v: np.ndarray, q1: int, q2: int, L1: int, L2: int):
    """Vectorised smallest-x1 representation v = q1*x1 + q2*x2 within the box."""
    inv = pow(q1, -1, q2) if q2 > 1 else 0
    x1 = ((v % q2) * inv) % q2
    x2 = (v - q1 * x1) // q2
    k = np.maximum(0, -((L2 - x2) // q1))  # ceil((x2 - L2) / q1), floored at 0
    x1 = x1 + k * q2
    x2 = x2 - k * q1
    ok = (v >= 0) & (x1 <= L1) & (x2 >= 0) & (x2 <= L2)
    return ok, x1, x2


def _isqrt_floor_frac(num: int, den: int) -> int:
    """floor(sqrt(num/den)) for num >= 0, den > 0."""
    return math.isqrt(num // den)


def find_pz2_in_gap2(inst: Gap2SquareInstance) -> Optional[Gap2SquareResult]:
    """p*w**2 inside a rank-2 GAP; searches the I_z window first, then every candidate w.

    Writing w = z0 + q*z turns membership into
    pq*z**2 + 2p*z0*z - t = q1*x1 + q2*x2, solved for x1 modulo q2.
    """
    r, q, p = inst.r, inst.q, inst.p
    q1, q2, L1, L2 = inst.q1, inst.q2, inst.L1, inst.L2
    swapped = q2 * L2 < q1 * L1
    if swapped:
        q1, q2, L1, L2 = q2, q1, L2, L1
    roots = residue_roots(p, r, q)
    if not roots:
        raise NoResidueRoot(f"{r} is not {p}*square mod {q}")
    z0 = roots[0]
    t = (r - p * z0 * z0) // q
    a, b = p * q, 2 * p * z0
    top = q1 * L1 + q2 * L2
    maxQ = check_i128(r + q * top)
    Q = inst.gap
    use_np = maxQ < _INT64_SAFE and p * (math.isqrt(max(maxQ, 0) // p) + 2) ** 2 < _INT64_SAFE

    def finish(w: int, x1: int, x2: int, window: str) -> Gap2SquareResult:
        if swapped:
            x1, x2 = x2, x1
        val = check_i128(p * w * w)
        if r + q * (inst.q1 * x1 + inst.q2 * x2) != val or not (0 <= x1 <= inst.L1 and 0 <= x2 <= inst.L2):
            raise VerificationError("rank-2 square certificate does not re-verify")
        if verify_gap_membership(Q, val) is None:
            raise VerificationError("membership solver disagrees with certificate")
        return Gap2SquareResult(w, x1, x2, window)

    # I_z = [sqrt((q1 L1/4 + t)/a) + 1, sqrt((q2 L2 + q1 L1/8 + t)/a) - 1], scaled by 8
    lo_num = 2 * q1 * L1 + 8 * t
    hi_num = 8 * q2 * L2 + q1 * L1 + 8 * t
    if hi_num >= 0:
        z_lo = 1 + (ceil_sqrt(_ceil_div(lo_num, 8 * a)) if lo_num > 0 else 0)
        z_hi = _isqrt_floor_frac(hi_num, 8 * a) - 1
        if z_lo <= z_hi:
            if use_np:
                zs = np.arange(z_lo, z_hi + 1, dtype=np.int64)
                v = a * zs * zs + b * zs - t
                ok, x1s, x2s = _box_solve(v, q1, q2, L1, L2)
                hits = np.flatnonzero(ok)
                if hits.size:
                    i = hits[0]
                    return finish(int(z0 + q * zs[i]), int(x1s[i]), int(x2s[i]), "I_z")
            else:
                for z in range(z_lo, z_hi + 1):
                    hit = _solve_rank2(a * z * z + b * z - t, 0, q1, q2, L1, L2)
                    if hit is not None:
                        return finish(z0 + q * z, hit[0], hit[1], "I_z")

    if maxQ < 0:
        return None
    w_lo = ceil_sqrt(_ceil_div(max(r, 0), p))
    w_hi = math.isqrt(maxQ // p)
    root_set = set(roots)
    if use_np:
        mask = np.zeros(q, dtype=bool)
        mask[roots] = True
        chunk = 1 << 20
        for start in range(w_lo, w_hi + 1, chunk):
            ws = np.arange(start, min(w_hi, start + chunk - 1) + 1, dtype=np.int64)
            ws = ws[mask[ws % q]]
            if ws.size == 0:
                continue
            v = (p * ws * ws - r) // q
            ok, x1s, x2s = _box_solve(v, q1, q2, L1, L2)
            hits = np.flatnonzero(ok)
            if hits.size:
                i = hits[0]
                return finish(int(ws[i]), int(x1s[i]), int(x2s[i]), "full")
        return None
    for w in range(w_lo, w_hi + 1):
        if w % q not in root_set:
            continue
        hit = _solve_rank2((p * w * w - r) // q, 0, q1, q2, L1, L2)
        if hit is not None:
            return finish(w, hit[0], hit[1], "full")
    return None


def gap_scan_pz2(Q: Gap, p: int = 1, budget: int = 10**7) -> list[int]:
    """Every w >= 0 with p*w**2 an element of Q, by enumerating Q (test oracle)."""
    out = set()
    for v in Q.element_set(budget):
        if v >= 0 and v % p == 0:
            s = math.isqrt(v // p)
            if s * s * p == v:
                out.add(s)
    return sorted(out)
