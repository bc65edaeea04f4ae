"""Bounded solutions of a1*x1 + ... + ad*xd + r = p*z**2 (mod q)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sympy import factorint

from .core import DEFAULT_CONFIG, BudgetExceeded, VerificationError, check_i128
from .gap_squares import residue_roots

FACTOR_LIMIT = 10**12


class NoSolutionInBound(ValueError):
    """No solution exists (or none was found) with every x_i inside the bound."""


@dataclass(frozen=True)
class CongruenceInstance:
    a: tuple[int, ...]
    r: int
    p: int
    q: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if not self.a:
            raise ValueError("need at least one coefficient")
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be positive")
        g = self.q
        for v in self.a:
            g = math.gcd(g, v)
        if g != 1:
            raise ValueError(f"gcd(a_1, ..., a_d, q) = {g} != 1")

    def residual(self, x: Sequence[int], z: int) -> int:
        return (sum(ai * xi for ai, xi in zip(self.a, x)) + self.r - self.p * z * z) % self.q

    def to_dict(self, D: int | None = None) -> dict:
        d = {"a": list(self.a), "r": self.r, "p": self.p, "q": self.q}
        if D is not None:
            d["D"] = D
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CongruenceInstance":
        return cls(tuple(d["a"]), int(d["r"]), int(d["p"]), int(d["q"]))


@dataclass(frozen=True)
class CongruenceSolution:
    x: tuple[int, ...]
    z: int
    bound_used: int
    instance: CongruenceInstance

    def __post_init__(self) -> None:
        if len(self.x) != len(self.instance.a):
            raise VerificationError("solution length does not match the instance")
        if any(not 0 <= xi <= self.bound_used for xi in self.x):
            raise VerificationError("x outside the enforced bound")
        if self.instance.residual(self.x, self.z) != 0:
            raise VerificationError("congruence does not hold")

    def to_dict(self) -> dict:
        return {"x": list(self.x), "z": self.z, "bound_used": self.bound_used, "verified": True}


def congruence_bound(p: int, q: int, D: int) -> int:
    """floor((pq)^(1/2) * max(ln q, 1)^D)."""
    return int(math.floor(math.sqrt(p * q) * max(math.log(q), 1.0) ** D)) if q > 1 else int(math.isqrt(p))


def _factor(q: int) -> dict[int, int]:
    if q > FACTOR_LIMIT:
        raise BudgetExceeded(f"q={q} exceeds the factorisation budget {FACTOR_LIMIT}")
    return factorint(q)


def _decompose_indexed(a_list: Sequence[int], q: int) -> list[tuple[int, int]]:
    """[(q_j, index into a_list)], grouped by assigned coefficient, ordered by smallest prime."""
    g = q
    for v in a_list:
        g = math.gcd(g, v)
    if g != 1:
        raise ValueError(f"gcd(a_list, q) = {g} != 1")
    if q == 1:
        return [(1, 0)]
    parts: dict[int, int] = {}
    order: list[int] = []
    for prime, e in sorted(_factor(q).items()):
        for idx, v in enumerate(a_list):
            if v % prime:
                if idx not in parts:
                    parts[idx] = 1
                    order.append(idx)
                parts[idx] *= prime**e
                break
        else:  # unreachable when the gcd is 1
            raise VerificationError(f"no coefficient coprime to {prime}")
    out = [(parts[i], i) for i in order]
    moduli = [m for m, _ in out]
    if math.prod(moduli) != q:
        raise VerificationError("decomposition does not multiply back to q")
    for i, (m, idx) in enumerate(out):
        if math.gcd(a_list[idx], m) != 1:
            raise VerificationError("coefficient not coprime to its modulus")
        for m2, _ in out[i + 1 :]:
            if math.gcd(m, m2) != 1:
                raise VerificationError("moduli not pairwise coprime")
    return out


def decompose_coprime(a_list: Sequence[int], q: int) -> list[tuple[int, int]]:
    """Split q into pairwise coprime factors, each paired with a coefficient coprime to it.

    Every prime power of q goes to the first coefficient not divisible by that
    prime; the factors assigned to the same coefficient are multiplied together.
    """
    return [(m, a_list[i]) for m, i in _decompose_indexed(list(a_list), q)]


def _min_x_over_z(g: int, h: int, p: int, t: int, z1: int) -> tuple[int, int]:
    """Least x (then least z) with x = inv(a)*(p*k*z^2 + 2*p*z1*z - t) mod h/k, z in [0, h/k)."""
    k = math.gcd(g, h)
    a, qq = g // k, h // k
    if qq == 1:
        return 0, 0
    inv = pow(a, -1, qq)
    if qq < 3_000_000_000:
        z = np.arange(qq, dtype=np.int64)
        c2 = (inv * p * k) % qq
        c1 = (inv * 2 * p * z1) % qq
        c0 = (inv * t) % qq
        zz = (z * z) % qq
        x = ((c2 * zz) % qq + (c1 * z) % qq - c0) % qq
        i = int(np.argmin(x))
        return int(x[i]), i
    best = None
    for zi in range(qq):
        xv = (inv * (p * k * zi * zi + 2 * p * z1 * zi - t)) % qq
        if best is None or xv < best[0]:
            best = (xv, zi)
    return best


def solve_one_var(g: int, h: int, p: int, t: int, z1: int, bound: int) -> tuple[int, int]:
    """x in [0, bound] and z2 with g*x + p*z1**2 + t*k = p*z2**2 (mod h), where k = gcd(g, h).

    Tries z2 = z1 + z*k first, where x is forced modulo h/k; if no such x fits the
    bound, scans every residue z2 modulo h.
    """
    if g <= 0 or h <= 0 or p <= 0:
        raise ValueError("g, h, p must be positive")
    k = math.gcd(g, h)
    x, z = _min_x_over_z(g, h, p, t, z1)
    z2 = z1 + z * k
    if x > bound:
        qq = h // k
        inv = pow(g // k, -1, qq) if qq > 1 else 0
        best = None
        for cand in range(h):
            diff = p * (cand * cand - z1 * z1)
            if diff % k:
                continue
            xv = (inv * (diff // k - t)) % qq if qq > 1 else 0
            if best is None or xv < best[0]:
                best = (xv, cand)
        if best is None or best[0] > bound:
            raise NoSolutionInBound(f"no x <= {bound} for g={g}, h={h}, p={p}, t={t}, z1={z1}")
        x, z2 = best
    if (g * x + p * z1 * z1 + t * k - p * z2 * z2) % h:
        raise VerificationError("one-variable certificate failed")
    return x, z2


def solve_quadratic_congruence(inst: CongruenceInstance, D: int | None = None) -> CongruenceSolution:
    """Solution with every x_i <= (pq)^(1/2) * max(ln q, 1)^D.

    Splits q into coprime parts q_1...q_l, each with a coefficient coprime to it,
    and brings in one variable per part: with H the product of the parts used
    so far, the running value is p*z1**2 + (multiple of H) and the next variable
    is fitted modulo H*q_j by the one-variable step.
    """
    D = DEFAULT_CONFIG.D if D is None else D
    p, q, r, a = inst.p, inst.q, inst.r, inst.a
    bound = congruence_bound(p, q, D)
    check_i128(p * q)
    roots = residue_roots(p, r, q)
    if roots:
        return CongruenceSolution(tuple(0 for _ in a), roots[0], bound, inst)
    x = [0] * len(a)
    z1 = 0
    H = 1
    current = r
    for qj, idx in _decompose_indexed(a, q):
        H_new = H * qj
        g = a[idx] % H_new
        k = math.gcd(g, H_new)
        diff = current - p * z1 * z1
        if diff % H or diff % k:
            raise VerificationError("running value lost its divisibility")
        xv, z2 = solve_one_var(g, H_new, p, diff // k, z1, bound)
        x[idx] = xv
        current += a[idx] * xv
        z1 = z2
        H = H_new
    return CongruenceSolution(tuple(x), z1 % q, bound, inst)


def brute_force_congruence(
    inst: CongruenceInstance, box_bound: int, budget: int = 10**8
) -> Optional[CongruenceSolution]:
    """Exhaustive search of the box [0, box_bound]^d; lexicographically least x, then least z.

    Works on residues: every x in the box is replaced by x mod q, which is still
    in the box, so the search only needs x_i < min(box_bound + 1, q). The sets of
    residues reachable by the trailing variables are built exactly, then x is
    fixed one coordinate at a time.
    """
    p, q, r, a = inst.p, inst.q, inst.r, inst.a
    d = len(a)
    B = min(box_bound, q - 1)
    if (B + 1) * d * q > budget:
        raise BudgetExceeded("brute-force box exceeds the enumeration budget")
    if q == 1:
        return CongruenceSolution(tuple(0 for _ in a), 0, box_bound, inst)
    reach = [None] * (d + 1)
    reach[d] = np.zeros(q, dtype=bool)
    reach[d][0] = True
    for j in range(d - 1, -1, -1):
        aj = a[j] % q
        nxt = reach[j + 1]
        cur = np.zeros(q, dtype=bool)
        order = q // math.gcd(aj, q)
        if B + 1 >= order:
            g = math.gcd(aj, q)
            # adding the whole subgroup g*Z_q fills every class mod g that nxt touches
            classes = nxt.reshape(q // g, g).any(axis=0)
            cur = np.tile(classes, q // g)
        else:
            for xv in range(B + 1):
                cur |= np.roll(nxt, (aj * xv) % q)
        reach[j] = cur
    z = np.arange(q, dtype=np.int64)
    targets = np.zeros(q, dtype=bool)
    targets[((p % q) * ((z * z) % q) - r) % q] = True
    if not np.any(targets & reach[0]):
        return None
    x = []
    for j in range(d):
        aj = a[j] % q
        nxt = reach[j + 1]
        tgt = np.flatnonzero(targets)
        for xv in range(B + 1):
            shifted = (tgt - aj * xv) % q
            ok = nxt[shifted]
            if ok.any():
                x.append(xv)
                new_t = np.zeros(q, dtype=bool)
                new_t[shifted[ok]] = True
                targets = new_t
                break
        else:
            raise VerificationError("reachable target lost during backtrack")
    total = (sum(ai * xi for ai, xi in zip(a, x)) + r) % q
    zs = np.flatnonzero(((p % q) * ((z * z) % q)) % q == total)
    return CongruenceSolution(tuple(x), int(zs[0]), box_bound, inst)
