"""Smooth bump built from iterated box convolutions, Poisson summation and a tail bound.

f is the indicator of [M + dN/2, M + N - dN/2] convolved with J normalised
boxes of half-widths dN*2^(-j-1) (j = 1..J, the last one adjusted so the
half-widths add up to dN/2). Its Fourier transform is therefore an exact
product of sinc factors, while pointwise values come from a fine grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import VerificationError

J_FACTORS = 40
GRID_LOG2 = 20


@dataclass(frozen=True)
class BumpSpec:
    M: float
    N: float
    delta: float

    def __post_init__(self) -> None:
        if not 0 < self.delta < 1 / 16:
            raise ValueError("delta must lie in (0, 1/16)")
        if not self.N > 0:
            raise ValueError("N must be positive")

    def to_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "delta": self.delta}


@dataclass
class BumpFunction:
    spec: BumpSpec
    base: tuple[float, float]
    half_widths: np.ndarray
    grid_x: np.ndarray = field(repr=False)
    grid_f: np.ndarray = field(repr=False)

    @property
    def base_length(self) -> float:
        return self.base[1] - self.base[0]

    @property
    def f_hat0(self) -> float:
        return self.base_length


def _half_widths(spec: BumpSpec) -> np.ndarray:
    dn = spec.delta * spec.N
    hw = np.array([dn * 2.0 ** (-j - 1) for j in range(1, J_FACTORS + 1)])
    hw[-1] = dn * 2.0 ** (-J_FACTORS)
    return hw


def _box_filter(x0: float, h: float, g: np.ndarray, hw: float) -> np.ndarray:
    """Average of the piecewise-linear interpolant of g over [x - hw, x + hw] at every node."""
    n = g.size
    F = np.concatenate(([0.0], np.cumsum(0.5 * h * (g[:-1] + g[1:]))))

    def antideriv(y: np.ndarray) -> np.ndarray:
        s = (y - x0) / h
        i = np.clip(np.floor(s).astype(np.int64), 0, n - 2)
        frac = np.clip(s - i, 0.0, 1.0)
        local = h * (g[i] * frac + 0.5 * (g[i + 1] - g[i]) * frac * frac)
        return F[i] + local

    x = x0 + h * np.arange(n)
    return (antideriv(x + hw) - antideriv(x - hw)) / (2 * hw)


def bump_build(spec: BumpSpec, grid_log2: int = GRID_LOG2) -> BumpFunction:
    if grid_log2 < 14:
        raise ValueError("grid must have at least 2**14 points")
    M, N, dl = spec.M, spec.N, spec.delta
    hw = _half_widths(spec)
    base = (M + dl * N / 2, M + N - dl * N / 2)
    if not math.isclose(2 * hw.sum() + (base[1] - base[0]), N, rel_tol=1e-12):
        raise VerificationError("support budget does not add up to N")
    G = 1 << grid_log2
    h = N / G
    x = M + h * np.arange(G + 1)
    # the base box convolved with the first kernel is a trapezoid
    w1 = hw[0]
    up = (x - (base[0] - w1)) / (2 * w1)
    down = ((base[1] + w1) - x) / (2 * w1)
    g = np.clip(np.minimum(up, down), 0.0, 1.0)
    sub_var = 0.0
    for w in hw[1:]:
        if w >= h:
            g = _box_filter(M, h, g, float(w))
        else:
            sub_var += w * w / 3.0
    if sub_var:
        # kernels narrower than one cell: second-order (variance) correction
        lap = np.zeros_like(g)
        lap[1:-1] = g[2:] - 2 * g[1:-1] + g[:-2]
        g = g + 0.5 * sub_var * lap / (h * h)
    g[0] = g[-1] = 0.0
    g = np.clip(g, 0.0, 1.0)
    g.setflags(write=False)
    return BumpFunction(spec, base, hw, x, g)


def bump_eval(f: BumpFunction, x):
    """f(x) by linear interpolation on the grid; zero outside [M, M+N]."""
    xs = np.asarray(x, dtype=np.float64)
    out = np.interp(xs, f.grid_x, f.grid_f, left=0.0, right=0.0)
    return float(out) if out.ndim == 0 else out


def bump_fourier(f: BumpFunction, lam):
    """Closed-form f_hat(lambda) = int f(x) e(-lambda x) dx."""
    lam = np.asarray(lam, dtype=np.float64)
    L = f.base_length
    centre = f.spec.M + f.spec.N / 2
    val = L * np.sinc(lam * L)
    for w in f.half_widths:
        val = val * np.sinc(2 * w * lam)
    out = val * np.exp(-2j * np.pi * ((lam * centre) % 1.0))
    return complex(out) if out.ndim == 0 else out


def fourier_abs_bound(f: BumpFunction, lam: float) -> float:
    """Upper bound for |f_hat(lambda)| using |sinc(u)| <= min(1, 1/(pi|u|))."""
    lam = abs(lam)
    if lam == 0:
        return f.base_length
    L = f.base_length
    b = L * min(1.0, 1.0 / (math.pi * lam * L))
    for w in f.half_widths:
        b *= min(1.0, 1.0 / (math.pi * lam * 2 * w))
    return b


def _fourier_cutoff(f: BumpFunction, T: float, tol: float) -> int:
    """M0 with sum_{|m| > M0} |f_hat(m/T)| / T <= tol.

    Past M0, at least K >= 2 sinc factors decay like 1/|m|, so the tail is at
    most 2/T * B(M0/T) * M0 / (K - 1), B being the pointwise bound.
    """
    m0 = 16
    while True:
        lam0 = m0 / T
        K = 1 + int(np.sum(math.pi * lam0 * 2 * f.half_widths >= 1.0))
        if math.pi * lam0 * f.base_length < 1.0:
            K -= 1
        if K >= 2:
            tail = 2.0 / T * fourier_abs_bound(f, lam0) * m0 / (K - 1)
            if tail <= tol:
                return m0
        m0 *= 2
        if m0 > 1 << 26:
            raise RuntimeError("Fourier truncation did not converge")


@dataclass(frozen=True)
class PoissonResult:
    T: float
    t: float
    lhs: float
    rhs: float
    diff: float
    terms: int

    def to_dict(self) -> dict:
        return {"T": self.T, "t": self.t, "lhs": self.lhs, "rhs": self.rhs, "diff": self.diff, "terms": self.terms}


def poisson_check(f: BumpFunction, T: float, t: float, tol: float = 1e-9) -> PoissonResult:
    """Compare sum_n f(t + nT) with (1/T) sum_m f_hat(m/T) e(mt/T)."""
    if not T > 0:
        raise ValueError("T must be positive")
    M, N = f.spec.M, f.spec.N
    lo = math.ceil((M - t) / T)
    hi = math.floor((M + N - t) / T)
    ns = np.arange(lo, hi + 1, dtype=np.float64)
    lhs = math.fsum(np.atleast_1d(bump_eval(f, t + ns * T)).tolist()) if ns.size else 0.0
    m0 = _fourier_cutoff(f, T, 0.1 * tol * f.f_hat0)
    m = np.arange(1, m0 + 1, dtype=np.float64)
    lam = m / T
    L = f.base_length
    mag = L * np.sinc(lam * L)
    for w in f.half_widths:
        mag = mag * np.sinc(2 * w * lam)
    centre = M + N / 2
    phase = (m * ((t - centre) / T)) % 1.0
    terms = mag * np.cos(2 * np.pi * phase)
    rhs = (f.f_hat0 + 2.0 * math.fsum(terms.tolist())) / T
    return PoissonResult(T, t, lhs, rhs, abs(lhs - rhs), int(2 * m0 + 1))


def tail_bound_check(x: float, k0: int) -> tuple[float, float]:
    """sum_{|k| >= k0} exp(-sqrt(x|k|)) against (20/x) exp(-sqrt(x k0)/2)."""
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    if k0 < 1:
        raise ValueError("k0 must be positive")
    kmax = max(k0, math.ceil(math.log(1e18) ** 2 / x))
    parts = []
    step = 1 << 20
    for lo in range(k0, kmax + 1, step):
        k = np.arange(lo, min(kmax, lo + step - 1) + 1, dtype=np.float64)
        parts.append(math.fsum(np.exp(-np.sqrt(x * k)).tolist()))
    total = 2.0 * math.fsum(parts)
    bound = 20.0 / x * math.exp(-math.sqrt(x * k0) / 2)
    if total > bound:
        raise VerificationError(f"tail sum {total} exceeds bound {bound} at x={x}, k0={k0}")
    return total, bound
