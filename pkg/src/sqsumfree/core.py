"""Shared types and exact integer helpers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator, Sequence

INT128_MAX = (1 << 127) - 1
INT128_MIN = -(1 << 127)


class BudgetExceeded(RuntimeError):
    """A configured work or memory budget would be exceeded."""


class VerificationError(AssertionError):
    """A certificate failed re-verification. Always a bug."""


def check_i128(value: int) -> int:
    """Return ``value`` unchanged, or raise if it leaves the signed 128-bit range."""
    if value > INT128_MAX or value < INT128_MIN:
        raise OverflowError(f"value {value} exceeds the signed 128-bit range")
    return value


def integer_sqrt(m: int) -> int:
    """Largest s with s*s <= m."""
    if m < 0:
        raise ValueError("integer_sqrt of a negative number")
    check_i128(m)
    return math.isqrt(m)


def is_perfect_square(m: int) -> bool:
    if m < 0:
        return False
    s = integer_sqrt(m)
    return s * s == m


def ceil_sqrt(m: int) -> int:
    """Smallest s >= 0 with s*s >= m (m may be negative)."""
    if m <= 0:
        return 0
    s = math.isqrt(m)
    return s if s * s == m else s + 1


def is_squarefree(m: int) -> bool:
    if m < 1:
        return False
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            return False
        if m % d == 0:
            m //= d
        d += 1
    return True


@dataclass(frozen=True)
class IntegerSet:
    """Finite set of distinct positive integers inside ``[1, universe_bound]``."""

    elements: tuple[int, ...]
    universe_bound: int

    def __post_init__(self) -> None:
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        if self.universe_bound < 1:
            raise ValueError("universe_bound must be positive")
        prev = 0
        for e in els:
            if e <= prev:
                raise ValueError("elements must be positive and strictly increasing")
            prev = e
        if els and els[-1] > self.universe_bound:
            raise ValueError("max element exceeds universe_bound")

    @classmethod
    def of(cls, values: Iterable[int], universe_bound: int | None = None) -> "IntegerSet":
        els = tuple(sorted(set(int(v) for v in values)))
        if universe_bound is None:
            universe_bound = els[-1] if els else 1
        return cls(els, universe_bound)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, value: object) -> bool:
        return value in set(self.elements)

    @property
    def total(self) -> int:
        return check_i128(sum(self.elements))


@dataclass(frozen=True)
class Gap:
    """Generalized arithmetic progression ``{offset + sum x_i * steps[i] : 0 <= x_i <= sizes[i]}``."""

    offset: int
    steps: tuple[int, ...]
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(int(s) for s in self.steps))
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if len(self.steps) != len(self.sizes) or not self.steps:
            raise ValueError("rank must be >= 1 and steps/sizes must have equal length")
        if any(s == 0 for s in self.steps):
            raise ValueError("steps must be nonzero")
        if any(L < 0 for L in self.sizes):
            raise ValueError("sizes must be nonnegative")
        check_i128(self.offset)
        check_i128(self.min_element())
        check_i128(self.max_element())

    @property
    def rank(self) -> int:
        return len(self.steps)

    @property
    def volume(self) -> int:
        """Number of coordinate tuples, an upper bound on the element count."""
        return math.prod(L + 1 for L in self.sizes)

    @property
    def is_homogeneous(self) -> bool:
        return self.offset == 0

    @property
    def is_positive(self) -> bool:
        return all(s > 0 for s in self.steps)

    def min_element(self) -> int:
        return self.offset + sum(s * L for s, L in zip(self.steps, self.sizes) if s < 0)

    def max_element(self) -> int:
        return self.offset + sum(s * L for s, L in zip(self.steps, self.sizes) if s > 0)

    def value(self, coords: Sequence[int]) -> int:
        if len(coords) != self.rank:
            raise ValueError("coordinate length does not match rank")
        for x, L in zip(coords, self.sizes):
            if not 0 <= x <= L:
                raise ValueError("coordinate out of range")
        return check_i128(self.offset + sum(x * s for x, s in zip(coords, self.steps)))

    def enumerate(self, budget: int = 10**7) -> list[int]:
        """All values with multiplicity, in coordinate order (last coordinate fastest)."""
        if self.volume > budget:
            raise BudgetExceeded(f"GAP volume {self.volume} exceeds budget {budget}")
        values = [self.offset]
        for s, L in zip(self.steps, self.sizes):
            values = [v + x * s for v in values for x in range(L + 1)]
        return values

    def element_set(self, budget: int = 10**7) -> set[int]:
        return set(self.enumerate(budget))

    def to_dict(self) -> dict:
        return {"offset": self.offset, "steps": list(self.steps), "sizes": list(self.sizes)}

    @classmethod
    def from_dict(cls, d: dict) -> "Gap":
        return cls(int(d["offset"]), tuple(d["steps"]), tuple(d["sizes"]))


@dataclass(frozen=True)
class SolverConfig:
    """Numeric constants left as "sufficiently large" in the theory, plus work budgets."""

    c: float = 2.0
    h: int = 8
    D: int = 3
    C: float = 12.0
    tol: float = 1e-9
    seed: int = 0
    sum_budget_bits: int = 1 << 32
    enum_budget: int = 10**7
    kappa: float = 100.0
    prefix_exponent: float = 2.0 / 3.0
    sf_max_n: int = 60
    sf_node_budget: int = 50_000_000
    argmax_exact_budget: int = 5000

    def __post_init__(self) -> None:
        if not self.c > 1:
            raise ValueError("growth constant c must exceed 1")
        if self.h < 1 or self.D < 1:
            raise ValueError("h and D must be positive integers")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not 0 < self.tol <= 1e-6:
            raise ValueError("tol must lie in (0, 1e-6]")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.kappa <= 0 or not 0 < self.prefix_exponent < 1:
            raise ValueError("kappa must be positive and prefix_exponent in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


DEFAULT_CONFIG = SolverConfig()


@dataclass
class SearchStats:
    nodes: int = 0
    ms: float = 0.0
    extra: dict = field(default_factory=dict)
