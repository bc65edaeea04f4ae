"""Numerical kernels: quadratic Weyl sums, smooth bumps, Poisson summation, divisor witnesses."""

from .bump import (
    BumpFunction,
    BumpSpec,
    bump_build,
    bump_eval,
    bump_fourier,
    poisson_check,
    tail_bound_check,
)
from .divisors import divisor_count, divisor_sweep, divisor_witness
from .weyl import WeylInstance, weyl_audit_corpus, weyl_bound_ratio, weyl_sum, weyl_sum_reference

__all__ = [
    "BumpFunction",
    "BumpSpec",
    "WeylInstance",
    "bump_build",
    "bump_eval",
    "bump_fourier",
    "divisor_count",
    "divisor_sweep",
    "divisor_witness",
    "poisson_check",
    "tail_bound_check",
    "weyl_audit_corpus",
    "weyl_bound_ratio",
    "weyl_sum",
    "weyl_sum_reference",
]
