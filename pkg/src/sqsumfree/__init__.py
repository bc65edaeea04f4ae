"""Square-sum-free sets of integers: exact extremal search, constructions and verified number-theory kernels."""

from .core import (
    DEFAULT_CONFIG,
    BudgetExceeded,
    Gap,
    IntegerSet,
    SolverConfig,
    VerificationError,
)
from .extremal import construct_example1, construct_example2, sf_bruteforce, sf_exact
from .sumset import first_square_with_witness, fixed_count_sums, ruzsa_cover, subset_sums

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG",
    "BudgetExceeded",
    "Gap",
    "IntegerSet",
    "SolverConfig",
    "VerificationError",
    "construct_example1",
    "construct_example2",
    "first_square_with_witness",
    "fixed_count_sums",
    "ruzsa_cover",
    "sf_bruteforce",
    "sf_exact",
    "subset_sums",
]
