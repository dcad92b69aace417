"""
Exact path-sum and sojourn-time toolkit for two-state discrete-time quantum
walks on the integer line.

Exact arithmetic runs over Q(i, sqrt2); every computation also has a
complex-float backend. See :mod:`qwsojourn.cli` for the command line.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .algebra import (
    EXACT,
    FLOAT,
    CoinBasis,
    ExactComplex,
    Mat2,
    Vec2,
    build_basis,
    decompose,
    grover,
    hadamard,
    identity_coin,
    named_coin,
    phi_star,
    reconstruct,
    split_coin,
)
from .errors import (
    DegenerateBasis,
    InsufficientOrder,
    NonNilpotentConstantTerm,
    NonUnitaryCoin,
    NonUnitarySample,
    NotInField,
    NotNormalized,
    QWSojournError,
    ResourceLimit,
    TruncationOverflow,
)
from .oracle import enumerate_paths, oracle_tables
from .series import (
    BiSeries,
    build_X,
    convergence_diagnostics,
    gamma_bar_direct,
    neumann_inverse_times,
    series_from_table,
    symmetrize,
)
from .sojourn import (
    ENDPOINT,
    MIDPOINT,
    decompose_psi,
    first_return_excursions,
    gamma_table,
    psi_table,
    verify_renewal,
)
from .spectral import conjecture_scan, flatness_scan, fourier_coin, sample_coins
from .walk import WalkConfig, averaged_return_probability, evolve_xi, position_distribution

__all__ = [
    "__version__",
    "EXACT", "FLOAT", "MIDPOINT", "ENDPOINT",
    "ExactComplex", "Mat2", "Vec2", "CoinBasis",
    "grover", "hadamard", "identity_coin", "named_coin", "phi_star",
    "split_coin", "build_basis", "decompose", "reconstruct",
    "WalkConfig", "evolve_xi", "position_distribution", "averaged_return_probability",
    "gamma_table", "psi_table", "decompose_psi", "first_return_excursions", "verify_renewal",
    "enumerate_paths", "oracle_tables",
    "BiSeries", "series_from_table", "symmetrize", "build_X", "neumann_inverse_times",
    "gamma_bar_direct", "convergence_diagnostics",
    "fourier_coin", "flatness_scan", "sample_coins", "conjecture_scan",
    "QWSojournError", "NonUnitaryCoin", "NonUnitarySample", "NotNormalized", "DegenerateBasis",
    "NotInField", "ResourceLimit", "TruncationOverflow", "NonNilpotentConstantTerm",
    "InsufficientOrder",
]
