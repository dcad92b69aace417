"""
Momentum-space coins, band flatness and the localization scan.

Random coins are drawn from ``numpy.random.default_rng(seed)`` (PCG64); the
draw order per coin is part of the reproducibility contract:

- ``off-diagonal``: angles ``beta, gamma`` uniform in [0, 2pi), coin
  ``[[0, e^{i beta}], [e^{i gamma}, 0]]``.
- ``random-unitary``: ``u`` uniform in [0, 1) then ``alpha, psi, chi``
  uniform in [0, 2pi); with ``cos(theta) = sqrt(u)`` the coin is
  ``e^{i alpha} [[e^{i psi} cos, e^{i chi} sin], [-e^{-i chi} sin, e^{-i psi} cos]]``,
  which is Haar distributed on U(2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np

from .algebra import FLOAT, Mat2, eig_phase, is_unitary, named_coin, phi_star, split_coin
from .errors import NonUnitarySample
from .series import convergence_diagnostics, gamma_bar_direct
from .sojourn import MIDPOINT, gamma_table
from .walk import WalkConfig, averaged_return_probability, evolve_xi

__all__ = [
    "FLAT_TOL",
    "OFF_DIAGONAL",
    "RANDOM_UNITARY",
    "fourier_coin",
    "eigenvalues2",
    "SpectrumSample",
    "spectrum",
    "flatness_scan",
    "sample_coins",
    "ScanReport",
    "conjecture_scan",
]

FLAT_TOL = 1e-9
OFF_DIAGONAL = "off-diagonal"
RANDOM_UNITARY = "random-unitary"


def fourier_coin(u: Mat2, k: float) -> Mat2:
    """Momentum-space coin ``diag(e^{-ik}, e^{ik}) . U`` (float backend)."""
    split_coin(u)
    uf = u.to_float()
    em, ep = cmath.exp(-1j * k), cmath.exp(1j * k)
    return Mat2(em * uf.a, em * uf.b, ep * uf.c, ep * uf.d)


def eigenvalues2(m: Mat2) -> tuple[complex, complex]:
    """Roots of ``x^2 - tr(M) x + det(M)``, sorted by principal argument."""
    mf = m.to_float()
    tr = mf.a + mf.d
    det = mf.a * mf.d - mf.b * mf.c
    disc = cmath.sqrt(tr * tr - 4 * det)
    l1, l2 = (tr + disc) / 2, (tr - disc) / 2
    return tuple(sorted((l1, l2), key=eig_phase))  # type: ignore[return-value]


@dataclass(frozen=True)
class SpectrumSample:
    momenta: np.ndarray
    bands: np.ndarray  # shape (M, 2), each row sorted by principal argument


def spectrum(u: Mat2, grid: int) -> SpectrumSample:
    ks = 2 * math.pi * np.arange(grid) / grid
    bands = np.array([eigenvalues2(fourier_coin(u, float(k))) for k in ks])
    return SpectrumSample(ks, bands)


def flatness_scan(u: Mat2, grid: int = 1024, tol: float = FLAT_TOL) -> tuple[bool, float]:
    """
    Test whether both eigenvalue bands of the momentum-space coin are flat.

    Returns ``(flat, max_deviation)`` where the deviation is the largest
    ``|lambda_b(k) - lambda_b(0)|`` over the grid and both bands.
    """
    if grid < 16:
        raise ValueError("grid must have at least 16 points")
    bands = spectrum(u, grid).bands
    dev = float(np.max(np.abs(bands - bands[0])))
    return dev < tol, dev


def _off_diagonal(rng: np.random.Generator) -> Mat2:
    beta, gamma = rng.uniform(0.0, 2 * math.pi, size=2)
    return Mat2(0j, cmath.exp(1j * beta), cmath.exp(1j * gamma), 0j)


def _haar_unitary(rng: np.random.Generator) -> Mat2:
    u = rng.uniform(0.0, 1.0)
    alpha, psi, chi = rng.uniform(0.0, 2 * math.pi, size=3)
    c, s = math.sqrt(u), math.sqrt(1.0 - u)
    g = cmath.exp(1j * alpha)
    return Mat2(
        g * cmath.exp(1j * psi) * c,
        g * cmath.exp(1j * chi) * s,
        -g * cmath.exp(-1j * chi) * s,
        g * cmath.exp(-1j * psi) * c,
    )


def sample_coins(family: str, count: int, seed: int, names=None) -> list[tuple[str, Mat2]]:
    """
    Draw ``count`` coins of a family; returns ``[(label, coin), ...]``.

    ``family`` is ``"off-diagonal"``, ``"random-unitary"`` or ``"named"``
    (with ``names`` a list such as ``["grover", "hadamard"]``; ``count`` is
    then ignored).
    """
    if family == "named":
        return [(n, named_coin(n, FLOAT)) for n in (names or ["grover", "hadamard"])]
    rng = np.random.default_rng(seed)
    if family == OFF_DIAGONAL:
        draw = _off_diagonal
    elif family == RANDOM_UNITARY:
        draw = _haar_unitary
    else:
        raise ValueError(f"unknown coin family {family!r}")
    coins = []
    for i in range(count):
        c = draw(rng)
        if not is_unitary(c):
            raise NonUnitarySample(f"sample {i} of {family} is not unitary")
        coins.append((f"{family}#{i}", c))
    return coins


@dataclass(frozen=True)
class ScanReport:
    """One coin's row of the localization scan."""

    index: int
    label: str
    coin: tuple
    flat_band: bool
    max_deviation: float
    decay_class: str
    divergent: bool
    averaged_return: float

    @property
    def conjecture_consistent(self) -> bool:
        return (not self.divergent) or self.flat_band

    @property
    def counterexample_candidate(self) -> bool:
        return not self.conjecture_consistent

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coin"] = [list(pair) for pair in self.coin]
        d["conjecture_consistent"] = self.conjecture_consistent
        d["counterexample_candidate"] = self.counterexample_candidate
        return d


def scan_coin(
    index: int,
    label: str,
    coin: Mat2,
    n_max: int = 100,
    grid: int = 1024,
    horizon: int = 200,
    convention: str = MIDPOINT,
) -> ScanReport:
    coin = coin.to_float()
    n_even = n_max - n_max % 2
    gamma = gamma_table(coin, n_even, convention)
    diag = convergence_diagnostics(gamma_bar_direct(gamma, (n_even, n_even)), [(1, 1)])
    flat, dev = flatness_scan(coin, grid)
    table = evolve_xi(WalkConfig(coin, phi_star(FLOAT), horizon))
    ret = averaged_return_probability(table, phi_star(FLOAT), horizon)
    return ScanReport(
        index=index,
        label=label,
        coin=tuple((complex(x).real, complex(x).imag) for x in coin),
        flat_band=flat,
        max_deviation=dev,
        decay_class=diag.decay_class,
        divergent=diag.divergent(0),
        averaged_return=float(ret),
    )


def conjecture_scan(
    family: str,
    count: int,
    seed: int,
    n_max: int = 100,
    *,
    names=None,
    grid: int = 1024,
    horizon: int = 200,
    convention: str = MIDPOINT,
) -> list[ScanReport]:
    """
    Evidence scan linking sojourn-series divergence to flat bands.

    For each sampled coin: Gamma up to ``n_max`` (float backend), its series
    diagnostics at ``(z, t) = (1, 1)``, band flatness on ``grid`` momenta and
    the averaged return probability up to ``horizon``. Rows come back in
    sample order; a coin whose sojourn series diverges on a dispersive band is
    flagged as a counterexample candidate, never silently dropped.
    """
    return [
        scan_coin(i, label, coin, n_max, grid, horizon, convention)
        for i, (label, coin) in enumerate(sample_coins(family, count, seed, names))
    ]
