"""Path-sum evolution of the walk and the resulting position distribution."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import EXACT, FLOAT, Mat2, Vec2, scalar_zero, split_coin
from .errors import ResourceLimit

__all__ = [
    "DEFAULT_CEILING",
    "step_ceiling",
    "check_ceiling",
    "WalkConfig",
    "AmplitudeTable",
    "evolve_xi",
    "position_distribution",
    "averaged_return_probability",
]

DEFAULT_CEILING = 10_000
_CEILING_ENV = "QWSOJOURN_MAX_STEPS"


def step_ceiling() -> int:
    """Largest admissible time horizon (overridable via QWSOJOURN_MAX_STEPS)."""
    raw = os.environ.get(_CEILING_ENV)
    return int(raw) if raw else DEFAULT_CEILING


def check_ceiling(n: int, ceiling: int | None = None) -> None:
    limit = step_ceiling() if ceiling is None else ceiling
    if n > limit:
        raise ResourceLimit(f"time horizon {n} exceeds the ceiling {limit}")


@dataclass(frozen=True)
class WalkConfig:
    """
    Coin, initial chirality state and time horizon of a walk.

    If either the coin or the state is on the float backend both are moved
    there. Unitarity and normalization are checked at construction.
    """

    coin: Mat2
    initial_state: Vec2
    max_time: int

    def __post_init__(self):
        if self.max_time < 0:
            raise ValueError("max_time must be nonnegative")
        if FLOAT in (self.coin.backend, self.initial_state.backend):
            object.__setattr__(self, "coin", self.coin.to_backend(FLOAT))
            object.__setattr__(self, "initial_state", self.initial_state.to_backend(FLOAT))
        split_coin(self.coin)
        self.initial_state.check_normalized()

    @property
    def backend(self) -> str:
        return self.coin.backend


class AmplitudeTable:
    """
    Dense per-time table of path sums Xi_n at positions x = -n, -n+2, ..., n.

    Slice ``n`` holds ``n + 1`` matrices; index ``j`` corresponds to position
    ``x = -n + 2j`` (``l = n - j`` left steps, ``m = j`` right steps).
    Exact tables store tuples of :class:`Mat2`; float tables store complex
    arrays of shape ``(n + 1, 2, 2)``.
    """

    def __init__(self, backend: str, slices: list):
        self.backend = backend
        self._slices = slices

    @property
    def max_time(self) -> int:
        return len(self._slices) - 1

    def positions(self, n: int) -> range:
        return range(-n, n + 1, 2)

    def xi(self, n: int, x: int) -> Mat2:
        """Path sum at time ``n`` and position ``x`` (zero matrix off the lattice)."""
        if n < 0 or n > self.max_time or abs(x) > n or (n - x) % 2:
            return Mat2.zeros(self.backend)
        j = (x + n) // 2
        s = self._slices[n]
        if self.backend == EXACT:
            return s[j]
        return Mat2.from_array(s[j])

    def xi_lm(self, n: int, l: int, m: int) -> Mat2:
        if l + m != n:
            raise ValueError("need l + m == n")
        return self.xi(n, m - l)

    def slice(self, n: int) -> dict[int, Mat2]:
        return {x: self.xi(n, x) for x in self.positions(n)}

    def raw_slice(self, n: int):
        return self._slices[n]


def evolve_xi(config: WalkConfig, ceiling: int | None = None) -> AmplitudeTable:
    """
    Fill the path-sum table for times ``0..N``.

    Uses Xi_{n+1}(l, m) = P Xi_n(l-1, m) + Q Xi_n(l, m-1) with Xi_0(0, 0) = I
    and zero outside the lattice; the newest step multiplies on the left.
    """
    n_max = config.max_time
    check_ceiling(n_max, ceiling)
    p, q = split_coin(config.coin)
    if config.backend == EXACT:
        slices: list = [(Mat2.identity(EXACT),)]
        zero = Mat2.zeros(EXACT)
        for n in range(n_max):
            prev = slices[-1]
            new = []
            for j in range(n + 2):
                # position -(n+1) + 2j is reached by a left step from j, a right step from j-1
                left = p @ prev[j] if j <= n and prev[j] else zero
                right = q @ prev[j - 1] if j >= 1 and prev[j - 1] else zero
                new.append(left + right if (left and right) else (left or right))
            slices.append(tuple(new))
        return AmplitudeTable(EXACT, slices)

    pa, qa = p.to_array(), q.to_array()
    slices = [np.eye(2, dtype=np.complex128)[None, :, :]]
    for n in range(n_max):
        prev = slices[-1]
        new = np.zeros((n + 2, 2, 2), dtype=np.complex128)
        new[: n + 1] += pa @ prev
        new[1:] += qa @ prev
        slices.append(new)
    return AmplitudeTable(FLOAT, slices)


def _state_for(table: AmplitudeTable, phi: Vec2) -> Vec2:
    if table.backend == FLOAT and phi.backend == EXACT:
        return phi.to_backend(FLOAT)
    return phi


def position_distribution(table: AmplitudeTable, phi: Vec2, n: int) -> list[tuple[int, object]]:
    """
    Return ``[(x, P(X_n = x)), ...]`` over the support ``-n, -n+2, ..., n``.

    Probabilities are exact reals (``ExactComplex``) for the exact backend and
    floats otherwise.
    """
    if n > table.max_time:
        raise ValueError(f"time {n} beyond table horizon {table.max_time}")
    phi = _state_for(table, phi)
    if table.backend == EXACT:
        return [(x, (table.xi(n, x) @ phi).norm2()) for x in table.positions(n)]
    amps = table.raw_slice(n) @ phi.to_array()
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    return [(x, float(p)) for x, p in zip(table.positions(n), probs)]


def _return_probability(table: AmplitudeTable, phi: Vec2, n: int):
    if n % 2:
        return 0
    if table.backend == EXACT:
        return (table.xi(n, 0) @ phi).norm2()
    amp = table.raw_slice(n)[n // 2] @ phi.to_array()
    return float(np.sum(np.abs(amp) ** 2))


def averaged_return_probability(table: AmplitudeTable, phi: Vec2, horizon: int):
    """
    Time-averaged return probability (1/T) * sum_{n=1..T} P(X_n = 0).

    Exact tables give an exact real; float tables give a float.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if horizon > table.max_time:
        raise ValueError(f"horizon {horizon} beyond table horizon {table.max_time}")
    phi = _state_for(table, phi)
    start = scalar_zero(EXACT) if table.backend == EXACT else 0.0
    total = sum((_return_probability(table, phi, n) for n in range(1, horizon + 1)), start)
    if table.backend == EXACT:
        return total * Fraction(1, horizon)
    return total / horizon
