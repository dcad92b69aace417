"""
Exhaustive ground truth by enumerating every step sequence.

Each of the 2**n sequences is multiplied out directly (newest factor on the
left) and aggregated in a fixed order, so the exact backend gives the same
tables regardless of how the enumeration is scheduled. This module is the
arbiter the dynamic-programming modules are tested against; it is also
exposed on the command line through ``--oracle``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Mat2, split_coin
from .errors import ResourceLimit
from .sojourn import ENDPOINT, MIDPOINT

__all__ = [
    "ORACLE_MAX_STEPS",
    "PathRecord",
    "enumerate_paths",
    "OracleSlice",
    "oracle_tables",
    "excursion_weight",
]

ORACLE_MAX_STEPS = 20


def _interval_right(convention: str, before: int, after: int) -> int:
    # kept separate from the DP's rule so the oracle does not share its code path
    if convention == MIDPOINT:
        return 1 if before + after > 0 else 0
    if convention == ENDPOINT:
        return 1 if after > 0 else 0
    raise ValueError(f"unknown sojourn convention {convention!r}")


@dataclass(frozen=True)
class PathRecord:
    steps: tuple[str, ...]
    positions: tuple[int, ...]
    weight: Mat2
    sojourn: int


def enumerate_paths(coin: Mat2, n: int, start: int = 0, convention: str = MIDPOINT) -> list[PathRecord]:
    """
    List all ``2**n`` paths of length ``n`` from ``start``.

    Sequences are produced in lexicographic order of their step letters
    (``"L" < "R"``).

    Raises
    ------
    ResourceLimit
        If ``n`` exceeds :data:`ORACLE_MAX_STEPS`.
    """
    if n > ORACLE_MAX_STEPS:
        raise ResourceLimit(f"oracle enumeration limited to n <= {ORACLE_MAX_STEPS}, got {n}")
    p, q = split_coin(coin)
    records: list[PathRecord] = []

    # depth-first with L before R; prefix products are shared between siblings
    def walk(steps, positions, weight, k):
        if len(steps) == n:
            records.append(PathRecord(tuple(steps), tuple(positions), weight, k))
            return
        x = positions[-1]
        for s, factor, nxt in (("L", p, x - 1), ("R", q, x + 1)):
            steps.append(s)
            positions.append(nxt)
            walk(steps, positions, factor @ weight, k + _interval_right(convention, x, nxt))
            steps.pop()
            positions.pop()

    walk([], [start], Mat2.identity(coin.backend), 0)
    return records


def _accumulate(table: dict, key, w: Mat2) -> None:
    cur = table.get(key)
    table[key] = w if cur is None else cur + w


def _prune(table: dict) -> dict:
    return {key: w for key, w in table.items() if w}


@dataclass
class OracleSlice:
    """
    Aggregated time-``n`` tables from the enumeration.

    ``xi`` maps endpoint to the unconstrained path sum, ``gamma`` maps sojourn
    count to the return weight (``start == 0`` only), ``psi`` maps
    ``(endpoint, sojourn)`` to weight, and ``f_plus``/``f_minus`` are the
    one-sided first-return excursion weights. Zero entries are omitted.
    """

    n: int
    start: int
    xi: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    psi: dict = field(default_factory=dict)
    f_plus: Mat2 | None = None
    f_minus: Mat2 | None = None


def oracle_tables(coin: Mat2, n: int, convention: str = MIDPOINT, start: int = 0) -> OracleSlice:
    records = enumerate_paths(coin, n, start, convention)
    zero = Mat2.zeros(coin.backend)
    xi: dict = {}
    gamma: dict = {}
    psi: dict = {}
    f_plus, f_minus = zero, zero
    for rec in records:
        end = rec.positions[-1]
        _accumulate(xi, end, rec.weight)
        _accumulate(psi, (end, rec.sojourn), rec.weight)
        if start == 0 and end == 0:
            _accumulate(gamma, rec.sojourn, rec.weight)
            inner = rec.positions[1:-1]
            if n >= 2 and all(y > 0 for y in inner):
                f_plus = f_plus + rec.weight
            if n >= 2 and all(y < 0 for y in inner):
                f_minus = f_minus + rec.weight
    return OracleSlice(
        n=n,
        start=start,
        xi=_prune(xi),
        gamma=_prune(gamma),
        psi=_prune(psi),
        f_plus=f_plus,
        f_minus=f_minus,
    )


def excursion_weight(coin: Mat2, n: int, side: int) -> Mat2:
    """
    Summed weight of the length-``n`` paths 0 -> 0 staying strictly on one side.

    ``side > 0`` keeps every intermediate position positive, ``side < 0``
    negative. Only those paths are visited (a Catalan number of them rather
    than ``2**n``), each multiplied out step by step, so long excursions stay
    cheap to enumerate. Raises ResourceLimit beyond :data:`ORACLE_MAX_STEPS`.
    """
    if n > ORACLE_MAX_STEPS:
        raise ResourceLimit(f"oracle enumeration limited to n <= {ORACLE_MAX_STEPS}, got {n}")
    p, q = split_coin(coin)
    sign = 1 if side > 0 else -1
    total = Mat2.zeros(coin.backend)
    if n < 2 or n % 2:
        return total
    found: list[Mat2] = []

    def walk(x: int, depth: int, weight: Mat2) -> None:
        if depth == n:
            if x == 0:
                found.append(weight)
            return
        for factor, nxt in ((p, x - 1), (q, x + 1)):
            last = depth + 1 == n
            if (nxt == 0) != last or nxt * sign < 0 or abs(nxt) > n - depth - 1:
                continue
            walk(nxt, depth + 1, factor @ weight)

    walk(0, 0, Mat2.identity(coin.backend))
    for w in found:
        total = total + w
    return total

