"""
Sojourn-time weight tables.

A path of ``n`` unit steps spends ``k`` intervals to the right of the origin,
where interval ``[j-1, j]`` is classified by a :data:`SOJOURN_CONVENTIONS`
rule:

- ``midpoint`` (default): right iff ``x[j-1] + x[j] > 0``. For unit steps
  the sum is odd, so every interval is classified.
- ``endpoint``: right iff ``x[j] > 0``.

The tables are matrix-valued: each path contributes the time-ordered product
of its split-coin factors with the newest step on the left. They are filled
by dynamic programming over ``(position, sojourn count)``; the exact backend
keeps only nonzero states in a dict, the float backend uses dense numpy
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import EXACT, CoinBasis, Mat2, decompose, scalar_zero, split_coin
from .walk import check_ceiling

__all__ = [
    "MIDPOINT",
    "ENDPOINT",
    "SOJOURN_CONVENTIONS",
    "counts_right",
    "GammaTable",
    "PsiTable",
    "ExcursionSequences",
    "RenewalReport",
    "gamma_table",
    "psi_table",
    "decompose_psi",
    "first_return_excursions",
    "verify_renewal",
]

MIDPOINT = "midpoint"
ENDPOINT = "endpoint"
SOJOURN_CONVENTIONS = (MIDPOINT, ENDPOINT)


def counts_right(convention: str, src: int, dst: int) -> int:
    """1 if the unit interval from ``src`` to ``dst`` counts as right of 0."""
    if convention == MIDPOINT:
        return int(src + dst > 0)
    if convention == ENDPOINT:
        return int(dst > 0)
    raise ValueError(f"unknown sojourn convention {convention!r}")


def _check_convention(convention: str) -> None:
    if convention not in SOJOURN_CONVENTIONS:
        raise ValueError(
            f"unknown sojourn convention {convention!r}; expected one of {SOJOURN_CONVENTIONS}"
        )


# dynamic-programming kernels ------------------------------------------------


def _exact_dp(p: Mat2, q: Mat2, start: int, n_max: int, convention: str, prune: bool):
    """Yield ``(n, {(x, k): weight})`` for n = 0..n_max (nonzero states only)."""
    state = {(start, 0): Mat2.identity(p.backend)}
    yield 0, state
    for n in range(n_max):
        remaining = n_max - n - 1
        new: dict = {}
        for (x, k), w in state.items():
            for dst, m in ((x - 1, p), (x + 1, q)):
                if prune and abs(dst) > remaining:
                    continue
                v = m @ w
                if not v:
                    continue
                key = (dst, k + counts_right(convention, x, dst))
                cur = new.get(key)
                new[key] = v if cur is None else cur + v
        state = {key: v for key, v in new.items() if v}
        yield n + 1, state


def _left_mul(m: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``m @ w`` for a 2x2 ``m`` and a stack ``w`` of shape (..., 2, 2)."""
    out = np.empty_like(w)
    w0, w1 = w[..., 0, :], w[..., 1, :]
    out[..., 0, :] = m[0, 0] * w0 + m[0, 1] * w1
    out[..., 1, :] = m[1, 0] * w0 + m[1, 1] * w1
    return out


def _float_dp(p: Mat2, q: Mat2, start: int, n_max: int, convention: str):
    """
    Yield ``(n, arr, offset)`` with ``arr[x + offset, k]`` the 2x2 weight.

    ``arr`` has shape ``(2*offset + 1, n_max + 1, 2, 2)``; a fresh array is
    yielded at every step. Only the reachable window (``|x - start| <= n``,
    ``k <= n``) is updated.
    """
    pa, qa = p.to_array(), q.to_array()
    offset = n_max + abs(start)
    xs = np.arange(-offset, offset + 1)
    arr = np.zeros((2 * offset + 1, n_max + 1, 2, 2), dtype=np.complex128)
    arr[start + offset, 0] = np.eye(2)
    # indexed by target position: left moves arrive from x + 1, right moves from x - 1
    lshift = np.array([counts_right(convention, x + 1, x) for x in xs], dtype=bool)
    rshift = np.array([counts_right(convention, x - 1, x) for x in xs], dtype=bool)
    yield 0, arr, offset
    for n in range(n_max):
        lo, hi = start + offset - n, start + offset + n + 1
        src = arr[lo:hi, : n + 1]
        new = np.zeros_like(arr)
        for prod, t0, shift in ((_left_mul(pa, src), lo - 1, lshift), (_left_mul(qa, src), lo + 1, rshift)):
            tgt = new[t0 : t0 + hi - lo]
            mask = shift[t0 : t0 + hi - lo]
            tgt[~mask, : n + 1] += prod[~mask]
            tgt[mask, 1 : n + 2] += prod[mask]
        arr = new
        yield n + 1, arr, offset


def _nonzero_mats(block: np.ndarray):
    """Yield ``(index, Mat2)`` for nonzero 2x2 blocks along the first axis."""
    mask = np.any(block != 0, axis=(-2, -1))
    for idx in np.flatnonzero(mask):
        yield int(idx), Mat2.from_array(block[idx])


# tables ---------------------------------------------------------------------


@dataclass
class GammaTable:
    """
    Return weights Gamma_n(k) for n = 0..max_time.

    Only nonzero matrices are stored; lookups of missing keys give the zero
    matrix. ``Gamma_0(0)`` is the identity.
    """

    backend: str
    max_time: int
    convention: str
    data: dict = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int]) -> Mat2:
        got = self.data.get(key)
        return got if got is not None else Mat2.zeros(self.backend)

    def row(self, n: int) -> dict[int, Mat2]:
        return {k: w for (m, k), w in self.data.items() if m == n}


@dataclass
class PsiTable:
    """
    Weights Psi_n^{x->y}(k) from a fixed start ``x``, plus the y-aggregate.

    ``data`` maps ``(n, y, k)`` to the weight (left empty if the table was
    built without endpoint resolution); ``aggregated`` maps ``(n, k)`` to
    Psi_n^x(k). Both omit zero matrices.
    """

    backend: str
    start: int
    max_time: int
    convention: str
    data: dict = field(default_factory=dict)
    aggregated: dict = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int, int]) -> Mat2:
        got = self.data.get(key)
        return got if got is not None else Mat2.zeros(self.backend)

    def total(self, n: int, k: int) -> Mat2:
        got = self.aggregated.get((n, k))
        return got if got is not None else Mat2.zeros(self.backend)


def gamma_table(
    coin: Mat2, n_max: int, convention: str = MIDPOINT, ceiling: int | None = None
) -> GammaTable:
    """
    Return weights Gamma_n(k) for all n <= n_max.

    Gamma_n(k) sums, over every length-``n`` step sequence that starts and
    ends at the origin with sojourn count ``k``, the time-ordered product of
    its coin factors. Intermediate returns are allowed.

    Raises
    ------
    ValueError
        If ``n_max`` is odd or negative.
    ResourceLimit
        If ``n_max`` exceeds the configured ceiling.
    """
    if n_max < 0 or n_max % 2:
        raise ValueError(f"gamma_table needs an even nonnegative horizon, got {n_max}")
    _check_convention(convention)
    check_ceiling(n_max, ceiling)
    p, q = split_coin(coin)
    table = GammaTable(coin.backend, n_max, convention)
    if coin.backend == EXACT:
        for n, state in _exact_dp(p, q, 0, n_max, convention, prune=True):
            if n % 2 == 0:
                for (x, k), w in state.items():
                    if x == 0:
                        table.data[(n, k)] = w
    else:
        for n, arr, off in _float_dp(p, q, 0, n_max, convention):
            if n % 2 == 0:
                for k, w in _nonzero_mats(arr[off]):
                    table.data[(n, k)] = w
    return table


def psi_table(
    coin: Mat2,
    start: int,
    n_max: int,
    convention: str = MIDPOINT,
    *,
    resolve_endpoints: bool = True,
    ceiling: int | None = None,
) -> PsiTable:
    """
    Weights of all paths from ``start`` split by endpoint and sojourn count.

    Sojourn intervals are classified relative to the origin, not to
    ``start``. With ``resolve_endpoints=False`` only the y-aggregated view is
    kept, which is what the generating functions need.
    """
    _check_convention(convention)
    check_ceiling(n_max, ceiling)
    p, q = split_coin(coin)
    table = PsiTable(coin.backend, start, n_max, convention)
    if coin.backend == EXACT:
        zero = Mat2.zeros(EXACT)
        for n, state in _exact_dp(p, q, start, n_max, convention, prune=False):
            agg: dict = {}
            for (y, k), w in state.items():
                if resolve_endpoints:
                    table.data[(n, y, k)] = w
                agg[k] = agg.get(k, zero) + w
            for k, w in agg.items():
                if w:
                    table.aggregated[(n, k)] = w
    else:
        for n, arr, off in _float_dp(p, q, start, n_max, convention):
            if resolve_endpoints:
                lo, hi = max(0, start - n + off), min(arr.shape[0], start + n + off + 1)
                for yi in range(lo, hi):
                    for k, w in _nonzero_mats(arr[yi]):
                        table.data[(n, yi - off, k)] = w
            for k, w in _nonzero_mats(arr.sum(axis=0)):
                table.aggregated[(n, k)] = w
    return table


def decompose_psi(table: PsiTable, basis: CoinBasis) -> dict[str, dict[tuple[int, int], object]]:
    """
    Coordinates p, q, r, s of each aggregated Psi_n^x(k) in ``basis``.

    Returns ``{"p": {(n, k): value}, "q": ..., "r": ..., "s": ...}`` with zero
    coefficients omitted.
    """
    out: dict[str, dict] = {"p": {}, "q": {}, "r": {}, "s": {}}
    for key in sorted(table.aggregated):
        coords = decompose(table.aggregated[key], basis)
        for name, val in zip("pqrs", coords):
            if val:
                out[name][key] = val
    return out


@dataclass
class ExcursionSequences:
    """
    One-sided first-return weights F+_{2r} and F-_{2r} for r = 1..max_time/2.

    F+ sums paths 0 -> 0 whose intermediate positions are all > 0, F- those
    whose intermediate positions are all < 0.
    """

    backend: str
    max_time: int
    plus: dict = field(default_factory=dict)
    minus: dict = field(default_factory=dict)

    @property
    def max_r(self) -> int:
        return self.max_time // 2


def _one_sided(p: Mat2, q: Mat2, n_max: int, side: int) -> dict[int, Mat2]:
    out_step, back_step = (q, p) if side > 0 else (p, q)
    zero = Mat2.zeros(p.backend)
    result = {r: zero for r in range(1, n_max // 2 + 1)}
    state = {side: out_step}
    for n in range(1, n_max):
        # close the excursion: one step from +-1 back to the origin
        if (n + 1) % 2 == 0 and side in state:
            result[(n + 1) // 2] = back_step @ state[side]
        remaining = n_max - n - 1
        new: dict = {}
        for x, w in state.items():
            for dst, m in ((x - 1, p), (x + 1, q)):
                if dst * side <= 0 or abs(dst) > remaining:
                    continue
                v = m @ w
                if not v:
                    continue
                cur = new.get(dst)
                new[dst] = v if cur is None else cur + v
        state = {x: v for x, v in new.items() if v}
    return result


def first_return_excursions(coin: Mat2, n_max: int, ceiling: int | None = None) -> ExcursionSequences:
    """Compute F+_{2r}, F-_{2r} for 2r <= n_max by a DP confined to one side."""
    if n_max < 0 or n_max % 2:
        raise ValueError(f"first_return_excursions needs an even horizon, got {n_max}")
    check_ceiling(n_max, ceiling)
    p, q = split_coin(coin)
    return ExcursionSequences(
        coin.backend, n_max, plus=_one_sided(p, q, n_max, +1), minus=_one_sided(p, q, n_max, -1)
    )


# renewal check --------------------------------------------------------------

RIGHT = "right"
LEFT = "left"


def _renewal_rhs(gamma: GammaTable, plus, minus, m: int, j: int, order: str) -> Mat2:
    acc = Mat2.zeros(gamma.backend)
    terms = [(gamma[(2 * m - 2 * r, 2 * j - 2 * r)], plus[r]) for r in range(1, j + 1)]
    terms += [(gamma[(2 * m - 2 * r, 2 * j)], minus[r]) for r in range(1, m - j + 1)]
    for g, f in terms:
        if g and f:
            acc = acc + (g @ f if order == RIGHT else f @ g)
    return acc


def _residual(a: Mat2, b: Mat2) -> tuple[float, bool]:
    d = a - b
    return (0.0, True) if not d else (d.frobenius(), False)


@dataclass
class RenewalReport:
    """
    Outcome of checking the first-return renewal recursion against Gamma.

    Residuals are Frobenius norms keyed by ``(n, k)`` for even ``n >= 2`` and
    even ``k <= n``. ``matching_order`` names the factor order(s) whose
    residuals are all exactly zero (exact backend) or below ``tol`` (float).

    The ``offdiag_*`` fields compare against base matrices of the shape
    alpha_r * [[0, 1], [0, 0]] (positive side) and alpha_r * [[0, 0], [-1, 0]]
    (negative side) with a free scalar alpha_r, fitted by least squares to the
    computed excursions. ``offdiag_base`` lists, per r, the fitted alpha_r and
    the smallest achievable mismatch; ``offdiag_max_residual`` is the worst
    recursion residual when those fitted matrices replace the excursions.
    ``literal_max_residual`` uses Gamma_{2r}(2r) and Gamma_{2r}(0) themselves
    (not first-return weights) as base quantities.
    """

    backend: str
    max_time: int
    convention: str
    tol: float
    residual_right: dict = field(default_factory=dict)
    residual_left: dict = field(default_factory=dict)
    exact_right: bool = True
    exact_left: bool = True
    offdiag_base: list = field(default_factory=list)
    offdiag_residual: dict = field(default_factory=dict)
    literal_residual: dict = field(default_factory=dict)

    @property
    def max_residual_right(self) -> float:
        return max(self.residual_right.values(), default=0.0)

    @property
    def max_residual_left(self) -> float:
        return max(self.residual_left.values(), default=0.0)

    @property
    def offdiag_max_residual(self) -> float:
        return max(self.offdiag_residual.values(), default=0.0)

    @property
    def literal_max_residual(self) -> float:
        return max(self.literal_residual.values(), default=0.0)

    @property
    def matching_order(self) -> str:
        if self.exact_right and self.exact_left:
            return "both"
        if self.exact_right:
            return RIGHT
        if self.exact_left:
            return LEFT
        return "none"

    def to_dict(self) -> dict:
        def keyed(d):
            return [{"n": n, "k": k, "residual": v} for (n, k), v in sorted(d.items())]

        return {
            "backend": self.backend,
            "max_time": self.max_time,
            "convention": self.convention,
            "tol": self.tol,
            "matching_order": self.matching_order,
            "max_residual_right": self.max_residual_right,
            "max_residual_left": self.max_residual_left,
            "residual_right": keyed(self.residual_right),
            "residual_left": keyed(self.residual_left),
            "offdiag_base": self.offdiag_base,
            "offdiag_max_residual": self.offdiag_max_residual,
            "offdiag_residual": keyed(self.offdiag_residual),
            "literal_max_residual": self.literal_max_residual,
            "literal_residual": keyed(self.literal_residual),
        }


def _fit_offdiag_scale(f_plus: Mat2, f_minus: Mat2):
    # minimise |F+ - a E12|^2 + |F- + a E21|^2 over complex a
    diff = f_plus.b - f_minus.c
    alpha = diff * Fraction(1, 2) if f_plus.backend == EXACT else diff / 2
    zero = scalar_zero(f_plus.backend)
    b_plus = Mat2(zero, alpha, zero, zero)
    b_minus = Mat2(zero, zero, -alpha, zero)
    mismatch = math.sqrt(float((f_plus - b_plus).frob2() + (f_minus - b_minus).frob2()))
    return alpha, b_plus, b_minus, mismatch


def verify_renewal(
    gamma: GammaTable, excursions: ExcursionSequences, tol: float = 1e-10
) -> RenewalReport:
    """
    Check Gamma_{2n}(2k) against its first-return decomposition.

    For each even time 2m and even count 2j the right-hand side is
    sum_{r=1..j} Gamma_{2m-2r}(2j-2r) . F+_{2r} + sum_{r=1..m-j} Gamma_{2m-2r}(2j) . F-_{2r}
    evaluated with the excursion factor on the right and, separately, on the
    left. A mismatch is reported, never raised.
    """
    n_max = min(gamma.max_time, excursions.max_time)
    exact = gamma.backend == EXACT
    rep = RenewalReport(gamma.backend, n_max, gamma.convention, tol)

    fits = {}
    for r in range(1, n_max // 2 + 1):
        alpha, bp, bm, mismatch = _fit_offdiag_scale(excursions.plus[r], excursions.minus[r])
        fits[r] = (bp, bm)
        rep.offdiag_base.append(
            {
                "r": r,
                "alpha_fit": [complex(alpha).real, complex(alpha).imag],
                "computed_plus": _mat_pairs(excursions.plus[r]),
                "computed_minus": _mat_pairs(excursions.minus[r]),
                "gamma_diag": _mat_pairs(gamma[(2 * r, 2 * r)]),
                "gamma_zero": _mat_pairs(gamma[(2 * r, 0)]),
                "min_mismatch": mismatch,
            }
        )
    od_plus = {r: fits[r][0] for r in fits}
    od_minus = {r: fits[r][1] for r in fits}
    literal_plus = {r: gamma[(2 * r, 2 * r)] for r in fits}
    literal_minus = {r: gamma[(2 * r, 0)] for r in fits}

    for m in range(1, n_max // 2 + 1):
        for j in range(0, m + 1):
            direct = gamma[(2 * m, 2 * j)]
            key = (2 * m, 2 * j)
            for order, store in ((RIGHT, rep.residual_right), (LEFT, rep.residual_left)):
                res, is_zero = _residual(
                    _renewal_rhs(gamma, excursions.plus, excursions.minus, m, j, order), direct
                )
                store[key] = res
                ok = is_zero if exact else res <= tol
                if order == RIGHT:
                    rep.exact_right &= ok
                else:
                    rep.exact_left &= ok
            rep.offdiag_residual[key] = _residual(
                _renewal_rhs(gamma, od_plus, od_minus, m, j, RIGHT), direct
            )[0]
            rep.literal_residual[key] = _residual(
                _renewal_rhs(gamma, literal_plus, literal_minus, m, j, RIGHT), direct
            )[0]
    return rep


def _mat_pairs(m: Mat2) -> list[list[float]]:
    return [[complex(x).real, complex(x).imag] for x in m]
