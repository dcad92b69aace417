"""
Truncated bivariate power series in ``(z, t)`` and divergence diagnostics.

``z`` counts time steps and ``t`` counts sojourn intervals. Coefficients are
scalars (``ExactComplex`` or ``complex``) or :class:`~qwsojourn.algebra.Mat2`
values; products of matrix series keep the left/right order of their
factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import EXACT, FLOAT, ExactComplex, Mat2, backend_of, scalar_zero
from .errors import InsufficientOrder, NonNilpotentConstantTerm, TruncationOverflow
from .sojourn import ExcursionSequences, GammaTable

__all__ = [
    "SCALAR",
    "MATRIX",
    "BiSeries",
    "series_from_table",
    "symmetrize",
    "build_X",
    "neumann_inverse_times",
    "gamma_bar_direct",
    "classify_decay",
    "PointDiagnostics",
    "EntryDiagnostics",
    "DiagnosticsReport",
    "convergence_diagnostics",
    "DECAY_ORDER",
    "MIN_DIAGNOSTIC_ORDER",
]

SCALAR = "scalar"
MATRIX = "matrix"


def _kind_of(c) -> str:
    return MATRIX if isinstance(c, Mat2) else SCALAR


def _zero(kind: str, backend: str):
    return Mat2.zeros(backend) if kind == MATRIX else scalar_zero(backend)


def _mul(a, b):
    if isinstance(a, Mat2) and isinstance(b, Mat2):
        return a @ b
    return a * b


class BiSeries:
    """
    Bivariate series truncated at z-degree ``nz`` and t-degree ``nt``.

    ``coeffs`` maps ``(i, j)`` to the coefficient of ``z**i t**j``; zero
    coefficients are dropped. ``kind`` is ``"scalar"`` or ``"matrix"`` and
    ``backend`` is ``"exact"`` or ``"float"``; both are inferred from the
    coefficients when not given.
    """

    __slots__ = ("nz", "nt", "coeffs", "kind", "backend")

    def __init__(self, coeffs: dict, orders: tuple[int, int], kind: str | None = None,
                 backend: str | None = None):
        nz, nt = orders
        if nz < 0 or nt < 0:
            raise ValueError("truncation orders must be nonnegative")
        sample = next(iter(coeffs.values()), None)
        self.kind = kind or (_kind_of(sample) if sample is not None else SCALAR)
        self.backend = backend or (backend_of(sample) if sample is not None else EXACT)
        self.nz, self.nt = nz, nt
        kept = {}
        for (i, j), c in coeffs.items():
            if i > nz or j > nt or i < 0 or j < 0:
                raise TruncationOverflow(f"coefficient ({i}, {j}) outside orders ({nz}, {nt})")
            if c:
                kept[(i, j)] = c
        self.coeffs = kept

    @property
    def orders(self) -> tuple[int, int]:
        return (self.nz, self.nt)

    @classmethod
    def zero(cls, orders, kind: str = SCALAR, backend: str = EXACT) -> BiSeries:
        return cls({}, orders, kind, backend)

    @classmethod
    def one(cls, orders, kind: str = SCALAR, backend: str = EXACT) -> BiSeries:
        one = Mat2.identity(backend) if kind == MATRIX else (ExactComplex(1) if backend == EXACT else 1 + 0j)
        return cls({(0, 0): one}, orders, kind, backend)

    def coefficient(self, i: int, j: int):
        got = self.coeffs.get((i, j))
        return got if got is not None else _zero(self.kind, self.backend)

    def __getitem__(self, key: tuple[int, int]):
        return self.coefficient(*key)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        return f"BiSeries({len(self.coeffs)} terms, orders={self.orders}, {self.kind}, {self.backend})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiSeries):
            return NotImplemented
        return self.orders == other.orders and self.coeffs == other.coeffs

    def _like(self, coeffs: dict, orders=None) -> BiSeries:
        return BiSeries(coeffs, orders or self.orders, self.kind, self.backend)

    def __neg__(self) -> BiSeries:
        return self._like({k: -c for k, c in self.coeffs.items()})

    def __add__(self, other: BiSeries) -> BiSeries:
        if not isinstance(other, BiSeries):
            return NotImplemented
        orders = (min(self.nz, other.nz), min(self.nt, other.nt))
        out = {k: c for k, c in self.coeffs.items() if k[0] <= orders[0] and k[1] <= orders[1]}
        for k, c in other.coeffs.items():
            if k[0] > orders[0] or k[1] > orders[1]:
                continue
            cur = out.get(k)
            out[k] = c if cur is None else cur + c
        return self._like(out, orders)

    def __sub__(self, other: BiSeries) -> BiSeries:
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            return self._like({k: _mul(c, other) for k, c in self.coeffs.items()})
        orders = (min(self.nz, other.nz), min(self.nt, other.nt))
        nz, nt = orders
        out: dict = {}
        right = sorted(other.coeffs.items())
        for (i1, j1), a in sorted(self.coeffs.items()):
            for (i2, j2), b in right:
                i, j = i1 + i2, j1 + j2
                if i > nz:
                    break
                if j > nt:
                    continue
                term = _mul(a, b)
                cur = out.get((i, j))
                out[(i, j)] = term if cur is None else cur + term
        kind = MATRIX if MATRIX in (self.kind, other.kind) else SCALAR
        return BiSeries(out, orders, kind, self.backend)

    def __rmul__(self, k):
        return self._like({key: _mul(k, c) for key, c in self.coeffs.items()})

    def truncate(self, orders) -> BiSeries:
        nz, nt = orders
        return self._like({k: c for k, c in self.coeffs.items() if k[0] <= nz and k[1] <= nt},
                          (min(nz, self.nz), min(nt, self.nt)))

    def substitute_signs(self, z_sign: int, t_sign: int) -> BiSeries:
        """Return ``s(z_sign * z, t_sign * t)`` for signs in {+1, -1}."""
        out = {}
        for (i, j), c in self.coeffs.items():
            neg = (z_sign < 0 and i % 2) ^ (t_sign < 0 and j % 2)
            out[(i, j)] = -c if neg else c
        return self._like(out)

    def entry(self, row: int, col: int) -> BiSeries:
        """Scalar series of one matrix entry."""
        if self.kind != MATRIX:
            raise TypeError("entry() needs a matrix series")
        return BiSeries({k: c.entry(row, col) for k, c in self.coeffs.items()},
                        self.orders, SCALAR, self.backend)

    def to_float(self) -> BiSeries:
        if self.kind == MATRIX:
            conv = {k: c.to_float() for k, c in self.coeffs.items()}
        else:
            conv = {k: complex(c) for k, c in self.coeffs.items()}
        return BiSeries(conv, self.orders, self.kind, FLOAT)

    def max_abs_diff(self, other: BiSeries) -> float:
        worst = 0.0
        for k in set(self.coeffs) | set(other.coeffs):
            a, b = self.coefficient(*k), other.coefficient(*k)
            if self.kind == MATRIX:
                worst = max(worst, a.max_abs_diff(b))
            else:
                worst = max(worst, abs(complex(a) - complex(b)))
        return worst

    def z_terms(self, z, t) -> list:
        """
        Per-z-degree terms ``d_m = sum_j c[m, j] z**m t**j`` for m = 0..nz.

        Exact arithmetic is kept when the series and the point are exact.
        """
        if self.kind != SCALAR:
            raise TypeError("z_terms() needs a scalar series")
        exact = self.backend == EXACT and not isinstance(z, (float, complex)) \
            and not isinstance(t, (float, complex))
        if exact:
            z, t = ExactComplex.coerce(z), ExactComplex.coerce(t)
            zero = ExactComplex(0)
        else:
            z, t = complex(z), complex(t)
            zero = 0j
        terms = [zero] * (self.nz + 1)
        zp = [zero + 1] if exact else [1 + 0j]
        tp = [zero + 1] if exact else [1 + 0j]
        for _ in range(self.nz):
            zp.append(zp[-1] * z)
        for _ in range(self.nt):
            tp.append(tp[-1] * t)
        for (i, j), c in sorted(self.coeffs.items()):
            val = c * (zp[i] * tp[j]) if exact else complex(c) * zp[i] * tp[j]
            terms[i] = terms[i] + val
        return terms

    def partial_sums(self, z, t) -> list:
        """Partial sums ``S_m = sum_{i <= m} d_i`` for m = 0..nz."""
        out = []
        acc = None
        for d in self.z_terms(z, t):
            acc = d if acc is None else acc + d
            out.append(acc)
        return out


def series_from_table(table: dict, orders: tuple[int, int], kind: str | None = None,
                      backend: str | None = None) -> BiSeries:
    """
    Series with ``table[(n, k)]`` as the coefficient of ``z**n t**k``.

    The time-zero row is dropped (the sums start at ``n = 1``).

    Raises
    ------
    TruncationOverflow
        If an index exceeds ``orders``.
    """
    nz, nt = orders
    coeffs = {}
    for (n, k), c in table.items():
        if n > nz or k > nt:
            raise TruncationOverflow(f"table index ({n}, {k}) exceeds orders ({nz}, {nt})")
        if n >= 1:
            coeffs[(n, k)] = c
    return BiSeries(coeffs, orders, kind, backend)


def symmetrize(s: BiSeries) -> BiSeries:
    """Return ``s(z,t) + s(-z,t) + s(z,-t) + s(-z,-t)`` (keeps the factor 4)."""
    return (
        s
        + s.substitute_signs(-1, 1)
        + s.substitute_signs(1, -1)
        + s.substitute_signs(-1, -1)
    )


def build_X(excursions: ExcursionSequences, orders: tuple[int, int]) -> BiSeries:
    """
    Excursion series: F+_{2r} at ``(zt)**(2r)`` and F-_{2r} at ``z**(2r)``.

    Terms beyond ``orders`` are dropped.
    """
    nz, nt = orders
    coeffs = {}
    for r, f in excursions.plus.items():
        if 2 * r <= nz and 2 * r <= nt:
            coeffs[(2 * r, 2 * r)] = f
    for r, f in excursions.minus.items():
        if 2 * r <= nz:
            coeffs[(2 * r, 0)] = f
    return BiSeries(coeffs, orders, MATRIX, excursions.backend)


def neumann_inverse_times(x: BiSeries, verify: bool = True, tol: float = 1e-9) -> BiSeries:
    """
    Return ``X (I - X)^{-1}`` truncated to the orders of ``X``.

    The result ``Y`` solves ``Y = X + Y X`` degree by degree in lexicographic
    order of ``(z-degree, t-degree)``; since ``X`` has no constant term every
    coefficient of ``Y`` on the right-hand side is already known. With
    ``verify`` the identity ``Y (I - X) = X`` is re-checked by a full
    truncated multiplication.

    Raises
    ------
    NonNilpotentConstantTerm
        If the constant term of ``X`` is nonzero.
    """
    if x.coeffs.get((0, 0)):
        raise NonNilpotentConstantTerm("X has a nonzero constant term")
    nz, nt = x.orders
    xterms = sorted(x.coeffs.items())
    y: dict = {}
    for i in range(nz + 1):
        for j in range(nt + 1):
            acc = x.coeffs.get((i, j))
            for (c, d), xc in xterms:
                if c > i:
                    break
                if d > j:
                    continue
                prev = y.get((i - c, j - d))
                if prev is None:
                    continue
                term = _mul(prev, xc)
                acc = term if acc is None else acc + term
            if acc is not None and acc:
                y[(i, j)] = acc
    out = x._like(y)
    if verify:
        ident = BiSeries.one(x.orders, x.kind, x.backend)
        check = out * (ident - x)
        ok = check == x if x.backend == EXACT else check.max_abs_diff(x) <= tol
        if not ok:
            raise ArithmeticError("Y (I - X) = X failed to hold to truncation order")
    return out


def gamma_bar_direct(gamma: GammaTable, orders: tuple[int, int], strict: bool = False) -> BiSeries:
    """
    Series with Gamma_n(k) at ``z**n t**k`` for 1 <= n <= nz, k <= nt.

    The ``k = 0`` column is included unless ``strict`` is set.
    """
    nz, nt = orders
    coeffs = {}
    for (n, k), w in gamma.data.items():
        if n < 1 or n > nz or k > nt:
            continue
        if strict and k == 0:
            continue
        coeffs[(n, k)] = w
    return BiSeries(coeffs, orders, MATRIX, gamma.backend)


# diagnostics ------------------------------------------------------------------

MIN_DIAGNOSTIC_ORDER = 20
NON_DECAYING = "non-decaying"
POLYNOMIAL = "polynomial-decay"
FASTER = "faster"
# slowest first
DECAY_ORDER = (NON_DECAYING, POLYNOMIAL, FASTER)
_FLAT_SLOPE = -0.05


def _envelope(seq: list[float]) -> list[float]:
    env = [0.0] * len(seq)
    run = 0.0
    for m in range(len(seq) - 1, -1, -1):
        run = max(run, seq[m])
        env[m] = run
    return env


def classify_decay(seq: list[float]) -> tuple[str, float]:
    """
    Decay class of a nonnegative sequence and its log-log envelope slope.

    The tail envelope ``e_m = max_{m' >= m} seq[m']`` is fitted on
    ``m in [len/4, last nonzero]``. A slope of at least -0.05 is
    ``non-decaying``; otherwise a semi-log (geometric) fit that beats the
    log-log (power-law) fit gives ``faster`` and the rest is
    ``polynomial-decay``. Sequences whose last quarter vanishes are
    ``faster``.
    """
    n = len(seq) - 1
    if n < 1:
        return FASTER, -math.inf
    lo = max(1, n // 4)
    tail = seq[n - max(1, n // 4) + 1:]
    if not any(v > 0 for v in tail):
        return FASTER, -math.inf
    env = _envelope(seq)
    pts = [(m, env[m]) for m in range(lo, n + 1) if env[m] > 0]
    if len(pts) < 3:
        return FASTER, -math.inf
    m_arr = np.array([p[0] for p in pts], dtype=float)
    log_e = np.log(np.array([p[1] for p in pts]))
    log_m = np.log(m_arr)
    slope, icpt = np.polyfit(log_m, log_e, 1)
    if slope >= _FLAT_SLOPE:
        return NON_DECAYING, float(slope)
    sse_pow = float(np.sum((log_e - (slope * log_m + icpt)) ** 2))
    rate, icpt2 = np.polyfit(m_arr, log_e, 1)
    sse_geo = float(np.sum((log_e - (rate * m_arr + icpt2)) ** 2))
    if rate < 0 and sse_geo < sse_pow:
        return FASTER, float(slope)
    return POLYNOMIAL, float(slope)


def _radius_estimate(seq: list[float]) -> float:
    n = len(seq) - 1
    roots = [seq[m] ** (1.0 / m) for m in range(max(1, n // 2), n + 1) if seq[m] > 0]
    if not roots:
        return math.inf
    top = max(roots)
    return math.inf if top == 0 else 1.0 / top


@dataclass
class PointDiagnostics:
    """Partial-sum behaviour of one scalar series at one evaluation point."""

    z: object
    t: object
    partial_sums: list
    growth_flag: bool
    term_flag: bool

    @property
    def divergent(self) -> bool:
        return self.growth_flag or self.term_flag

    @property
    def final_sum(self):
        return self.partial_sums[-1]

    def to_dict(self) -> dict:
        return {
            "z": _num_json(self.z),
            "t": _num_json(self.t),
            "divergent": self.divergent,
            "growth_flag": self.growth_flag,
            "term_flag": self.term_flag,
            "final_partial_sum": _num_json(self.final_sum),
            "partial_sum_norms": [abs(s) for s in self.partial_sums],
        }


@dataclass
class EntryDiagnostics:
    """Diagnostics for one scalar series (or one entry of a matrix series)."""

    label: str
    diagonal_norms: list[float]
    t0_norms: list[float]
    profile_norms: list[float]
    radius_estimate: float
    decay_class: str
    decay_slope: float
    points: list[PointDiagnostics] = field(default_factory=list)

    @property
    def is_zero(self) -> bool:
        return not any(self.profile_norms)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "decay_class": self.decay_class,
            "decay_slope": _finite(self.decay_slope),
            "radius_estimate": _finite(self.radius_estimate),
            "diagonal_norms": self.diagonal_norms,
            "t0_norms": self.t0_norms,
            "profile_norms": self.profile_norms,
            "points": [p.to_dict() for p in self.points],
        }


@dataclass
class DiagnosticsReport:
    """
    Coefficient-growth and partial-sum diagnostics of a series.

    ``entries`` holds one :class:`EntryDiagnostics` per scalar series: a
    single one for scalar input, four (labelled ``(1,1)`` .. ``(2,2)``) for
    matrix input. ``normalization`` records how the caller scaled the series
    (for example ``"4x"`` for an unnormalized symmetrization).
    """

    orders: tuple[int, int]
    growth_factor: float
    entries: list[EntryDiagnostics]
    normalization: str = "none"

    def entry(self, label: str) -> EntryDiagnostics:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    def divergent(self, point: int = 0) -> bool:
        return any(e.points[point].divergent for e in self.entries)

    @property
    def decay_class(self) -> str:
        """Slowest decay class over the nonzero entries."""
        classes = [e.decay_class for e in self.entries if not e.is_zero]
        if not classes:
            return FASTER
        return min(classes, key=DECAY_ORDER.index)

    def to_dict(self) -> dict:
        return {
            "orders": list(self.orders),
            "growth_factor": self.growth_factor,
            "normalization": self.normalization,
            "decay_class": self.decay_class,
            "divergent": [self.divergent(i) for i in range(len(self.entries[0].points))]
            if self.entries else [],
            "entries": [e.to_dict() for e in self.entries],
        }


def _finite(x: float):
    return x if math.isfinite(x) else None


def _num_json(x):
    c = complex(x)
    return [c.real, c.imag]


def _growth_flag(norms: list[float], factor: float) -> bool:
    n = len(norms) - 1
    first = next((m for m, v in enumerate(norms) if v > 0), None)
    if first is None or n < 2:
        return False
    half = n // 2
    second = norms[half:]
    monotone = all(b >= a for a, b in zip(second, second[1:]))
    return monotone and norms[n] > norms[half] and norms[n] >= factor * norms[first]


def _entry_diagnostics(label: str, s: BiSeries, points, factor: float) -> EntryDiagnostics:
    nz, nt = s.orders
    diag = [abs(s.coefficient(m, m)) if m <= nt else 0.0 for m in range(nz + 1)]
    t0 = [abs(s.coefficient(m, 0)) for m in range(nz + 1)]
    profile = [0.0] * (nz + 1)
    for (i, _), c in s.coeffs.items():
        profile[i] = max(profile[i], abs(c))
    cls, slope = classify_decay(profile)
    out = EntryDiagnostics(
        label=label,
        diagonal_norms=diag,
        t0_norms=t0,
        profile_norms=profile,
        radius_estimate=_radius_estimate(profile),
        decay_class=cls,
        decay_slope=slope,
    )
    for z, t in points:
        terms = s.z_terms(z, t)
        sums = []
        acc = None
        for d in terms:
            acc = d if acc is None else acc + d
            sums.append(acc)
        norms = [abs(v) for v in sums]
        term_cls, _ = classify_decay([abs(d) for d in terms])
        out.points.append(
            PointDiagnostics(
                z=z,
                t=t,
                partial_sums=sums,
                growth_flag=_growth_flag(norms, factor),
                term_flag=term_cls == NON_DECAYING,
            )
        )
    return out


def convergence_diagnostics(
    s: BiSeries,
    eval_points=((1, 1),),
    growth_factor: float = 10.0,
    min_order: int = MIN_DIAGNOSTIC_ORDER,
    normalization: str = "none",
) -> DiagnosticsReport:
    """
    Convergence/divergence diagnostics of a truncated series.

    For each scalar series (each matrix entry for matrix input) this records
    the coefficient norms on the diagonal ``i == j``, on the ``t**0`` column
    and the per-z-degree maximum (the *profile*), a root-test radius
    estimate, and the decay class of the profile (see
    :func:`classify_decay`). At every evaluation point the partial sums over
    z-degree are computed, exactly when both the series and the point are
    exact. The point is flagged divergent when either

    - the partial-sum norms are non-decreasing over the second half of the
      window, strictly larger at the end than at the midpoint, and at least
      ``growth_factor`` times the first nonzero partial sum (growth flag), or
    - the evaluated per-degree terms are themselves non-decaying, so the
      term test for convergence fails (term flag).

    Raises
    ------
    InsufficientOrder
        If either truncation order is below ``min_order``.
    """
    nz, nt = s.orders
    if nz < min_order or nt < min_order:
        raise InsufficientOrder(
            f"diagnostics need orders >= {min_order} in z and t, got ({nz}, {nt})"
        )
    points = [tuple(p) for p in eval_points]
    if s.kind == MATRIX:
        entries = [
            _entry_diagnostics(f"({r + 1},{c + 1})", s.entry(r, c), points, growth_factor)
            for r in range(2)
            for c in range(2)
        ]
    else:
        entries = [_entry_diagnostics("scalar", s, points, growth_factor)]
    return DiagnosticsReport(s.orders, growth_factor, entries, normalization)


def exact_point(value) -> object:
    """Parse an evaluation coordinate, keeping it exact when it is rational."""
    if isinstance(value, (int, Fraction, ExactComplex)):
        return value
    if isinstance(value, complex) and value.imag == 0:
        value = value.real
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value
