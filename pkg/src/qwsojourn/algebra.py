"""
Amplitude algebra for two-state walks.

Scalars come in two backends:

- ``exact``: :class:`ExactComplex`, an element of the field Q(i, sqrt 2)
  stored as ``((a + b*sqrt2) + i*(c + d*sqrt2)) / den`` with integer
  numerators and a positive common denominator.
- ``float``: the builtin ``complex`` type (two binary64 reals).

:class:`Mat2` and :class:`Vec2` hold scalars of either backend and are treated
as immutable values. Coin splitting, the trace inner product and the
trace-orthonormal basis ``{P, Q, R, S}`` are built on top of them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Union

import numpy as np

from .errors import DegenerateBasis, NonUnitaryCoin, NotInField, NotNormalized

__all__ = [
    "ExactComplex",
    "Scalar",
    "Mat2",
    "Vec2",
    "CoinBasis",
    "EXACT",
    "FLOAT",
    "SQRT2",
    "I_UNIT",
    "backend_of",
    "to_backend",
    "scalar_zero",
    "scalar_one",
    "abs2",
    "grover",
    "hadamard",
    "identity_coin",
    "named_coin",
    "phi_star",
    "is_unitary",
    "split_coin",
    "trace_inner",
    "build_basis",
    "decompose",
    "reconstruct",
    "gram_matrix",
    "UNITARITY_TOL",
]

EXACT = "exact"
FLOAT = "float"

UNITARITY_TOL = 1e-10
_NORM_TOL = 1e-12

_SQRT2_F = math.sqrt(2.0)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class ExactComplex:
    """
    Exact element of Q(i, sqrt 2).

    The value is ``((a + b*sqrt2) + i*(c + d*sqrt2)) / den``. Instances are
    normalized so that ``den > 0`` and ``gcd(a, b, c, d, den) == 1``; equal
    values therefore have equal representations.
    """

    __slots__ = ("_a", "_b", "_c", "_d", "_den")

    def __init__(self, a: int = 0, b: int = 0, c: int = 0, d: int = 0, den: int = 1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            a, b, c, d, den = -a, -b, -c, -d, -den
        g = math.gcd(a, b, c, d, den)
        if g > 1:
            a, b, c, d, den = a // g, b // g, c // g, d // g, den // g
        if not (a or b or c or d):
            den = 1
        self._a = a
        self._b = b
        self._c = c
        self._d = d
        self._den = den

    # construction ---------------------------------------------------------

    @classmethod
    def from_parts(cls, x1, x2=0, x3=0, x4=0) -> ExactComplex:
        """Build ``(x1 + x2*sqrt2) + i*(x3 + x4*sqrt2)`` from four rationals."""
        fr = [_as_fraction(v) for v in (x1, x2, x3, x4)]
        den = math.lcm(*(f.denominator for f in fr))
        nums = [f.numerator * (den // f.denominator) for f in fr]
        return cls(*nums, den)

    @classmethod
    def coerce(cls, x) -> ExactComplex:
        """Convert an int, Fraction or ExactComplex to ExactComplex."""
        if isinstance(x, ExactComplex):
            return x
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, Rational):
            return cls(x.numerator, 0, 0, 0, x.denominator)
        raise TypeError(f"cannot represent {x!r} exactly")

    # accessors ------------------------------------------------------------

    def parts(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """Return the four rational coordinates ``(x1, x2, x3, x4)``."""
        den = self._den
        return (
            Fraction(self._a, den),
            Fraction(self._b, den),
            Fraction(self._c, den),
            Fraction(self._d, den),
        )

    @property
    def real(self) -> ExactComplex:
        return ExactComplex(self._a, self._b, 0, 0, self._den)

    @property
    def imag(self) -> ExactComplex:
        return ExactComplex(self._c, self._d, 0, 0, self._den)

    def is_real(self) -> bool:
        return self._c == 0 and self._d == 0

    def is_rational(self) -> bool:
        return self._b == 0 and self._c == 0 and self._d == 0

    def __bool__(self) -> bool:
        return bool(self._a or self._b or self._c or self._d)

    # conversion -----------------------------------------------------------

    def __complex__(self) -> complex:
        den = self._den
        if self._b == 0:
            re = float(Fraction(self._a, den))
        else:
            re = (self._a + self._b * _SQRT2_F) / den
        if self._d == 0:
            im = float(Fraction(self._c, den))
        else:
            im = (self._c + self._d * _SQRT2_F) / den
        return complex(re, im)

    def __float__(self) -> float:
        if not self.is_real():
            raise TypeError("complex value has no float conversion")
        return complex(self).real

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise NotInField("value is not rational")
        return Fraction(self._a, self._den)

    def __abs__(self) -> float:
        return math.sqrt(float(self.abs2()))

    def __repr__(self) -> str:
        return f"ExactComplex({self._a}, {self._b}, {self._c}, {self._d}, den={self._den})"

    def __str__(self) -> str:
        x1, x2, x3, x4 = self.parts()
        terms = []
        for coef, unit in ((x1, ""), (x2, "√2"), (x3, "i"), (x4, "i√2")):
            if coef:
                terms.append(f"{coef}{unit}" if unit == "" else f"({coef}){unit}")
        return " + ".join(terms) if terms else "0"

    # comparison -----------------------------------------------------------

    def _key(self) -> tuple[int, int, int, int, int]:
        return (self._a, self._b, self._c, self._d, self._den)

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactComplex):
            return self._key() == other._key()
        if isinstance(other, (int, Rational)):
            return self._key() == ExactComplex.coerce(other)._key()
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(Fraction(self._a, self._den))
        return hash(self._key())

    # arithmetic -----------------------------------------------------------

    def __neg__(self) -> ExactComplex:
        return ExactComplex(-self._a, -self._b, -self._c, -self._d, self._den)

    def __pos__(self) -> ExactComplex:
        return self

    def conjugate(self) -> ExactComplex:
        return ExactComplex(self._a, self._b, -self._c, -self._d, self._den)

    def __add__(self, other):
        if isinstance(other, ExactComplex):
            o = other
        elif isinstance(other, (int, Rational)):
            o = ExactComplex.coerce(other)
        elif isinstance(other, (float, complex)):
            return complex(self) + other
        else:
            return NotImplemented
        if not o:
            return self
        if not self:
            return o
        d1, d2 = self._den, o._den
        if d1 == d2:
            return ExactComplex(
                self._a + o._a, self._b + o._b, self._c + o._c, self._d + o._d, d1
            )
        return ExactComplex(
            self._a * d2 + o._a * d1,
            self._b * d2 + o._b * d1,
            self._c * d2 + o._c * d1,
            self._d * d2 + o._d * d1,
            d1 * d2,
        )

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (ExactComplex, int, Rational, float, complex)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ExactComplex):
            o = other
        elif isinstance(other, int):
            return ExactComplex(
                self._a * other, self._b * other, self._c * other, self._d * other, self._den
            )
        elif isinstance(other, Rational):
            o = ExactComplex.coerce(other)
        elif isinstance(other, (float, complex)):
            return complex(self) * other
        else:
            return NotImplemented
        if not self or not o:
            return _ZERO
        a, b, c, d = self._a, self._b, self._c, self._d
        e, f, g, h = o._a, o._b, o._c, o._d
        # (x + iy)(u + iv) with x, y, u, v in Z[sqrt2]
        if c == 0 and d == 0 and g == 0 and h == 0:
            return ExactComplex(a * e + 2 * b * f, a * f + b * e, 0, 0, self._den * o._den)
        return ExactComplex(
            (a * e + 2 * b * f) - (c * g + 2 * d * h),
            (a * f + b * e) - (c * h + d * g),
            (a * g + 2 * b * h) + (c * e + 2 * d * f),
            (a * h + b * g) + (c * f + d * e),
            self._den * o._den,
        )

    __rmul__ = __mul__

    def abs2(self) -> ExactComplex:
        """Return ``|z|**2`` as a real element of Q(sqrt 2)."""
        a, b, c, d = self._a, self._b, self._c, self._d
        return ExactComplex(
            a * a + 2 * b * b + c * c + 2 * d * d,
            2 * (a * b + c * d),
            0,
            0,
            self._den * self._den,
        )

    def inverse(self) -> ExactComplex:
        if not self:
            raise ZeroDivisionError("inverse of zero")
        n = self.abs2()
        g, h = Fraction(n._a, n._den), Fraction(n._b, n._den)
        norm = g * g - 2 * h * h
        inv_n = ExactComplex.from_parts(g / norm, -h / norm)
        return self.conjugate() * inv_n

    def __truediv__(self, other):
        if isinstance(other, (float, complex)):
            return complex(self) / other
        if isinstance(other, (ExactComplex, int, Rational)):
            return self * ExactComplex.coerce(other).inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (float, complex)):
            return other / complex(self)
        return ExactComplex.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> ExactComplex:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = _ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def sqrt_real(self) -> ExactComplex:
        """
        Square root of a nonnegative real element, if it lies in Q(sqrt 2).

        Raises
        ------
        NotInField
            If the value is not real and nonnegative, or its square root is
            not an element of Q(sqrt 2).
        """
        if not self.is_real():
            raise NotInField("sqrt_real of a non-real value")
        if not self:
            return _ZERO
        g, h = Fraction(self._a, self._den), Fraction(self._b, self._den)
        # (p + q sqrt2)^2 = p^2 + 2 q^2 + 2 p q sqrt2
        s = _rational_sqrt(g * g - 2 * h * h)
        if s is not None:
            for p2 in ((g + s) / 2, (g - s) / 2):
                p = _rational_sqrt(p2)
                if p is None:
                    continue
                if p == 0:
                    q = _rational_sqrt(g / 2)
                    if q is None:
                        continue
                else:
                    q = h / (2 * p)
                for sign in (1, -1):
                    cand = ExactComplex.from_parts(sign * p, sign * q)
                    if cand * cand == self and float(cand) > 0:
                        return cand
        raise NotInField(f"square root of {self} is not in Q(sqrt 2)")


_ZERO = ExactComplex(0)
_ONE = ExactComplex(1)
SQRT2 = ExactComplex(0, 1)
I_UNIT = ExactComplex(0, 0, 1)

Scalar = Union[ExactComplex, complex]


def backend_of(x) -> str:
    """Backend tag of a scalar, matrix or vector."""
    if isinstance(x, (Mat2, Vec2)):
        return x.backend
    return EXACT if isinstance(x, ExactComplex) else FLOAT


def scalar_zero(backend: str) -> Scalar:
    return _ZERO if backend == EXACT else 0j


def scalar_one(backend: str) -> Scalar:
    return _ONE if backend == EXACT else 1 + 0j


def abs2(x) -> float | ExactComplex:
    """Squared modulus; exact for ExactComplex, float otherwise."""
    if isinstance(x, ExactComplex):
        return x.abs2()
    return x.real * x.real + x.imag * x.imag


def _scalar_to_backend(x, backend: str) -> Scalar:
    if backend == FLOAT:
        return complex(x)
    if isinstance(x, (float, complex)):
        raise NotInField(f"cannot convert float value {x!r} to the exact backend")
    return ExactComplex.coerce(x)


class Mat2:
    """
    Immutable 2x2 matrix ``[[a, b], [c, d]]`` over one scalar backend.

    ``@`` is the matrix product (with another Mat2 or a Vec2) and ``*`` scales
    by a scalar.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a = a
        self.b = b
        self.c = c
        self.d = d

    @classmethod
    def zeros(cls, backend: str = EXACT) -> Mat2:
        z = scalar_zero(backend)
        return cls(z, z, z, z)

    @classmethod
    def identity(cls, backend: str = EXACT) -> Mat2:
        z, o = scalar_zero(backend), scalar_one(backend)
        return cls(o, z, z, o)

    @classmethod
    def unit(cls, i: int, j: int, backend: str = EXACT) -> Mat2:
        """Matrix unit E_ij (0-based indices)."""
        z, o = scalar_zero(backend), scalar_one(backend)
        entries = [z, z, z, z]
        entries[2 * i + j] = o
        return cls(*entries)

    @classmethod
    def from_rows(cls, rows, backend: str | None = None) -> Mat2:
        (a, b), (c, d) = rows
        m = cls(a, b, c, d)
        if backend is None:
            backend = EXACT if all(isinstance(x, (int, Rational, ExactComplex)) for x in m) else FLOAT
        return m.to_backend(backend)

    @classmethod
    def from_array(cls, arr) -> Mat2:
        return cls(complex(arr[0, 0]), complex(arr[0, 1]), complex(arr[1, 0]), complex(arr[1, 1]))

    @property
    def backend(self) -> str:
        return EXACT if isinstance(self.a, ExactComplex) else FLOAT

    def __iter__(self) -> Iterator[Scalar]:
        yield self.a
        yield self.b
        yield self.c
        yield self.d

    def entry(self, i: int, j: int) -> Scalar:
        return (self.a, self.b, self.c, self.d)[2 * i + j]

    def to_backend(self, backend: str) -> Mat2:
        if backend == self.backend and all(backend_of(x) == backend for x in self):
            return self
        return Mat2(*(_scalar_to_backend(x, backend) for x in self))

    def to_float(self) -> Mat2:
        return self.to_backend(FLOAT)

    def to_array(self) -> np.ndarray:
        return np.array(
            [[complex(self.a), complex(self.b)], [complex(self.c), complex(self.d)]],
            dtype=np.complex128,
        )

    def __bool__(self) -> bool:
        return bool(self.a or self.b or self.c or self.d)

    def is_zero(self) -> bool:
        return not self

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat2):
            return NotImplemented
        return (
            self.a == other.a and self.b == other.b and self.c == other.c and self.d == other.d
        )

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self) -> str:
        return f"Mat2([[{self.a!s}, {self.b!s}], [{self.c!s}, {self.d!s}]])"

    def __neg__(self) -> Mat2:
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def __add__(self, other: Mat2) -> Mat2:
        if not isinstance(other, Mat2):
            return NotImplemented
        return Mat2(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other: Mat2) -> Mat2:
        if not isinstance(other, Mat2):
            return NotImplemented
        return Mat2(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __mul__(self, k) -> Mat2:
        if isinstance(k, (Mat2, Vec2)):
            return NotImplemented
        return Mat2(self.a * k, self.b * k, self.c * k, self.d * k)

    def __rmul__(self, k) -> Mat2:
        if isinstance(k, (Mat2, Vec2)):
            return NotImplemented
        return Mat2(k * self.a, k * self.b, k * self.c, k * self.d)

    def __matmul__(self, other):
        if isinstance(other, Vec2):
            return Vec2(self.a * other.x + self.b * other.y, self.c * other.x + self.d * other.y)
        if not isinstance(other, Mat2):
            return NotImplemented
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return Mat2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def adjoint(self) -> Mat2:
        return Mat2(
            self.a.conjugate(), self.c.conjugate(), self.b.conjugate(), self.d.conjugate()
        )

    def trace(self) -> Scalar:
        return self.a + self.d

    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    def frob2(self):
        """Squared Frobenius norm (exact real for the exact backend)."""
        return abs2(self.a) + abs2(self.b) + abs2(self.c) + abs2(self.d)

    def frobenius(self) -> float:
        return math.sqrt(float(self.frob2()))

    def max_abs_diff(self, other: Mat2) -> float:
        return max(abs(complex(x) - complex(y)) for x, y in zip(self, other))


class Vec2:
    """Chirality vector ``(x, y)``: left amplitude first, right amplitude second."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = x
        self.y = y

    @property
    def backend(self) -> str:
        return EXACT if isinstance(self.x, ExactComplex) else FLOAT

    def __iter__(self) -> Iterator[Scalar]:
        yield self.x
        yield self.y

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vec2):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self) -> int:
        return hash((self.x, self.y))

    def __repr__(self) -> str:
        return f"Vec2({self.x!s}, {self.y!s})"

    def norm2(self):
        """Squared norm ``|x|**2 + |y|**2``."""
        return abs2(self.x) + abs2(self.y)

    def to_backend(self, backend: str) -> Vec2:
        return Vec2(_scalar_to_backend(self.x, backend), _scalar_to_backend(self.y, backend))

    def to_array(self) -> np.ndarray:
        return np.array([complex(self.x), complex(self.y)], dtype=np.complex128)

    def check_normalized(self, tol: float = _NORM_TOL) -> None:
        n = self.norm2()
        if self.backend == EXACT:
            if n != 1:
                raise NotNormalized(f"squared norm is {n}, not 1")
        elif abs(n - 1.0) > tol:
            raise NotNormalized(f"squared norm {n!r} differs from 1 by more than {tol:g}")


def to_backend(x, backend: str):
    """Convert a scalar, Mat2 or Vec2 to the requested backend."""
    if isinstance(x, (Mat2, Vec2)):
        return x.to_backend(backend)
    return _scalar_to_backend(x, backend)


# named coins --------------------------------------------------------------

_HALF_SQRT2 = ExactComplex(0, 1, 0, 0, 2)


def grover(backend: str = EXACT) -> Mat2:
    """Two-state Grover coin [[0, 1], [1, 0]]."""
    return Mat2(_ZERO, _ONE, _ONE, _ZERO).to_backend(backend)


def hadamard(backend: str = EXACT) -> Mat2:
    """Hadamard coin (1/sqrt2) [[1, 1], [1, -1]]."""
    h = _HALF_SQRT2
    return Mat2(h, h, h, -h).to_backend(backend)


def identity_coin(backend: str = EXACT) -> Mat2:
    return Mat2.identity(backend)


_NAMED = {"grover": grover, "hadamard": hadamard, "identity": identity_coin}


def named_coin(name: str, backend: str = EXACT) -> Mat2:
    try:
        factory = _NAMED[name.lower()]
    except KeyError:
        raise ValueError(f"unknown coin {name!r}; expected one of {sorted(_NAMED)}") from None
    return factory(backend)


def phi_star(backend: str = EXACT) -> Vec2:
    """Default initial chirality state [0, i]^T."""
    return Vec2(_ZERO, I_UNIT).to_backend(backend)


# coin splitting and the trace-orthonormal basis -----------------------------


def is_unitary(u: Mat2, tol: float = UNITARITY_TOL) -> bool:
    g = u.adjoint() @ u
    ident = Mat2.identity(u.backend)
    if u.backend == EXACT:
        return g == ident
    return (g - ident).frobenius() < tol


def split_coin(u: Mat2, tol: float = UNITARITY_TOL) -> tuple[Mat2, Mat2]:
    """
    Split a coin row-wise into its left-moving and right-moving parts.

    Returns ``(P, Q)`` where ``P`` keeps the top row of ``u`` and ``Q`` the
    bottom row, so that ``P + Q == u``.

    Raises
    ------
    NonUnitaryCoin
        If ``u`` is not unitary (exactly, or within ``tol`` in Frobenius norm
        for the float backend).
    """
    if not is_unitary(u, tol):
        raise NonUnitaryCoin(f"coin {u!r} is not unitary")
    z = scalar_zero(u.backend)
    return Mat2(u.a, u.b, z, z), Mat2(z, z, u.c, u.d)


def trace_inner(a: Mat2, b: Mat2) -> Scalar:
    """Trace inner product tr(A* B) = sum of conj(a_ij) * b_ij."""
    return (
        a.a.conjugate() * b.a
        + a.b.conjugate() * b.b
        + a.c.conjugate() * b.c
        + a.d.conjugate() * b.d
    )


@dataclass(frozen=True)
class CoinBasis:
    """Trace-orthonormal basis {P, Q, R, S} of the 2x2 complex matrices."""

    P: Mat2
    Q: Mat2
    R: Mat2
    S: Mat2

    def __iter__(self) -> Iterator[Mat2]:
        return iter((self.P, self.Q, self.R, self.S))

    @property
    def backend(self) -> str:
        return self.P.backend


def gram_matrix(mats) -> list[list[Scalar]]:
    mats = list(mats)
    return [[trace_inner(x, y) for y in mats] for x in mats]


def _unit_norm(m: Mat2) -> Scalar:
    n2 = m.frob2()
    if m.backend == EXACT:
        return n2.sqrt_real()
    return complex(math.sqrt(n2))


def build_basis(p: Mat2, q: Mat2, tol: float = 1e-12) -> CoinBasis:
    """
    Complete ``{P, Q}`` to a trace-orthonormal basis ``{P, Q, R, S}``.

    ``R`` and ``S`` are the first two nonzero Gram-Schmidt residues of the
    matrix units E11, E12, E21, E22 (in that order) against the vectors
    accepted so far.

    Raises
    ------
    DegenerateBasis
        If fewer than two new unit vectors are found.
    NotInField
        If a normalization would leave Q(i, sqrt 2) (exact backend only).
    """
    backend = p.backend
    accepted = [p, q]
    found: list[Mat2] = []
    for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)):
        v = Mat2.unit(i, j, backend)
        for e in accepted:
            v = v - e * trace_inner(e, v)
        if backend == EXACT:
            if not v:
                continue
        elif v.frobenius() < tol:
            continue
        nrm = _unit_norm(v)
        v = v * (1 / nrm)
        accepted.append(v)
        found.append(v)
        if len(found) == 2:
            return CoinBasis(p, q, found[0], found[1])
    raise DegenerateBasis("Gram-Schmidt completion yielded fewer than two new vectors")


def decompose(m: Mat2, basis: CoinBasis) -> tuple[Scalar, Scalar, Scalar, Scalar]:
    """Coordinates ``(p, q, r, s)`` of ``m`` in the basis: u = <U|m>."""
    return tuple(trace_inner(e, m) for e in basis)  # type: ignore[return-value]


def reconstruct(coords, basis: CoinBasis) -> Mat2:
    p, q, r, s = coords
    return basis.P * p + basis.Q * q + basis.R * r + basis.S * s


def eig_phase(z: complex) -> float:
    """Principal argument in (-pi, pi], folding values within 1e-12 of -pi onto pi."""
    ang = cmath.phase(z)
    if ang <= -math.pi + 1e-12:
        ang = math.pi
    return ang
