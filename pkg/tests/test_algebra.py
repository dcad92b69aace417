from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXACT_MATS, EXACT_SCALARS, TEST_COINS, random_exact_mat
from qwsojourn.algebra import (
    FLOAT,
    I_UNIT,
    SQRT2,
    ExactComplex,
    Mat2,
    Vec2,
    build_basis,
    decompose,
    gram_matrix,
    grover,
    hadamard,
    identity_coin,
    is_unitary,
    named_coin,
    reconstruct,
    split_coin,
    trace_inner,
)
from qwsojourn.errors import DegenerateBasis, NonUnitaryCoin, NotInField, NotNormalized

H = ExactComplex.from_parts(0, Fraction(1, 2))  # 1/sqrt2
E11, E12, E21, E22 = (Mat2.unit(i, j) for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))


def as_complex(x) -> complex:
    return complex(x)


class TestExactField:
    def test_sqrt2_squares_to_two(self):
        assert SQRT2 * SQRT2 == 2
        assert I_UNIT * I_UNIT == -1

    def test_normal_form_is_canonical(self):
        assert ExactComplex(2, 4, 0, 0, 4) == ExactComplex.from_parts(Fraction(1, 2), 1)
        assert ExactComplex(2, 4, 0, 0, 4).parts() == (Fraction(1, 2), 1, 0, 0)
        assert hash(ExactComplex(3, 0, 0, 0, 6)) == hash(Fraction(1, 2))

    def test_division_rationalizes(self):
        x = 1 / (1 + SQRT2)
        assert x == SQRT2 - 1

    def test_rational_float_conversion_is_correctly_rounded(self):
        x = ExactComplex.from_parts(Fraction(1, 3))
        assert complex(x) == complex(1 / 3)

    def test_zero_division(self):
        with pytest.raises(ZeroDivisionError):
            ExactComplex(1) / ExactComplex(0)

    def test_sqrt_real_stays_in_field_or_raises(self):
        assert ExactComplex.from_parts(Fraction(1, 2)).sqrt_real() == H
        assert ExactComplex(4).sqrt_real() == 2
        with pytest.raises(NotInField):
            ExactComplex(3).sqrt_real()

    @given(EXACT_SCALARS, EXACT_SCALARS, EXACT_SCALARS)
    def test_ring_axioms(self, a, b, c):
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + b == b + a
        assert (a - b) + b == a

    @given(EXACT_SCALARS)
    def test_inverse(self, a):
        if a:
            assert a * a.inverse() == 1

    @given(EXACT_SCALARS, EXACT_SCALARS)
    def test_float_image_is_a_homomorphism(self, a, b):
        assert complex(a * b) == pytest.approx(complex(a) * complex(b), abs=1e-9)
        assert complex(a + b) == pytest.approx(complex(a) + complex(b), abs=1e-9)

    @given(EXACT_SCALARS)
    def test_conjugate_and_abs2(self, a):
        assert a * a.conjugate() == a.abs2()
        assert a.abs2().is_real
        assert float(a.abs2()) == pytest.approx(abs(complex(a)) ** 2, rel=1e-12, abs=1e-12)


class TestMat2:
    @given(EXACT_MATS, EXACT_MATS, EXACT_MATS)
    @settings(max_examples=50)
    def test_product_associative(self, a, b, c):
        assert (a @ b) @ c == a @ (b @ c)

    @given(EXACT_MATS, EXACT_MATS)
    @settings(max_examples=50)
    def test_adjoint_reverses_products(self, a, b):
        assert (a @ b).adjoint() == b.adjoint() @ a.adjoint()

    @given(EXACT_MATS)
    @settings(max_examples=50)
    def test_float_backend_agrees(self, a):
        assert (a @ a).to_float().max_abs_diff(a.to_float() @ a.to_float()) < 1e-9

    def test_named_coins_are_unitary(self):
        for name in ("grover", "hadamard", "identity"):
            assert is_unitary(named_coin(name))
            assert is_unitary(named_coin(name, FLOAT))

    def test_vec_normalization(self):
        Vec2(ExactComplex(0), I_UNIT).check_normalized()
        with pytest.raises(NotNormalized):
            Vec2(ExactComplex(1), ExactComplex(1)).check_normalized()
        Vec2(H, H).check_normalized()


class TestSplitCoin:
    def test_grover(self):
        p, q = split_coin(grover())
        assert p == E12 and q == E21

    def test_identity(self):
        p, q = split_coin(identity_coin())
        assert p == E11 and q == E22

    def test_hadamard(self):
        p, q = split_coin(hadamard())
        assert p == Mat2(H, H, 0, 0) and q == Mat2(0, 0, H, -H)

    @pytest.mark.parametrize("name", sorted(TEST_COINS))
    def test_parts_sum_to_coin(self, name):
        p, q = split_coin(TEST_COINS[name])
        assert p + q == TEST_COINS[name]

    def test_rejects_non_unitary(self):
        with pytest.raises(NonUnitaryCoin):
            split_coin(Mat2(1, 1, 0, 1))
        with pytest.raises(NonUnitaryCoin):
            split_coin(Mat2(1.0, 0.0, 0.0, 1.1))


class TestTraceInner:
    def test_examples(self):
        assert trace_inner(E12, E12) == 1
        assert trace_inner(E12, E21) == 0
        assert trace_inner(Mat2.identity(), Mat2.identity()) == 2

    def test_conjugate_linear_in_first_slot(self):
        assert trace_inner(E11 * I_UNIT, E11) == -I_UNIT


class TestBasis:
    def test_grover_completion(self):
        b = build_basis(*split_coin(grover()))
        assert (b.R, b.S) == (E11, E22)

    def test_identity_completion(self):
        b = build_basis(*split_coin(identity_coin()))
        assert (b.R, b.S) == (E12, E21)

    def test_hadamard_completion(self):
        b = build_basis(*split_coin(hadamard()))
        assert b.R == Mat2(H, -H, 0, 0)
        assert b.S == Mat2(0, 0, H, H)

    @pytest.mark.parametrize("name", sorted(TEST_COINS))
    def test_gram_is_identity(self, name):
        b = build_basis(*split_coin(TEST_COINS[name]))
        g = gram_matrix(b)
        assert all(g[i][j] == (1 if i == j else 0) for i in range(4) for j in range(4))

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateBasis):
            _degenerate()

    def test_decompose_examples(self):
        b = build_basis(*split_coin(grover()))
        assert decompose(b.P, b) == (1, 0, 0, 0)
        assert decompose(Mat2.identity(), b) == (0, 0, 1, 1)
        assert decompose(Mat2(2, 3, 0, 0), b) == (3, 0, 2, 0)

    @pytest.mark.parametrize("name", sorted(TEST_COINS))
    def test_round_trip_random(self, name, rng):
        b = build_basis(*split_coin(TEST_COINS[name]))
        for _ in range(100):
            m = random_exact_mat(rng)
            assert reconstruct(decompose(m, b), b) == m

    def test_float_basis_matches_exact(self):
        exact = build_basis(*split_coin(hadamard()))
        flt = build_basis(*split_coin(hadamard(FLOAT)))
        for a, c in zip(exact, flt):
            assert a.to_float().max_abs_diff(c) < 1e-15


def _degenerate():
    # Offer only span{P, Q} as Gram-Schmidt seeds, so no new direction appears.
    p, q = Mat2(1, 0, 0, 0), Mat2(0, 1, 0, 0)
    original = Mat2.unit
    try:
        Mat2.unit = classmethod(lambda cls, i, j, backend="exact": p if (i + j) % 2 == 0 else q)
        return build_basis(p, q)
    finally:
        Mat2.unit = original


def test_thousand_random_field_elements(rng):
    from conftest import random_exact_scalar

    for _ in range(1000):
        x, y, z = (random_exact_scalar(rng) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        if x:
            assert x * x.inverse() == 1


@pytest.mark.parametrize("name", sorted(TEST_COINS))
def test_split_parts_are_column_orthonormal(name):
    p, q = split_coin(TEST_COINS[name])
    assert p.adjoint() @ p + q.adjoint() @ q == Mat2.identity()


def test_random_float_unitary_split():
    from qwsojourn.spectral import RANDOM_UNITARY, sample_coins

    for _, u in sample_coins(RANDOM_UNITARY, 50, 4):
        p, q = split_coin(u)
        assert (p.adjoint() @ p + q.adjoint() @ q).max_abs_diff(Mat2.identity(FLOAT)) < 1e-12
