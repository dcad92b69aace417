from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import random_exact_mat, random_exact_scalar
from qwsojourn.algebra import EXACT, FLOAT, ExactComplex, Mat2, grover, hadamard
from qwsojourn.errors import InsufficientOrder, NonNilpotentConstantTerm, TruncationOverflow
from qwsojourn.series import (
    FASTER,
    NON_DECAYING,
    POLYNOMIAL,
    BiSeries,
    build_X,
    classify_decay,
    convergence_diagnostics,
    gamma_bar_direct,
    neumann_inverse_times,
    series_from_table,
    symmetrize,
)
from qwsojourn.sojourn import ExcursionSequences, first_return_excursions, gamma_table

E11, E22 = Mat2.unit(0, 0), Mat2.unit(1, 1)
I2 = Mat2.identity()


def random_series(rng: random.Random, orders, kind="scalar", density=0.4) -> BiSeries:
    gen = random_exact_mat if kind == "matrix" else random_exact_scalar
    coeffs = {
        (i, j): gen(rng)
        for i in range(orders[0] + 1)
        for j in range(orders[1] + 1)
        if rng.random() < density
    }
    return BiSeries(coeffs, orders, kind, EXACT)


def naive_product(a: BiSeries, b: BiSeries):
    nz, nt = a.orders
    matrix = "matrix" in (a.kind, b.kind)
    zero = Mat2.zeros() if matrix else ExactComplex(0)
    out = {}
    for i in range(nz + 1):
        for j in range(nt + 1):
            acc = zero
            for i1 in range(i + 1):
                for j1 in range(j + 1):
                    x, y = a.coefficient(i1, j1), b.coefficient(i - i1, j - j1)
                    acc = acc + (x @ y if matrix else x * y)
            if acc:
                out[(i, j)] = acc
    return out


class TestArithmetic:
    @pytest.mark.parametrize("kind", ["scalar", "matrix"])
    def test_product_matches_naive_convolution(self, kind):
        rng = random.Random(11)
        for order in (3, 8, 16):
            a = random_series(rng, (order, order), kind, 0.3)
            b = random_series(rng, (order, order), kind, 0.3)
            assert (a * b).coeffs == naive_product(a, b)

    def test_zero_and_one(self):
        rng = random.Random(3)
        a = random_series(rng, (6, 6), "matrix")
        assert not (a * BiSeries.zero((6, 6), "matrix"))
        assert a * BiSeries.one((6, 6), "matrix") == a
        assert BiSeries.one((6, 6), "matrix") * a == a

    def test_truncation_respected(self):
        z = BiSeries({(1, 0): ExactComplex(1)}, (3, 3))
        p = z * z * z * z
        assert not p
        assert (z * z).coeffs == {(2, 0): 1}

    def test_mixed_orders_take_minimum(self):
        a = BiSeries({(1, 1): ExactComplex(1)}, (5, 5))
        b = BiSeries({(1, 1): ExactComplex(1)}, (2, 4))
        assert (a + b).orders == (2, 4)
        assert (a * b).coeffs == {(2, 2): 1}

    def test_overflow(self):
        with pytest.raises(TruncationOverflow):
            BiSeries({(4, 0): ExactComplex(1)}, (3, 3))
        with pytest.raises(TruncationOverflow):
            series_from_table({(4, 0): ExactComplex(1)}, (3, 3))


class TestSeriesFromTable:
    def test_examples(self):
        assert series_from_table({(1, 0): ExactComplex(1)}, (4, 4)).coeffs == {(1, 0): 1}
        assert not series_from_table({}, (4, 4))

    def test_drops_time_zero_row(self):
        s = series_from_table({(0, 0): ExactComplex(5), (2, 1): ExactComplex(1)}, (4, 4))
        assert s.coeffs == {(2, 1): 1}


class TestSymmetrize:
    def test_examples(self):
        one = ExactComplex(1)
        assert not symmetrize(BiSeries({(1, 1): one}, (4, 4)))
        assert symmetrize(BiSeries({(2, 2): one}, (4, 4))).coeffs == {(2, 2): 4}
        assert symmetrize(BiSeries({(1, 0): one, (2, 0): one}, (4, 4))).coeffs == {(2, 0): 4}

    @pytest.mark.parametrize("kind", ["scalar", "matrix"])
    def test_random_series(self, kind):
        rng = random.Random(5)
        for _ in range(100 if kind == "scalar" else 20):
            s = random_series(rng, (7, 7), kind)
            out = symmetrize(s)
            for (i, j), c in out.coeffs.items():
                assert i % 2 == 0 and j % 2 == 0
            for (i, j), c in s.coeffs.items():
                if i % 2 == 0 and j % 2 == 0:
                    assert out.coefficient(i, j) == c * 4


class TestClosedForm:
    def test_grover_X(self):
        x = build_X(first_return_excursions(grover(), 20), (20, 20))
        assert x.coeffs == {(2, 2): E11, (2, 0): E22}

    def test_grover_neumann(self):
        x = build_X(first_return_excursions(grover(), 20), (20, 20))
        y = neumann_inverse_times(x)
        expected = {(2 * n, 2 * n): E11 for n in range(1, 11)}
        expected.update({(2 * n, 0): E22 for n in range(1, 11)})
        assert y.coeffs == expected

    def test_neumann_scalar_geometric(self):
        x = BiSeries({(1, 0): I2}, (10, 2), "matrix")
        assert neumann_inverse_times(x).coeffs == {(i, 0): I2 for i in range(1, 11)}

    def test_neumann_zero(self):
        assert not neumann_inverse_times(BiSeries.zero((5, 5), "matrix"))

    def test_neumann_identity_random(self):
        rng = random.Random(9)
        for _ in range(5):
            x = random_series(rng, (6, 6), "matrix", 0.3)
            x.coeffs.pop((0, 0), None)
            y = neumann_inverse_times(x, verify=False)
            assert y * (BiSeries.one((6, 6), "matrix") - x) == x

    def test_neumann_rejects_constant_term(self):
        with pytest.raises(NonNilpotentConstantTerm):
            neumann_inverse_times(BiSeries({(0, 0): I2}, (3, 3), "matrix"))

    def test_grover_direct_examples(self):
        g = gamma_bar_direct(gamma_table(grover(), 10), (10, 10))
        assert g.coefficient(4, 4) == E11
        assert not g.coefficient(4, 2)
        assert all(i % 2 == 0 for i, _ in g.coeffs)
        assert (4, 0) in g.coeffs
        strict = gamma_bar_direct(gamma_table(grover(), 10), (10, 10), strict=True)
        assert all(j > 0 for _, j in strict.coeffs)

    def test_hadamard_full_series_agrees(self):
        n = 16
        direct = gamma_bar_direct(gamma_table(hadamard(), n), (n, n))
        neumann = neumann_inverse_times(build_X(first_return_excursions(hadamard(), n), (n, n)))
        assert neumann == direct

    def test_float_closed_form(self):
        n = 40
        direct = gamma_bar_direct(gamma_table(hadamard(FLOAT), n), (n, n))
        neumann = neumann_inverse_times(build_X(first_return_excursions(hadamard(FLOAT), n), (n, n)))
        assert neumann.max_abs_diff(direct) < 1e-12


class TestDiagnostics:
    def test_grover_entry(self):
        g = gamma_bar_direct(gamma_table(grover(), 40), (40, 40))
        rep = convergence_diagnostics(g)
        e = rep.entry("(1,1)")
        assert e.points[0].partial_sums[-1] == 20
        assert all(e.points[0].partial_sums[m] == m // 2 for m in range(41))
        assert e.points[0].divergent and e.decay_class == NON_DECAYING
        assert rep.divergent(0)

    def test_geometric_series(self):
        s = BiSeries({(n, 0): ExactComplex.from_parts(Fraction(1, 2 ** n)) for n in range(1, 41)},
                     (40, 40))
        rep = convergence_diagnostics(s, [(1, 1)])
        e = rep.entry("scalar")
        assert not rep.divergent(0)
        assert e.radius_estimate == pytest.approx(2, abs=0.1)
        assert e.decay_class == FASTER

    def test_zero_series(self):
        rep = convergence_diagnostics(BiSeries.zero((20, 20)))
        assert not rep.divergent(0) and rep.decay_class == FASTER

    def test_harmonic_like_terms_are_polynomial(self):
        s = BiSeries({(n, 0): complex(n ** -1.5) for n in range(1, 61)}, (60, 60))
        rep = convergence_diagnostics(s)
        assert rep.decay_class == POLYNOMIAL and not rep.divergent(0)

    def test_bounded_oscillation_counts_as_divergent(self):
        s = BiSeries({(n, 0): ExactComplex((-1) ** n) for n in range(1, 41)}, (40, 40))
        rep = convergence_diagnostics(s)
        p = rep.entry("scalar").points[0]
        assert not p.growth_flag and p.term_flag and p.divergent

    def test_multiple_points_and_exact_evaluation(self):
        g = gamma_bar_direct(gamma_table(grover(), 20), (20, 20))
        rep = convergence_diagnostics(g, [(1, 1), (Fraction(1, 2), 1)])
        e = rep.entry("(1,1)")
        assert isinstance(e.points[1].final_sum, ExactComplex)
        assert not e.points[1].divergent

    def test_insufficient_order(self):
        with pytest.raises(InsufficientOrder):
            convergence_diagnostics(BiSeries.zero((10, 10)))

    def test_classify_decay_edges(self):
        assert classify_decay([])[0] == FASTER
        assert classify_decay([1.0] * 40)[0] == NON_DECAYING
        assert classify_decay([0.5 ** m for m in range(40)])[0] == FASTER

    def test_report_serializes(self):
        import json

        g = gamma_bar_direct(gamma_table(grover(), 20), (20, 20))
        doc = convergence_diagnostics(g, normalization="4x").to_dict()
        json.dumps(doc, allow_nan=False)
        assert doc["normalization"] == "4x" and doc["divergent"] == [True]


def test_excursions_zero_series():
    empty = ExcursionSequences("exact", 4, {1: Mat2.zeros(), 2: Mat2.zeros()},
                               {1: Mat2.zeros(), 2: Mat2.zeros()})
    assert not build_X(empty, (4, 4))
