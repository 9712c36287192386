"""Exterior algebra: hand-computed wedge products, densities, and the
algebraic laws on seeded samples."""

import math

import numpy as np
import pytest

from mixedma.errors import BidegreeError, ConjugateSymmetryError, DimensionMismatchError
from mixedma.exterior import (
    BidegreeForm,
    dz_form,
    dzbar_form,
    forms_allclose,
    hermitian_to_form,
    scalar_form,
    top_density,
    wedge,
    wedge_power,
    zero_form,
)


def random_int_form(rng, n, p, q):
    from itertools import combinations

    coeffs = {}
    for I in combinations(range(n), p):
        for J in combinations(range(n), q):
            c = complex(rng.integers(-3, 4), rng.integers(-3, 4))
            if c != 0:
                coeffs[(I, J)] = c
    return BidegreeForm(n, p, q, coeffs)


class TestWedge:
    def test_repeated_index_is_zero(self):
        a = dz_form(2, 0)
        assert wedge(a, a).is_structurally_zero

    def test_one_form_antisymmetry(self):
        a = dz_form(2, 0)
        b = dzbar_form(2, 0)
        ab = wedge(a, b)
        ba = wedge(b, a)
        assert forms_allclose(ab, ba * (-1.0), tol=0.0)

    def test_hand_expansion_in_c2(self):
        # (dz1^dzb1 + dz2^dzb2)^2 = 2 dz1^dzb1^dz2^dzb2
        # in canonical storage dz1^dzb1^dz2^dzb2 = -dz12^dzb12
        omega = BidegreeForm(2, 1, 1, {((0,), (0,)): 1.0, ((1,), (1,)): 1.0})
        square = wedge(omega, omega)
        assert square.coefficient((0, 1), (0, 1)) == pytest.approx(-2.0)
        assert len(square.coeffs) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            wedge(dz_form(1, 0), dz_form(2, 0))

    def test_degree_cap_gives_zero_form(self):
        a = dz_form(1, 0)
        b = dz_form(1, 0)
        out = wedge(a, b)
        assert out.p == 2 and out.is_structurally_zero


class TestWedgePower:
    def test_power_zero_is_scalar_one(self):
        a = hermitian_to_form(np.eye(2))
        out = wedge_power(a, 0)
        assert out.coefficient((), ()) == pytest.approx(1.0)

    def test_rank_one_square_vanishes(self):
        a = BidegreeForm(2, 1, 1, {((0,), (0,)): 1.0})
        assert wedge_power(a, 2).max_abs() == 0.0

    def test_fubini_study_square_at_origin(self):
        # H = identity at z = 0: the square has density 2 / pi^2
        omega = hermitian_to_form(np.eye(2))
        square = wedge_power(omega, 2)
        assert top_density(square) == pytest.approx(2.0 / math.pi ** 2, rel=1e-14)

    def test_requires_one_one(self):
        with pytest.raises(BidegreeError):
            wedge_power(dz_form(2, 0), 2)

    def test_matches_iterated_wedge_exactly(self):
        rng = np.random.default_rng(42)
        H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        H = H + H.conj().T
        form = hermitian_to_form(H)
        iterated = form
        for m in (2, 3):
            iterated = wedge(iterated, form)
            assert forms_allclose(wedge_power(form, m), iterated, tol=0.0)


class TestTopDensity:
    def test_c1_normalization(self):
        form = BidegreeForm(1, 1, 1, {((0,), (0,)): 1j / (2.0 * math.pi)})
        assert top_density(form) == pytest.approx(1.0 / math.pi, rel=1e-14)

    def test_zero_form(self):
        assert top_density(zero_form(1, 1, 1)) == 0.0

    def test_c2_squared_normalization(self):
        omega = hermitian_to_form(np.eye(2))
        assert top_density(wedge_power(omega, 2)) == pytest.approx(
            2.0 / math.pi ** 2, rel=1e-14
        )

    def test_wrong_bidegree(self):
        with pytest.raises(BidegreeError):
            top_density(dz_form(1, 0))

    def test_imaginary_residue_reported(self):
        form = BidegreeForm(1, 1, 1, {((0,), (0,)): 1.0})  # density -2i * 1
        with pytest.raises(ConjugateSymmetryError):
            top_density(form)

    def test_array_coefficients(self):
        vals = np.array([1.0, 2.0, 0.0]) * (1j / (2.0 * math.pi))
        form = BidegreeForm(1, 1, 1, {((0,), (0,)): vals})
        out = top_density(form)
        assert np.allclose(out, np.array([1.0, 2.0, 0.0]) / math.pi)


class TestHermitianToForm:
    def test_identity_c1(self):
        form = hermitian_to_form(np.eye(1))
        assert form.coefficient((0,), (0,)) == pytest.approx(1j / (2.0 * math.pi))

    def test_zero_matrix(self):
        assert hermitian_to_form(np.zeros((2, 2))).is_structurally_zero

    def test_hermitian_gives_real_form(self):
        rng = np.random.default_rng(0)
        for _ in range(8):
            H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            H = H + H.conj().T
            assert hermitian_to_form(H).is_real(1e-12)

    def test_non_hermitian_not_real(self):
        H = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        assert not hermitian_to_form(H).is_real(1e-12)


class TestAlgebraicLaws:
    def test_graded_commutativity(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            degs = rng.integers(0, 2, size=4)
            a = random_int_form(rng, 3, degs[0], degs[1])
            b = random_int_form(rng, 3, degs[2], degs[3])
            sign = (-1.0) ** ((a.p + a.q) * (b.p + b.q))
            assert forms_allclose(wedge(a, b), wedge(b, a) * sign, tol=0.0)

    def test_associativity_exact(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            degs = rng.integers(0, 2, size=6)
            a = random_int_form(rng, 3, degs[0], degs[1])
            b = random_int_form(rng, 3, degs[2], degs[3])
            c = random_int_form(rng, 3, degs[4], degs[5])
            assert forms_allclose(wedge(wedge(a, b), c), wedge(a, wedge(b, c)), tol=0.0)

    def test_bilinearity_exact(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = random_int_form(rng, 3, 1, 0)
            b = random_int_form(rng, 3, 1, 0)
            c = random_int_form(rng, 3, 1, 1)
            assert forms_allclose(
                wedge(a + b, c), wedge(a, c) + wedge(b, c), tol=0.0
            )

    def test_real_wedge_real_is_real(self):
        rng = np.random.default_rng(10)
        for _ in range(8):
            H1 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            H2 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            a = hermitian_to_form(H1 + H1.conj().T)
            b = hermitian_to_form(H2 + H2.conj().T)
            assert wedge(a, b).is_real(1e-12)

    def test_holomorphic_degree_cap(self):
        rng = np.random.default_rng(11)
        a = random_int_form(rng, 2, 1, 1)
        b = random_int_form(rng, 2, 1, 1)
        c = random_int_form(rng, 2, 1, 0)
        assert wedge(wedge(a, b), c).is_structurally_zero
