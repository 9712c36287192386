"""Adaptive pairing engine: rule exactness, oracle masses, error honesty,
determinism, budget reporting, and the two-chart atlas."""

import math

import numpy as np
import pytest

from mixedma.errors import BidegreeError, ChartMismatchError, DimensionMismatchError, RangeError
from mixedma.exterior import BidegreeForm, hermitian_to_form
from mixedma.potentials import (
    Cutoff,
    HoloPolynomial,
    HoloTuple,
    QpshFunction,
    Smoother,
    SmoothPotential,
    LogOnePlusSquaresTerm,
)
from mixedma.quadrature import (
    Box,
    ChartData,
    ProjectiveLineAtlas,
    QuadratureSettings,
    TestFunction,
    gauss_tensor_integral,
    p1_mass,
    pair_partial,
    pair_product,
    stokes_check,
)
from mixedma.regularizer import (
    FactorSpec,
    FubiniStudyOneOneForm,
    ProductSpec,
    zero_one_one,
)
from mixedma.scenarios import default_smoother

RHO = default_smoother()
LOG_C1 = QpshFunction(1.0, HoloTuple((HoloPolynomial.coordinate(1, 0),)), SmoothPotential.zero(1))


def c1_mass_spec():
    return ProductSpec((FactorSpec(phi=LOG_C1, theta=zero_one_one(1), eta=zero_one_one(1), m=1, smoother=RHO),))


class TestRuleExactness:
    def test_polynomial_exactness_on_sampled_boxes(self):
        rng = np.random.default_rng(17)
        for _ in range(4):
            center = rng.normal(0.0, 0.5, size=1) + 1j * rng.normal(0.0, 0.5, size=1)
            hw = rng.uniform(0.3, 1.2, size=2)
            box = Box(center, hw)

            # real polynomial of degree (7, 9) in (x, y): inside GL8 exactness
            def f(z):
                x = z[:, 0].real
                y = z[:, 0].imag
                return 0.4 * x ** 7 - 1.3 * x ** 4 * y ** 5 + 0.7 * y ** 9 + 2.0

            got = gauss_tensor_integral(f, box, order=8)
            lo, hi = box.bounds()

            def exact_1d(p, a, b):
                return (b ** (p + 1) - a ** (p + 1)) / (p + 1)

            expected = (
                0.4 * exact_1d(7, lo[0], hi[0]) * (hi[1] - lo[1])
                - 1.3 * exact_1d(4, lo[0], hi[0]) * exact_1d(5, lo[1], hi[1])
                + 0.7 * (hi[0] - lo[0]) * exact_1d(9, lo[1], hi[1])
                + 2.0 * (hi[0] - lo[0]) * (hi[1] - lo[1])
            )
            assert got == pytest.approx(expected, rel=1e-13)


class TestMassOracle:
    def test_c1_mass_is_one_and_converged(self):
        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([2.0, 2.0]))
        settings = QuadratureSettings(order=12, rel_tol=1e-7, abs_floor=1e-13)
        est = pair_product(spec, [8.0], None, box, settings)
        assert est.converged
        assert est.value == pytest.approx(1.0, abs=1e-6)

    def test_error_estimate_honesty(self):
        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([2.0, 2.0]))
        settings = QuadratureSettings(order=12, rel_tol=1e-7, abs_floor=1e-13)
        for j in (4.0, 8.0, 12.0):
            est = pair_product(spec, [j], None, box, settings)
            true_err = abs(est.value - 1.0)
            assert true_err <= 10.0 * max(est.error, 1e-13)

    def test_dirac_pairing_at_deep_level(self):
        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([1.0, 1.0]))
        psi = TestFunction(np.zeros(1, dtype=complex), np.array([0.5]))
        settings = QuadratureSettings(order=12, rel_tol=3e-6, abs_floor=1e-12)
        est = pair_product(spec, [14.0], psi, box, settings)
        assert est.value == pytest.approx(1.0, abs=1e-3)

    def test_zero_integrand_region(self):
        # all chi == 0 over the box and eta = 0: exact zero
        spec = c1_mass_spec()
        box = Box(np.array([10.0 + 0j]), np.array([0.5, 0.5]))  # far from the shell
        settings = QuadratureSettings(order=8)
        est = pair_product(spec, [4.0], None, box, settings)
        assert est.value == 0.0
        assert est.converged


class TestDeterminism:
    def test_bit_identical_estimates(self):
        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([2.0, 2.0]))
        settings = QuadratureSettings(order=8, rel_tol=1e-6)
        a = pair_product(spec, [6.0], None, box, settings)
        b = pair_product(spec, [6.0], None, box, settings)
        assert a.value == b.value and a.error == b.error
        assert a.cells == b.cells and a.evals == b.evals

    def test_worker_count_independence(self):
        import dataclasses

        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([2.0, 2.0]))
        base = QuadratureSettings(order=8, rel_tol=1e-6, workers=1)
        multi = dataclasses.replace(base, workers=4)
        a = pair_product(spec, [6.0], None, box, base)
        b = pair_product(spec, [6.0], None, box, multi)
        assert a.value == b.value and a.error == b.error and a.cells == b.cells


class TestBudget:
    def test_budget_exhaustion_reported(self):
        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([2.0, 2.0]))
        settings = QuadratureSettings(order=8, rel_tol=1e-9, max_cells=8)
        est = pair_product(spec, [8.0], None, box, settings)
        assert not est.converged

    def test_depth_limited_level_reported(self):
        # the shell of j = 60 cannot be resolved at depth 14 in this box
        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([2.0, 2.0]))
        settings = QuadratureSettings(order=8, rel_tol=1e-6, max_depth=14)
        est = pair_product(spec, [60.0], None, box, settings)
        assert not est.converged


class TestValidation:
    def test_degree_must_reach_top(self):
        phi2 = QpshFunction(
            1.0, HoloTuple((HoloPolynomial.coordinate(2, 0),)), SmoothPotential.zero(2)
        )
        spec = ProductSpec((FactorSpec(phi=phi2, theta=zero_one_one(2), eta=zero_one_one(2), m=1, smoother=RHO),))
        box = Box(np.zeros(2, dtype=complex), np.full(4, 1.0))
        with pytest.raises(BidegreeError):
            pair_product(spec, [4.0], None, box, QuadratureSettings())

    def test_bump_must_fit_in_box(self):
        spec = c1_mass_spec()
        box = Box(np.zeros(1, dtype=complex), np.array([0.4, 0.4]))
        psi = TestFunction(np.zeros(1, dtype=complex), np.array([0.5]))
        with pytest.raises(RangeError):
            pair_product(spec, [4.0], psi, box, QuadratureSettings())


class TestPairPartial:
    def test_slice_pairing_against_reference(self):
        # single factor log|z1|^2 in C^2 against (i/2pi) dz2^dzbar2:
        # the limit current integrates psi over the plane {z1 = 0}; for the
        # product bump the slice integral is R^2 * int_0^1 B = R^2 / 2
        phi = QpshFunction(
            1.0, HoloTuple((HoloPolynomial.coordinate(2, 0),)), SmoothPotential.zero(2)
        )
        spec = ProductSpec((FactorSpec(phi=phi, theta=zero_one_one(2), eta=zero_one_one(2), m=1, smoother=RHO),))
        tau = hermitian_to_form(np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex))
        box = Box(np.zeros(2, dtype=complex), np.full(4, 1.0))
        psi = TestFunction(np.zeros(2, dtype=complex), np.full(2, 0.9))
        settings = QuadratureSettings(order=10, rel_tol=1e-4, abs_floor=1e-10, max_cells=40_000)
        est = pair_partial(spec, [10.0], tau, psi, box, settings)
        expected = 0.9 ** 2 / 2.0
        assert est.value == pytest.approx(expected, abs=1e-3)

    def test_reversed_orientation_flips_sign(self):
        phi = QpshFunction(
            1.0, HoloTuple((HoloPolynomial.coordinate(2, 0),)), SmoothPotential.zero(2)
        )
        spec = ProductSpec((FactorSpec(phi=phi, theta=zero_one_one(2), eta=zero_one_one(2), m=1, smoother=RHO),))
        tau = BidegreeForm(2, 1, 1, {((1,), (1,)): 1j / (2.0 * math.pi)})
        tau_rev = tau * (-1.0)
        box = Box(np.zeros(2, dtype=complex), np.full(4, 1.0))
        psi = TestFunction(np.zeros(2, dtype=complex), np.full(2, 0.9))
        settings = QuadratureSettings(order=8, rel_tol=1e-3, abs_floor=1e-10, max_cells=5_000)
        a = pair_partial(spec, [4.0], tau, psi, box, settings)
        b = pair_partial(spec, [4.0], tau_rev, psi, box, settings)
        assert a.value == pytest.approx(-b.value, rel=1e-12)

    def test_degree_validation(self):
        spec = c1_mass_spec()
        tau = BidegreeForm(1, 1, 0, {((0,), ()): 1.0})
        box = Box(np.zeros(1, dtype=complex), np.array([1.0, 1.0]))
        with pytest.raises(BidegreeError):
            pair_partial(spec, [4.0], tau, None, box, QuadratureSettings())


class TestStokes:
    def test_smooth_weight_residual_tiny(self):
        smooth_phi = QpshFunction(
            1.0,
            HoloTuple((HoloPolynomial(1, {(0,): 3.0, (1,): 0.25}),)),
            SmoothPotential.zero(1),
        )
        box = Box(np.zeros(1, dtype=complex), np.array([1.0, 1.0]))
        psi = TestFunction(np.zeros(1, dtype=complex), np.array([0.6]))
        settings = QuadratureSettings(order=12, rel_tol=1e-9, abs_floor=1e-14)
        assert stokes_check(smooth_phi, RHO, 0.0, psi, box, settings) <= 1e-8

    def test_log_weight_residual(self):
        box = Box(np.zeros(1, dtype=complex), np.array([1.0, 1.0]))
        psi = TestFunction(np.zeros(1, dtype=complex), np.array([0.6]))
        settings = QuadratureSettings(order=12, rel_tol=1e-9, abs_floor=1e-14)
        assert stokes_check(LOG_C1, RHO, 6.0, psi, box, settings) <= 1e-6

    def test_needs_dimension_one(self):
        phi2 = QpshFunction(
            1.0, HoloTuple((HoloPolynomial.coordinate(2, 0),)), SmoothPotential.zero(2)
        )
        box = Box(np.zeros(2, dtype=complex), np.full(4, 1.0))
        psi = TestFunction(np.zeros(2, dtype=complex), np.full(2, 0.5))
        with pytest.raises(DimensionMismatchError):
            stokes_check(phi2, RHO, 2.0, psi, box, QuadratureSettings())


def green_atlas():
    one = HoloPolynomial.constant(1, 1.0)
    coord = HoloPolynomial.coordinate(1, 0)
    drop = SmoothPotential(1, (LogOnePlusSquaresTerm(-1.0, (coord,)),))
    phi0 = QpshFunction(1.0, HoloTuple((coord,)), drop)
    phi1 = QpshFunction(1.0, HoloTuple((one,)), drop)
    theta = FubiniStudyOneOneForm(1)
    return ProjectiveLineAtlas(ChartData(phi0, theta), ChartData(phi1, theta), RHO)


class TestProjectiveLine:
    def test_flat_weight_gives_chart_form_mass(self):
        one = HoloPolynomial.constant(1, 1.0)
        phi = QpshFunction(1.0, HoloTuple((one,)), SmoothPotential.zero(1))
        theta = FubiniStudyOneOneForm(1)
        atlas = ProjectiveLineAtlas(ChartData(phi, theta), ChartData(phi, theta), RHO)
        settings = QuadratureSettings(order=12, rel_tol=1e-8, abs_floor=1e-13)
        est = p1_mass(atlas, 3.0, settings)
        assert est.converged
        assert est.value == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("j", [4.0, 12.0])
    def test_green_weight_mass_is_level_independent(self, j):
        settings = QuadratureSettings(order=12, rel_tol=1e-8, abs_floor=1e-13)
        est = p1_mass(green_atlas(), j, settings)
        assert est.converged
        assert est.value == pytest.approx(1.0, abs=1e-6)

    def test_inconsistent_charts_rejected(self):
        one = HoloPolynomial.constant(1, 1.0)
        coord = HoloPolynomial.coordinate(1, 0)
        drop = SmoothPotential(1, (LogOnePlusSquaresTerm(-1.0, (coord,)),))
        phi0 = QpshFunction(1.0, HoloTuple((coord,)), drop)
        bad_phi1 = QpshFunction(1.0, HoloTuple((one,)), SmoothPotential.zero(1))
        theta = FubiniStudyOneOneForm(1)
        atlas = ProjectiveLineAtlas(ChartData(phi0, theta), ChartData(bad_phi1, theta), RHO)
        with pytest.raises(ChartMismatchError):
            p1_mass(atlas, 2.0, QuadratureSettings())
