"""Weights, potentials, cut-offs and smoothers: exact values, derivative
oracles by central differences, and the transition-band invariants."""

import math

import numpy as np
import pytest

from mixedma.errors import RangeError, SingularityError
from mixedma.potentials import (
    ConstantTerm,
    Cutoff,
    HoloPolynomial,
    HoloTuple,
    LogOnePlusSquaresTerm,
    QpshFunction,
    RealPolynomialTerm,
    Smoother,
    SmoothPotential,
    cutoff_eval,
    cutoff_smoother_consistency,
    eval_phi,
    phi_derivatives,
    smoother_eval,
)

LOG_WEIGHT_C1 = QpshFunction(
    1.0, HoloTuple((HoloPolynomial.coordinate(1, 0),)), SmoothPotential.zero(1)
)


def finite_diff_grad(phi, z, h=1e-5):
    n = z.size

    def val(w):
        return phi.log_value(w.reshape(1, -1))[0]

    out = np.empty(n, dtype=complex)
    for p in range(n):
        ex = np.zeros(n, dtype=complex)
        ex[p] = h
        ey = np.zeros(n, dtype=complex)
        ey[p] = 1j * h
        dx = (val(z + ex) - val(z - ex)) / (2 * h)
        dy = (val(z + ey) - val(z - ey)) / (2 * h)
        out[p] = 0.5 * (dx - 1j * dy)
    return out


def finite_diff_hess(phi, z, h=1e-4):
    n = z.size
    out = np.empty((n, n), dtype=complex)
    for q in range(n):
        ex = np.zeros(n, dtype=complex)
        ex[q] = h
        ey = np.zeros(n, dtype=complex)
        ey[q] = 1j * h
        gx = (finite_diff_grad(phi, z + ex, h) - finite_diff_grad(phi, z - ex, h)) / (2 * h)
        gy = (finite_diff_grad(phi, z + ey, h) - finite_diff_grad(phi, z - ey, h)) / (2 * h)
        out[:, q] = 0.5 * (gx + 1j * gy)
    return out


class TestPolynomials:
    def test_evaluation_and_derivative(self):
        # f = 2 z1^2 z2 + 3
        f = HoloPolynomial(2, {(2, 1): 2.0, (0, 0): 3.0})
        pts = np.array([[1.0 + 1.0j, 2.0 + 0.0j]])
        assert f.evaluate(pts)[0] == pytest.approx((2 * (1 + 1j) ** 2 * 2) + 3)
        d0 = f.derivative(0)
        assert d0.terms == {(1, 1): 4.0}

    def test_product(self):
        z1 = HoloPolynomial.coordinate(2, 0)
        z2 = HoloPolynomial.coordinate(2, 1)
        assert (z1 * z2).terms == {(1, 1): 1.0}

    def test_monomial_abs_interval_exact(self):
        f = HoloPolynomial.monomial(2, (2, 1), coeff=3.0)
        ivs = [(0.5, 2.0), (1.0, 4.0)]
        lo, hi = f.abs_interval(ivs)
        assert lo == pytest.approx(3.0 * 0.25 * 1.0)
        assert hi == pytest.approx(3.0 * 4.0 * 4.0)


class TestEvalPhi:
    def test_log_abs_squared_at_one(self):
        assert eval_phi(LOG_WEIGHT_C1, np.array([1.0 + 0j])) == pytest.approx(0.0)

    def test_minus_infinity_on_zero_locus(self):
        assert eval_phi(LOG_WEIGHT_C1, np.array([0.0 + 0j])) == -math.inf

    def test_with_scale_and_potential(self):
        # phi = 2 log(|z1|^2 + |z2|^2) + Re(z1) at (1, 0) -> 1
        phi = QpshFunction(
            2.0,
            HoloTuple((HoloPolynomial.coordinate(2, 0), HoloPolynomial.coordinate(2, 1))),
            SmoothPotential(2, (RealPolynomialTerm.real_part_of(HoloPolynomial.coordinate(2, 0)),)),
        )
        assert eval_phi(phi, np.array([1.0 + 0j, 0.0 + 0j])) == pytest.approx(1.0)

    def test_positive_scale_required(self):
        with pytest.raises(RangeError):
            QpshFunction(-1.0, HoloTuple((HoloPolynomial.coordinate(1, 0),)), SmoothPotential.zero(1))


class TestPhiDerivatives:
    def test_log_abs_squared_off_origin(self):
        grad, hess = phi_derivatives(LOG_WEIGHT_C1, np.array([2.0 + 0j]))
        assert grad[0] == pytest.approx(0.5)
        assert abs(hess[0, 0]) == 0.0

    def test_norm_weight_hand_value(self):
        phi = QpshFunction(
            1.0,
            HoloTuple((HoloPolynomial.coordinate(2, 0), HoloPolynomial.coordinate(2, 1))),
            SmoothPotential.zero(2),
        )
        _, hess = phi_derivatives(phi, np.array([1.0 + 0j, 0.0 + 0j]))
        assert np.allclose(hess, np.array([[0.0, 0.0], [0.0, 1.0]]), atol=1e-15)

    def test_singularity_error(self):
        with pytest.raises(SingularityError):
            phi_derivatives(LOG_WEIGHT_C1, np.array([0.0 + 0j]))

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        weights = [
            LOG_WEIGHT_C1,
            QpshFunction(
                2.0,
                HoloTuple((HoloPolynomial.coordinate(2, 0), HoloPolynomial.coordinate(2, 1))),
                SmoothPotential(2, (LogOnePlusSquaresTerm(1.5, (HoloPolynomial.coordinate(2, 1),)),)),
            ),
            QpshFunction(
                0.75,
                HoloTuple((HoloPolynomial.monomial(2, (1, 1)),)),
                SmoothPotential(2, (RealPolynomialTerm.real_part_of(HoloPolynomial.coordinate(2, 0)),)),
            ),
        ]
        for phi in weights:
            n = phi.n
            for _ in range(3):
                z = rng.normal(0.6, 0.2, size=n) + 1j * rng.normal(-0.4, 0.2, size=n)
                grad, hess = phi_derivatives(phi, z)
                scale = max(1.0, float(np.max(np.abs(grad))), float(np.max(np.abs(hess))))
                assert np.max(np.abs(grad - finite_diff_grad(phi, z))) < 1e-6 * scale
                assert np.max(np.abs(hess - finite_diff_hess(phi, z))) < 1e-5 * scale

    def test_hessian_conjugate_symmetric(self):
        rng = np.random.default_rng(3)
        phi = QpshFunction(
            1.0,
            HoloTuple((HoloPolynomial.coordinate(2, 0), HoloPolynomial.monomial(2, (1, 2)))),
            SmoothPotential(2, (LogOnePlusSquaresTerm(-0.5, (HoloPolynomial.coordinate(2, 0),)),)),
        )
        pts = rng.normal(0.5, 0.3, size=(16, 2)) + 1j * rng.normal(0.0, 0.3, size=(16, 2))
        _, hess = phi.derivatives(pts)
        assert np.max(np.abs(hess - np.conj(np.swapaxes(hess, -1, -2)))) < 1e-13


class TestCutoff:
    def test_below_and_above_support(self):
        cut = Cutoff(math.exp(-1.0), math.e)
        val, der = cutoff_eval(cut, cut.a / 2.0)
        assert val == 0.0 and der == 0.0
        val, der = cutoff_eval(cut, 2.0 * cut.b)
        assert val == 1.0 and der == 0.0

    def test_midpoint_value_half(self):
        for profile in ("quintic", "exponential"):
            cut = Cutoff(math.exp(-1.0), math.e, profile)
            val, _ = cutoff_eval(cut, math.sqrt(cut.a * cut.b))
            assert val == pytest.approx(0.5, abs=1e-12)

    def test_nonpositive_argument_rejected(self):
        cut = Cutoff(math.exp(-1.0), math.e)
        with pytest.raises(RangeError):
            cutoff_eval(cut, 0.0)

    def test_monotone_with_nonnegative_slope(self):
        for profile in ("quintic", "exponential"):
            cut = Cutoff(0.25, 4.0, profile)
            t = np.linspace(1e-3, 10.0, 4001)
            val, der = cutoff_eval(cut, t)
            assert np.all(der >= 0)
            assert np.all(np.diff(val) >= -1e-15)
            assert np.all((val >= 0) & (val <= 1))

    def test_thresholds_validated(self):
        with pytest.raises(RangeError):
            Cutoff(2.0, 1.0)


class TestSmoother:
    def test_identity_region(self):
        rho = Smoother(Cutoff(math.exp(-1.0), math.e))
        val, first, second = smoother_eval(rho, 3.0, 2.0)  # t + j = 5 >= log b
        assert val == pytest.approx(2.0)
        assert first == pytest.approx(1.0)
        assert second == pytest.approx(0.0)

    def test_constant_region_plateau(self):
        # rho is pinned by rho(t) = t above the band, which forces the
        # plateau value log b - int chi(e^s) ds; for the quintic profile in
        # log scale that is the band midpoint, not log a
        rho = Smoother(Cutoff(math.exp(-1.0), math.e))
        assert rho.plateau == pytest.approx(0.0)
        val, first, second = smoother_eval(rho, -4.0, 2.0)  # t + j = -2 <= log a
        assert val == pytest.approx(rho.plateau + 4.0)
        assert first == 0.0 and second == 0.0

    def test_exponential_profile_pinned_the_same_way(self):
        rho = Smoother(Cutoff(math.exp(-1.0), math.e, "exponential"))
        t = np.array([2.5, 3.0])
        val = rho.rho(t)
        assert np.allclose(val, t)  # identity region
        # plateau consistency: rho(log a) = log b - band integral
        assert rho.rho(np.array([-5.0]))[0] == pytest.approx(rho.plateau)

    def test_level_family_monotone_in_j(self):
        for profile in ("quintic", "exponential"):
            rho = Smoother(Cutoff(math.exp(-1.0), math.e, profile))
            t = np.linspace(-5.0, 5.0, 801)
            prev = rho.rho_j(0.0, t)
            assert np.all(prev >= t - 1e-13)
            for j in (1.0, 2.0, 5.0, 11.0):
                cur = rho.rho_j(j, t)
                assert np.all(cur <= prev + 1e-12)
                prev = cur
            # large j pushes every sampled t into the identity region
            assert np.max(np.abs(rho.rho_j(40.0, t) - t)) < 1e-12

    def test_convexity_numerically(self):
        for profile in ("quintic", "exponential"):
            rho = Smoother(Cutoff(math.exp(-1.0), math.e, profile))
            tau = np.linspace(-3.0, 3.0, 2001)
            assert np.all(rho.dchi_log(tau) >= -1e-14)

    def test_closed_form_matches_quadrature_of_slope(self):
        rho = Smoother(Cutoff(math.exp(-1.0), math.e))
        from scipy.integrate import quad

        for tau in (-0.5, 0.2, 0.9):
            integral, _ = quad(lambda s: float(rho.chi_log(np.array([s]))[0]), math.log(rho.cutoff.a), tau, epsabs=1e-13)
            assert float(rho.rho(np.array([tau]))[0]) == pytest.approx(rho.plateau + integral, abs=1e-11)


class TestConsistencyIdentity:
    def test_unit_point_both_sides_equal(self):
        rho = Smoother(Cutoff(math.exp(-1.0), math.e))
        for j in (-1.0, 0.0, 2.5):
            res = cutoff_smoother_consistency(LOG_WEIGHT_C1, rho, j, np.array([1.0 + 0j]))
            assert res <= 1e-12

    def test_seeded_points_and_weights(self):
        rng = np.random.default_rng(12)
        rho = Smoother(Cutoff(math.exp(-1.0), math.e))
        phi = QpshFunction(
            2.0,
            HoloTuple((HoloPolynomial.coordinate(1, 0),)),
            SmoothPotential(1, (RealPolynomialTerm.real_part_of(HoloPolynomial.coordinate(1, 0)),)),
        )
        for _ in range(20):
            z = rng.normal(0.8, 0.5, size=1) + 1j * rng.normal(0.0, 0.5, size=1)
            if abs(z[0]) < 1e-6:
                continue
            j = float(rng.uniform(-3.0, 5.0))
            assert cutoff_smoother_consistency(phi, rho, j, z) <= 1e-12

    def test_on_zero_locus_rejected(self):
        rho = Smoother(Cutoff(math.exp(-1.0), math.e))
        with pytest.raises(SingularityError):
            cutoff_smoother_consistency(LOG_WEIGHT_C1, rho, 0.0, np.array([0.0 + 0j]))


class TestIntervalBounds:
    def test_phi_interval_contains_sampled_values(self):
        from mixedma.quadrature import BoxDomain, Box

        rng = np.random.default_rng(4)
        phi = QpshFunction(
            1.0,
            HoloTuple((HoloPolynomial.monomial(2, (1, 1)),)),
            SmoothPotential(2, (LogOnePlusSquaresTerm(-1.0, (HoloPolynomial.coordinate(2, 0),)),)),
        )
        domain = BoxDomain(Box(np.zeros(2, dtype=complex), np.full(4, 1.0)))
        for _ in range(10):
            lo = rng.uniform(-1.0, 0.5, size=4)
            hi = lo + rng.uniform(0.05, 0.5, size=4)
            view = domain.cell_view(lo, hi)
            ivlo, ivhi = phi.interval(view)
            pts_r = rng.uniform(lo, hi, size=(64, 4))
            pts = pts_r[:, 0::2] + 1j * pts_r[:, 1::2]
            vals = phi.log_value(pts)
            assert np.all(vals >= ivlo - 1e-12)
            assert np.all(vals <= ivhi + 1e-12)
