"""The acceptance battery: every exit criterion as a callable check.

Each criterion returns a CriterionResult with the measured quantity, the
pinned tolerance, and a pass flag; run_all prints one line per criterion.
The same functions back the command line verify mode and the pytest
acceptance suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exterior import (
    BidegreeForm,
    forms_allclose,
    hermitian_to_form,
    scalar_form,
    top_density,
    wedge,
    wedge_power,
    zero_form,
)
from .potentials import (
    Cutoff,
    HoloPolynomial,
    HoloTuple,
    QpshFunction,
    RealPolynomialTerm,
    Smoother,
    SmoothPotential,
    cutoff_smoother_consistency,
    smoother_eval,
)
from .quadrature import Box, QuadratureSettings, TestFunction, stokes_check
from .regularizer import (
    ADMISSIBLE,
    INADMISSIBLE,
    FactorSpec,
    PolynomialSchedule,
    ProductSpec,
    check_admissible,
    eps_of_j,
    product_form,
    regularized_factor,
    residue_route,
    zero_one_one,
    _smoothed_hessian,
)
from .runner import RunConfig, run, rows_to_csv
from .scenarios import (
    default_smoother,
    evaluate_scenario,
    get_scenario,
    run_scenario,
)


@dataclass
class CriterionResult:
    name: str
    description: str
    passed: bool
    measured: Dict[str, float] = field(default_factory=dict)
    tolerance: Dict[str, float] = field(default_factory=dict)
    runtime_s: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{self.name}] {self.description}: {status}{extra} [{self.runtime_s:.1f}s]"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "passed": self.passed,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "runtime_s": self.runtime_s,
            "detail": self.detail,
        }


def _timed(fn: Callable[[], CriterionResult]) -> CriterionResult:
    t0 = time.perf_counter()
    result = fn()
    result.runtime_s = time.perf_counter() - t0
    return result


# ---------------------------------------------------------------------------
# A1 .. A8, A10: quadrature-backed criteria
# ---------------------------------------------------------------------------

def a1_mass_invariance() -> CriterionResult:
    """Total mass of the smoothed Laplacian of log|z|^2 is 1 for j in {2,6,10}."""
    def check():
        scenario = get_scenario("lelong_mass_c1")
        measured, tol = {}, {"abs_dev": 1e-6, "per_run_seconds": 5.0}
        ok = True
        detail_parts = []
        for j in (2.0, 6.0, 10.0):
            t0 = time.perf_counter()
            est = evaluate_scenario(scenario, [j])
            dt = time.perf_counter() - t0
            dev = abs(est.value - 1.0)
            measured[f"abs_dev_j{int(j)}"] = dev
            measured[f"seconds_j{int(j)}"] = dt
            ok = ok and dev <= 1e-6 and dt < 5.0 and est.converged
            detail_parts.append(f"j={int(j)}: dev={dev:.1e}")
        return CriterionResult(
            "A1", "mass invariance of dd^c(rho_j o log|z|^2) over |z|<=2",
            ok, measured, tol, detail="; ".join(detail_parts),
        )
    return _timed(check)


def a2_dirac_limit() -> CriterionResult:
    """Pairing against a bump tends to psi(0) = 1 at j = 14."""
    def check():
        scenario = get_scenario("dirac_c1")
        est = evaluate_scenario(scenario, [14.0])
        dev = abs(est.value - 1.0)
        return CriterionResult(
            "A2", "Dirac limit of the single-factor product at j=14",
            dev <= 1e-3, {"abs_dev": dev}, {"abs_dev": 1e-3},
            detail=f"value={est.value:.6f}",
        )
    return _timed(check)


def a3_mixed_admissible() -> CriterionResult:
    """Two-slot product along (nu^2, nu) at nu = 4 hits the point-mass oracle."""
    def check():
        t0 = time.perf_counter()
        table = run_scenario("coord_planes_c2", nus=[4.0])
        dt = time.perf_counter() - t0
        dev = table.final_abs_dev
        ok = dev <= 1e-2 and dt < 120.0
        return CriterionResult(
            "A3", "mixed product along the admissible path (nu^2, nu), nu=4",
            ok, {"abs_dev": dev, "seconds": dt}, {"abs_dev": 1e-2, "seconds": 120.0},
            detail=f"value={table.rows[-1].value:.6f}, t={dt:.1f}s",
        )
    return _timed(check)


def a4_order_dependence() -> CriterionResult:
    """Identical factor sets in opposite order converge to 1 and to 0."""
    def check():
        ta = run_scenario("noncomm_A", nus=[4.0])
        tb = run_scenario("noncomm_B", nus=[4.0])
        dev_a = abs(ta.rows[-1].value - 1.0)
        dev_b = abs(tb.rows[-1].value - 0.0)
        ok = dev_a <= 5e-3 and dev_b <= 5e-3
        return CriterionResult(
            "A4", "order dependence of the two-slot product",
            ok, {"abs_dev_A": dev_a, "abs_dev_B": dev_b},
            {"abs_dev_A": 5e-3, "abs_dev_B": 5e-3},
            detail=f"A={ta.rows[-1].value:.5f}, B={tb.rows[-1].value:.2e}",
        )
    return _timed(check)


def a5_king_mass() -> CriterionResult:
    """Tuple weight: squared factor of log ||z||^2 pairs to psi(0) at j=10."""
    def check():
        scenario = get_scenario("king_c2")
        est = evaluate_scenario(scenario, [10.0])
        dev = abs(est.value - 1.0)
        return CriterionResult(
            "A5", "King mass of the squared tuple factor at j=10",
            dev <= 1e-3, {"abs_dev": dev}, {"abs_dev": 1e-3},
            detail=f"value={est.value:.6f}",
        )
    return _timed(check)


def a6_p1_mass_formula() -> CriterionResult:
    """Two-chart mass of theta + dd^c(rho_j o phi) equals 1 for every j."""
    def check():
        scenario = get_scenario("p1_mass")
        measured, ok, parts = {}, True, []
        for j in (0.0, 4.0, 8.0, 12.0):
            est = evaluate_scenario(scenario, [j])
            dev = abs(est.value - 1.0)
            measured[f"abs_dev_j{int(j)}"] = dev
            ok = ok and dev <= 1e-6 and est.converged
            parts.append(f"j={int(j)}: dev={dev:.1e}")
        return CriterionResult(
            "A6", "projective-line mass formula across j in {0,4,8,12}",
            ok, measured, {"abs_dev": 1e-6}, detail="; ".join(parts),
        )
    return _timed(check)


def a7_theta_background() -> CriterionResult:
    """Nonzero background form: bracket square tracks its reference value."""
    def check():
        table = run_scenario("theta_mixed_c2", nus=[2.0, 4.0, 8.0])
        dev = table.final_abs_dev
        return CriterionResult(
            "A7", "bracket square with constant background along schedule nu",
            dev <= 1e-2, {"final_abs_dev": dev}, {"final_abs_dev": 1e-2},
            detail=f"value={table.rows[-1].value:.6f}, oracle={table.oracle.value:.6f}",
        )
    return _timed(check)


def a8_residue_kernels() -> CriterionResult:
    """Residue kernels against the Cauchy-Pompeiu oracle."""
    def check():
        j4 = -math.log(1e-4)
        est1 = evaluate_scenario(get_scenario("cauchy_a", a=1), [j4])
        dev1 = abs(est1.value - 1.0)
        est2 = evaluate_scenario(get_scenario("cauchy_a", a=2), [j4])
        dev2 = abs(est2.value - 0.0)
        ok = dev1 <= 1e-3 and dev2 <= 5e-3
        return CriterionResult(
            "A8", "residue kernel pairings at eps = 1e-4 (a = 1, 2)",
            ok, {"abs_dev_a1": dev1, "abs_dev_a2": dev2},
            {"abs_dev_a1": 1e-3, "abs_dev_a2": 5e-3},
            detail=f"a=1: {est1.value:.6f}; a=2: {est2.value:.2e}",
        )
    return _timed(check)


# ---------------------------------------------------------------------------
# A9: property suites
# ---------------------------------------------------------------------------

def _random_int_form(rng, n: int, p: int, q: int) -> BidegreeForm:
    """Form with small Gaussian-integer coefficients (products stay exact)."""
    from itertools import combinations

    coeffs = {}
    for I in combinations(range(n), p):
        for J in combinations(range(n), q):
            c = complex(rng.integers(-3, 4), rng.integers(-3, 4))
            if c != 0:
                coeffs[(I, J)] = c
    return BidegreeForm(n, p, q, coeffs)


def _check_exterior_laws() -> Tuple[bool, str]:
    rng = np.random.default_rng(20240811)
    n = 3
    for _ in range(12):
        degs = rng.integers(0, 2, size=6)
        a = _random_int_form(rng, n, degs[0], degs[1])
        b = _random_int_form(rng, n, degs[2], degs[3])
        c = _random_int_form(rng, n, degs[4], degs[5])
        sign = (-1.0) ** ((a.p + a.q) * (b.p + b.q))
        if not forms_allclose(wedge(a, b), wedge(b, a) * sign, tol=0.0):
            return False, "graded commutativity failed"
        left = wedge(wedge(a, b), c)
        right = wedge(a, wedge(b, c))
        if not forms_allclose(left, right, tol=0.0):
            return False, "associativity failed"
        lin = wedge(a + b, c)
        split = wedge(a, c) + wedge(b, c)
        if not forms_allclose(lin, split, tol=0.0):
            return False, "bilinearity failed"
    # degree cap and iterated powers
    one_one = _random_int_form(rng, 2, 1, 1)
    if not wedge(wedge_power(one_one, 2), one_one).is_structurally_zero:
        return False, "degree cap failed"
    rng2 = np.random.default_rng(7)
    H = rng2.normal(size=(3, 3)) + 1j * rng2.normal(size=(3, 3))
    H = H + H.conj().T
    form = hermitian_to_form(H)
    iterated = form
    power = wedge_power(form, 1)
    for m in (2, 3):
        iterated = wedge(iterated, form)
        power = wedge_power(form, m)
        if not forms_allclose(power, iterated, tol=0.0):
            return False, f"wedge_power != iterated wedge at m={m}"
        if not power.is_real(1e-12):
            return False, "power of a real form is not real"
    return True, "exterior laws exact"


def _check_smoother_invariants() -> Tuple[bool, str]:
    for profile in ("quintic", "exponential"):
        cut = Cutoff(math.exp(-1.0), math.e, profile)
        rho = Smoother(cut)
        t = np.linspace(-6.0, 6.0, 2001)
        chi = cut.chi_log(np.log(np.linspace(1e-3, 20.0, 2001)))
        if np.any(chi < 0) or np.any(chi > 1) or np.any(np.diff(chi) < -1e-14):
            return False, f"{profile}: cut-off range or monotonicity failed"
        val, first, second = smoother_eval(rho, 0.0, t)
        if np.any(first < 0) or np.any(first > 1 + 1e-14):
            return False, f"{profile}: rho' outside [0, 1]"
        if np.any(second < -1e-12):
            return False, f"{profile}: rho'' negative (convexity)"
        if np.any(val < t - 1e-12):
            return False, f"{profile}: rho_j(t) >= t failed"
        prev = val
        for j in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
            cur, _, _ = smoother_eval(rho, j, t)
            if np.any(cur > prev + 1e-12):
                return False, f"{profile}: rho_j not nonincreasing in j"
            prev = cur
        if np.max(np.abs(prev - t)) > 1e-6:
            # j = 16 pushes every sampled t into the identity region
            return False, f"{profile}: rho_j(t) does not approach t"
    return True, "cut-off and smoother invariants hold"


def _check_derivative_oracles() -> Tuple[bool, str]:
    rng = np.random.default_rng(11)
    weights = [
        QpshFunction(1.0, HoloTuple((HoloPolynomial.coordinate(1, 0),)), SmoothPotential.zero(1)),
        QpshFunction(
            2.0,
            HoloTuple((HoloPolynomial.coordinate(2, 0), HoloPolynomial.coordinate(2, 1))),
            SmoothPotential(2, (RealPolynomialTerm.real_part_of(HoloPolynomial.coordinate(2, 0)),)),
        ),
        QpshFunction(
            0.5,
            HoloTuple((HoloPolynomial.monomial(2, (1, 1)),)),
            SmoothPotential.zero(2),
        ),
    ]
    h = 1e-5
    for phi in weights:
        n = phi.n
        for _ in range(4):
            z = rng.normal(0.4, 0.3, size=n) + 1j * rng.normal(-0.2, 0.3, size=n)
            pts = z.reshape(1, -1)
            if not np.isfinite(phi.log_value(pts)[0]):
                continue
            grad, hess = phi.derivatives(pts)
            grad, hess = grad[0], hess[0]
            if np.max(np.abs(hess - hess.conj().T)) > 1e-13 * max(1.0, np.max(np.abs(hess))):
                return False, "Hessian is not conjugate-symmetric"

            def val(w):
                return phi.log_value(w.reshape(1, -1))[0]

            scale = max(1.0, float(np.max(np.abs(hess))), float(np.max(np.abs(grad))))
            for p in range(n):
                ex = np.zeros(n, dtype=complex)
                ex[p] = h
                ey = np.zeros(n, dtype=complex)
                ey[p] = 1j * h
                dx = (val(z + ex) - val(z - ex)) / (2 * h)
                dy = (val(z + ey) - val(z - ey)) / (2 * h)
                fd_grad = 0.5 * (dx - 1j * dy)
                if abs(fd_grad - grad[p]) > 1e-6 * scale:
                    return False, f"gradient mismatch at slot {p}"
                for q in range(n):
                    fx = np.zeros(n, dtype=complex)
                    fx[q] = h
                    fy = np.zeros(n, dtype=complex)
                    fy[q] = 1j * h

                    def d_p(w):
                        gx = (val(w + ex) - val(w - ex)) / (2 * h)
                        gy = (val(w + ey) - val(w - ey)) / (2 * h)
                        return 0.5 * (gx - 1j * gy)

                    ddx = (d_p(z + fx) - d_p(z - fx)) / (2 * h)
                    ddy = (d_p(z + fy) - d_p(z - fy)) / (2 * h)
                    fd_hess = 0.5 * (ddx + 1j * ddy)
                    if abs(fd_hess - hess[p, q]) > 1e-5 * scale:
                        return False, f"Hessian mismatch at ({p},{q})"
    return True, "derivatives match central finite differences"


def _check_positivity() -> Tuple[bool, str]:
    rng = np.random.default_rng(5)
    rho = default_smoother()
    weights = [
        QpshFunction(1.0, HoloTuple((HoloPolynomial.coordinate(2, 0),)), SmoothPotential.zero(2)),
        QpshFunction(
            1.5,
            HoloTuple((HoloPolynomial.coordinate(2, 0), HoloPolynomial.coordinate(2, 1))),
            SmoothPotential.zero(2),
        ),
        QpshFunction(0.7, HoloTuple((HoloPolynomial.monomial(2, (2, 1)),)), SmoothPotential.zero(2)),
    ]
    for phi in weights:
        for j in (0.0, 3.0, 7.0):
            pts = rng.normal(0.0, 0.5, size=(64, 2)) + 1j * rng.normal(0.0, 0.5, size=(64, 2))
            H, _ = _smoothed_hessian(phi, rho, j, pts)
            eigs = np.linalg.eigvalsh(H)
            if float(np.min(eigs)) < -1e-10:
                return False, f"Hessian eigenvalue {np.min(eigs):.2e} below -1e-10"
    return True, "regularized Hessians are PSD"


def _check_route_agreement() -> Tuple[bool, str]:
    rng = np.random.default_rng(3)
    rho = default_smoother()
    theta = zero_one_one(2)
    import numpy as _np

    M = _np.array([[0.8, 0.1 + 0.2j], [0.1 - 0.2j, 1.2]])
    from .regularizer import ConstantOneOneForm

    phi = QpshFunction(
        1.0,
        HoloTuple((HoloPolynomial.monomial(2, (1, 1)),)),
        SmoothPotential(2, (RealPolynomialTerm.real_part_of(HoloPolynomial.coordinate(2, 1)),)),
    )
    spec = FactorSpec(
        phi=phi, theta=ConstantOneOneForm(M), eta=ConstantOneOneForm(0.3 * _np.eye(2)),
        m=2, smoother=rho,
    )
    j = 4.0
    worst = 0.0
    count = 0
    while count < 24:
        z = rng.normal(0.0, 0.6, size=2) + 1j * rng.normal(0.0, 0.6, size=2)
        pts = z.reshape(1, -1)
        tau = phi.log_value(pts)[0] + j
        if not (rho.cutoff.log_a - 2 < tau < rho.cutoff.log_b + 2):
            continue
        count += 1
        direct = regularized_factor(spec, j, pts)
        expanded = residue_route(spec, j, pts)
        scale = max(direct.max_abs(), 1e-30)
        worst = max(worst, (direct - expanded).max_abs() / scale)
    if worst > 1e-9:
        return False, f"route disagreement {worst:.2e}"
    return True, f"chain rule and expansion agree to {worst:.1e}"


def _check_binomial_expansion() -> Tuple[bool, str]:
    rho = default_smoother()
    theta_M = np.array([[1.0, 0.2j], [-0.2j, 0.5]])
    from .regularizer import ConstantOneOneForm, ddc_smoothed

    phi = QpshFunction(
        1.0, HoloTuple((HoloPolynomial.coordinate(2, 0),)), SmoothPotential.zero(2)
    )
    theta = ConstantOneOneForm(theta_M)
    spec = FactorSpec(phi=phi, theta=theta, eta=theta, m=2, smoother=rho)
    rng = np.random.default_rng(9)
    j = 3.0
    for _ in range(12):
        z = rng.normal(0.0, 0.4, size=2) + 1j * rng.normal(0.0, 0.4, size=2)
        pts = z.reshape(1, -1)
        factor = regularized_factor(spec, j, pts)
        theta_form = hermitian_to_form(theta.hermitian(pts))
        smooth = ddc_smoothed(phi, rho, j, pts)
        expansion = zero_form(2, 2, 2)
        for ell in range(3):
            expansion = expansion + (
                wedge(wedge_power(theta_form, 2 - ell), wedge_power(smooth, ell))
                * float(math.comb(2, ell))
            )
        if not forms_allclose(factor, expansion, tol=1e-12 * max(1.0, factor.max_abs())):
            return False, "binomial expansion mismatch"
        if not factor.is_real(1e-12 * max(1.0, factor.max_abs())):
            return False, "factor output is not a real (p, p)-form"
    return True, "binomial expansion identity exact"


def _check_identity_regions() -> Tuple[bool, str]:
    rho = default_smoother()
    from .regularizer import ConstantOneOneForm

    theta = ConstantOneOneForm(np.array([[1.0, 0.0], [0.0, 2.0]]))
    eta = ConstantOneOneForm(np.array([[0.5, 0.0], [0.0, 0.25]]))
    phi = QpshFunction(
        1.0, HoloTuple((HoloPolynomial.coordinate(2, 0),)), SmoothPotential.zero(2)
    )
    spec = FactorSpec(phi=phi, theta=theta, eta=eta, m=2, smoother=rho)
    j = 0.0
    # deep inside the hole: chi == 0, factor == eta^m
    inside = np.array([[1e-4 + 0j, 0.3 + 0.1j]])
    factor = regularized_factor(spec, j, inside)
    eta_m = wedge_power(hermitian_to_form(eta.hermitian(inside)), 2)
    if not forms_allclose(factor, eta_m, tol=1e-12):
        return False, "chi == 0 region does not reduce to eta^m"
    # far outside: chi == 1 and dd^c phi = 0, factor == (theta + dd^c phi)^m
    outside = np.array([[2.5 + 0.5j, -0.4 + 0.2j]])
    factor = regularized_factor(spec, j, outside)
    theta_m = wedge_power(hermitian_to_form(theta.hermitian(outside)), 2)
    if not forms_allclose(factor, theta_m, tol=1e-12):
        return False, "chi == 1 region does not reduce to (theta + dd^c phi)^m"
    # shell support: with theta = eta = 0 the factor vanishes off the band
    plain = FactorSpec(phi=phi, theta=zero_one_one(2), eta=zero_one_one(2), m=1, smoother=rho)
    for z in (np.array([[1e-3 + 0j, 0.1 + 0j]]), np.array([[1.9 + 0j, 0.1 + 0j]])):
        if regularized_factor(plain, 0.0, z).max_abs() != 0.0:
            return False, "factor does not vanish exactly off the shell"
    return True, "identity regions and shell support exact"


def _check_consistency_and_schedules() -> Tuple[bool, str]:
    rng = np.random.default_rng(2)
    rho = default_smoother()
    phi = QpshFunction(
        2.0,
        HoloTuple((HoloPolynomial.coordinate(1, 0),)),
        SmoothPotential(1, (RealPolynomialTerm.real_part_of(HoloPolynomial.coordinate(1, 0)),)),
    )
    for _ in range(16):
        z = rng.normal(0.5, 0.4, size=1) + 1j * rng.normal(0.0, 0.4, size=1)
        if abs(z[0]) < 1e-3:
            continue
        j = float(rng.uniform(-2.0, 6.0))
        res = cutoff_smoother_consistency(phi, rho, j, z)
        if res > 1e-12:
            return False, f"cut-off/smoother mismatch {res:.2e}"
    if check_admissible(PolynomialSchedule((2, 1))) != ADMISSIBLE:
        return False, "(nu^2, nu) should be admissible"
    if check_admissible(PolynomialSchedule((1, 1))) != INADMISSIBLE:
        return False, "(nu, nu) should be inadmissible"
    if check_admissible(PolynomialSchedule((1, 2))) != INADMISSIBLE:
        return False, "(nu, nu^2) should be inadmissible"
    js = (3.0, 1.5, 0.0)
    eps = eps_of_j(js)
    back = tuple(-math.log(e) for e in eps)
    if max(abs(a - b) for a, b in zip(js, back)) > 1e-15:
        return False, "eps/j round trip failed"
    return True, "consistency identity and schedule verdicts hold"


def _check_stokes() -> Tuple[bool, str]:
    rho = default_smoother()
    box = Box(np.zeros(1, dtype=complex), np.array([1.0, 1.0]))
    psi = TestFunction(np.zeros(1, dtype=complex), np.array([0.6]))
    settings = QuadratureSettings(order=12, rel_tol=1e-9, abs_floor=1e-14)
    # smooth case: f nonvanishing on the box
    smooth_phi = QpshFunction(
        1.0,
        HoloTuple((HoloPolynomial(1, {(0,): 3.0, (1,): 0.25}),)),
        SmoothPotential.zero(1),
    )
    res_smooth = stokes_check(smooth_phi, rho, 0.0, psi, box, settings)
    if res_smooth > 1e-8:
        return False, f"smooth Stokes residual {res_smooth:.2e}"
    log_phi = QpshFunction(
        1.0, HoloTuple((HoloPolynomial.coordinate(1, 0),)), SmoothPotential.zero(1)
    )
    res_log = stokes_check(log_phi, rho, 6.0, psi, box, settings)
    if res_log > 1e-6:
        return False, f"log-weight Stokes residual {res_log:.2e}"
    return True, f"Stokes residuals {res_smooth:.1e}, {res_log:.1e}"


def a9_property_suites() -> CriterionResult:
    def check():
        checks = [
            ("exterior", _check_exterior_laws),
            ("smoother", _check_smoother_invariants),
            ("derivatives", _check_derivative_oracles),
            ("positivity", _check_positivity),
            ("routes", _check_route_agreement),
            ("binomial", _check_binomial_expansion),
            ("regions", _check_identity_regions),
            ("consistency", _check_consistency_and_schedules),
            ("stokes", _check_stokes),
        ]
        ok = True
        details = []
        measured = {}
        for name, fn in checks:
            passed, note = fn()
            ok = ok and passed
            measured[name] = 1.0 if passed else 0.0
            if not passed:
                details.append(f"{name}: {note}")
        return CriterionResult(
            "A9", "property suites (algebra, smoothers, routes, Stokes, schedules)",
            ok, measured, {}, detail="; ".join(details) if details else "all green",
        )
    return _timed(check)


def a10_determinism() -> CriterionResult:
    """Repeating the A3 run produces bit-identical CSV."""
    def check():
        import tempfile

        from .regularizer import PolynomialSchedule

        outputs = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                csv_path = f"{tmp}/a3.csv"
                config = RunConfig(
                    mode="converge",
                    scenario="coord_planes_c2",
                    schedule=PolynomialSchedule((2, 1)),
                    nus=(4.0,),
                    csv_path=csv_path,
                )
                run(config)
                with open(csv_path, "rb") as fh:
                    outputs.append(fh.read())
        ok = outputs[0] == outputs[1] and len(outputs[0]) > 0
        return CriterionResult(
            "A10", "bit-identical CSV on repeated A3 runs",
            ok, {"bytes": float(len(outputs[0]))}, {},
            detail="identical" if ok else "CSV outputs differ",
        )
    return _timed(check)


ALL_CRITERIA = (
    a1_mass_invariance,
    a2_dirac_limit,
    a3_mixed_admissible,
    a4_order_dependence,
    a5_king_mass,
    a6_p1_mass_formula,
    a7_theta_background,
    a8_residue_kernels,
    a9_property_suites,
    a10_determinism,
)


def run_all(emit=None) -> List[CriterionResult]:
    """Run every acceptance criterion; emit one pass/fail line per criterion."""
    results = []
    for fn in ALL_CRITERIA:
        result = fn()
        results.append(result)
        if emit is not None:
            emit(result.line())
    return results
