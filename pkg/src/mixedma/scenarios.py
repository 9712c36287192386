"""Named desk-scale scenarios with independently derived oracle values.

Every oracle below is computable without the main engine, from a classical
identity or a low-dimensional reference integral.  Derivations:

lelong_mass_c1
    phi = log|z|^2 on C.  The smoothed Laplacian d d^c(rho_j o phi) is
    supported on the shell a e^{-j} <= |z|^2 <= b e^{-j}; outside it the
    function is either constant or the harmonic log|z|^2.  By Stokes the
    total integral over any disk containing the shell equals the boundary
    flux of d^c log|z|^2, which is 1 under the (i/2pi) normalization.
    Value: 1 for every j once the shell sits inside the box.

dirac_c1
    Lelong-Poincare: dd^c log|z|^2 is the unit point mass at 0, so the
    pairing against a bump with psi(0) = 1 tends to 1.

coord_planes_c2
    dd^c log|z_k|^2 is the current of integration along the coordinate
    hyperplane {z_k = 0}.  The iterated product of the two hyperplane
    currents is the Dirac mass at the origin (transversal intersection):
    value psi(0, 0).

king_c2
    King's formula in C^2: (dd^c log(|z_1|^2 + |z_2|^2))^2 is the unit
    point mass at the origin.  Value psi(0, 0).

noncomm_A / noncomm_B
    Hand computation with the product recursion on coordinate data.  Let
    u = log|z_1 z_2|^2 and w = log|z_1|^2.  Innermost u gives
    dd^c u = [z_1 = 0] + [z_2 = 0]; multiplying by w cuts away the part
    supported on the polar set {z_1 = 0}, leaving [z_2 = 0], and
    dd^c w restricted to the line {z_2 = 0} is the point mass at 0, so the
    pairing tends to psi(0, 0) (noncomm_A).  In the reversed order the
    inner current [z_1 = 0] lies entirely inside the polar set of u, and
    the restriction to its complement annihilates it: the product is 0
    (noncomm_B).  Identical factor sets, different order, different limit.

cauchy_a
    Cauchy-Pompeiu: the pairing of delbar(1/z^a) ^ dz/(2 pi i) with psi is
    the Taylor coefficient (d_z^{a-1} psi)(0)/(a-1)!.  For the radial
    bumps used here that is psi(0) when a = 1 and exactly 0 when a >= 2.

p1_mass
    The chart form (i/2pi) del delbar log(1+|z|^2) integrates to 1 over
    the two closed unit disks glued along w = 1/z, and adding the exact
    global form dd^c(rho_j o phi) does not change the total: value 1 for
    every j.

theta_mixed_c2
    phi = log|z_1|^2, theta the identity-coefficient (1,1)-form.  The
    bracket square expands into theta^2 + 2 theta ^ [z_1 = 0] (the square
    of the plane current vanishes, being supported inside the polar set).
    With a product bump of radii R_1, R_2 and the profile integral
    I_B = int_0^1 B(u) du this is 2 R_1^2 R_2^2 I_B^2 + 2 R_2^2 I_B; I_B
    is computed by 1-d reference quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad as _scipy_quad

from .errors import OracleLookupError, ScheduleError
from .exterior import BidegreeForm
from .potentials import (
    Cutoff,
    HoloPolynomial,
    HoloTuple,
    QpshFunction,
    Smoother,
    SmoothPotential,
    LogOnePlusSquaresTerm,
)
from .quadrature import (
    Box,
    ChartData,
    Estimate,
    ProjectiveLineAtlas,
    QuadratureSettings,
    TestFunction,
    p1_mass,
    pair_product,
    pair_residue,
)
from .regularizer import (
    ConstantOneOneForm,
    FactorSpec,
    FubiniStudyOneOneForm,
    PathSchedule,
    PolynomialSchedule,
    ProductSpec,
    ResidueFactorSpec,
    check_admissible,
    eps_of_j,
    zero_one_one,
)

PRODUCT_KIND = "product"
RESIDUE_KIND = "residue"
P1_KIND = "p1"


@dataclass(frozen=True)
class OracleValue:
    value: float
    derivation: str


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    kind: str
    oracle: OracleValue
    product: Optional[ProductSpec] = None
    residue_factors: Tuple[ResidueFactorSpec, ...] = ()
    theta_form: Optional[BidegreeForm] = None
    psi: Optional[TestFunction] = None
    box: Optional[Box] = None
    atlas: Optional[ProjectiveLineAtlas] = None
    default_schedule: Optional[PathSchedule] = None
    default_nus: Tuple[float, ...] = ()
    settings: QuadratureSettings = QuadratureSettings()

    @property
    def arity(self) -> int:
        if self.kind == PRODUCT_KIND:
            return self.product.r
        if self.kind == RESIDUE_KIND:
            return len(self.residue_factors)
        return 1


@dataclass(frozen=True)
class TableRow:
    nu: float
    js: Tuple[float, ...]
    value: float
    error: float
    converged: bool


@dataclass(frozen=True)
class ConvergenceTable:
    scenario: str
    schedule: str
    verdict: str
    oracle: OracleValue
    rows: Tuple[TableRow, ...]

    @property
    def final_abs_dev(self) -> float:
        return abs(self.rows[-1].value - self.oracle.value)

    @property
    def all_converged(self) -> bool:
        return all(row.converged for row in self.rows)


# ---------------------------------------------------------------------------
# shared ingredients
# ---------------------------------------------------------------------------

def default_cutoff(profile: str = "quintic") -> Cutoff:
    return Cutoff(a=math.exp(-1.0), b=math.e, profile=profile)


def default_smoother(profile: str = "quintic") -> Smoother:
    return Smoother(default_cutoff(profile))


def coordinate_log_weight(n: int, k: int, c: float = 1.0) -> QpshFunction:
    """phi = c log|z_k|^2."""
    return QpshFunction(
        c, HoloTuple((HoloPolynomial.coordinate(n, k),)), SmoothPotential.zero(n)
    )


def monomial_log_weight(n: int, exps: Sequence[int], c: float = 1.0) -> QpshFunction:
    return QpshFunction(
        c, HoloTuple((HoloPolynomial.monomial(n, exps),)), SmoothPotential.zero(n)
    )


def norm_log_weight(n: int, c: float = 1.0) -> QpshFunction:
    """phi = c log(|z_1|^2 + ... + |z_n|^2), the tuple f = (z_1, ..., z_n)."""
    comps = tuple(HoloPolynomial.coordinate(n, k) for k in range(n))
    return QpshFunction(c, HoloTuple(comps), SmoothPotential.zero(n))


def _plain_factor(phi: QpshFunction, m: int = 1, smoother: Optional[Smoother] = None) -> FactorSpec:
    n = phi.n
    rho = smoother or default_smoother()
    return FactorSpec(phi=phi, theta=zero_one_one(n), eta=zero_one_one(n), m=m, smoother=rho)


def _centered_box(n: int, half: float) -> Box:
    return Box(center=np.zeros(n, dtype=complex), half_widths=np.full(2 * n, half))


def _origin_bump(n: int, radius: float) -> TestFunction:
    return TestFunction(centers=np.zeros(n, dtype=complex), radii=np.full(n, radius))


def bump_profile_integral() -> float:
    """int_0^1 B(u) du for the radial bump, by reference quadrature."""
    def B(u):
        return 1.0 - u ** 3 * (10.0 + u * (6.0 * u - 15.0))

    val, err = _scipy_quad(B, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    if err > 1e-10:
        raise RuntimeError("reference quadrature for the bump profile failed")
    return val


# ---------------------------------------------------------------------------
# scenario builders
# ---------------------------------------------------------------------------

def _lelong_mass_c1() -> Scenario:
    phi = coordinate_log_weight(1, 0)
    spec = ProductSpec((_plain_factor(phi),))
    return Scenario(
        name="lelong_mass_c1",
        n=1,
        kind=PRODUCT_KIND,
        oracle=OracleValue(1.0, "Lelong-Poincare"),
        product=spec,
        psi=None,
        box=_centered_box(1, 2.0),
        default_schedule=PolynomialSchedule((1,)),
        default_nus=(2.0, 6.0, 10.0),
        settings=QuadratureSettings(order=12, rel_tol=5e-7, abs_floor=1e-13),
    )


def _dirac_c1() -> Scenario:
    phi = coordinate_log_weight(1, 0)
    spec = ProductSpec((_plain_factor(phi),))
    return Scenario(
        name="dirac_c1",
        n=1,
        kind=PRODUCT_KIND,
        oracle=OracleValue(1.0, "Lelong-Poincare"),
        product=spec,
        psi=_origin_bump(1, 0.5),
        box=_centered_box(1, 1.0),
        default_schedule=PolynomialSchedule((1,)),
        default_nus=tuple(float(v) for v in range(4, 15)),
        settings=QuadratureSettings(order=12, rel_tol=3e-5, abs_floor=1e-12),
    )


def _coord_planes_c2() -> Scenario:
    inner = coordinate_log_weight(2, 0)
    outer = coordinate_log_weight(2, 1)
    spec = ProductSpec((_plain_factor(inner), _plain_factor(outer)))
    return Scenario(
        name="coord_planes_c2",
        n=2,
        kind=PRODUCT_KIND,
        oracle=OracleValue(1.0, "current-calculus order computation"),
        product=spec,
        psi=_origin_bump(2, 0.9),
        box=_centered_box(2, 1.0),
        default_schedule=PolynomialSchedule((2, 1)),
        default_nus=(2.0, 3.0, 4.0),
        settings=QuadratureSettings(order=6, rel_tol=3e-4, abs_floor=1e-10, max_cells=80_000),
    )


def _king_c2() -> Scenario:
    phi = norm_log_weight(2)
    spec = ProductSpec((_plain_factor(phi, m=2),))
    return Scenario(
        name="king_c2",
        n=2,
        kind=PRODUCT_KIND,
        oracle=OracleValue(1.0, "King"),
        product=spec,
        psi=_origin_bump(2, 0.9),
        box=_centered_box(2, 1.0),
        default_schedule=PolynomialSchedule((1,)),
        default_nus=(4.0, 7.0, 10.0),
        settings=QuadratureSettings(order=6, rel_tol=1e-4, abs_floor=1e-10, max_cells=120_000),
    )


def _noncomm(order: str) -> Scenario:
    cross = monomial_log_weight(2, (1, 1))      # log|z_1 z_2|^2
    plane = coordinate_log_weight(2, 0)         # log|z_1|^2
    if order == "A":
        factors = (_plain_factor(cross), _plain_factor(plane))
        oracle = OracleValue(1.0, "current-calculus order computation")
    else:
        factors = (_plain_factor(plane), _plain_factor(cross))
        oracle = OracleValue(0.0, "current-calculus order computation")
    return Scenario(
        name=f"noncomm_{order}",
        n=2,
        kind=PRODUCT_KIND,
        oracle=oracle,
        product=ProductSpec(factors),
        psi=_origin_bump(2, 0.9),
        box=_centered_box(2, 1.0),
        default_schedule=PolynomialSchedule((2, 1)),
        default_nus=(2.0, 3.0, 4.0),
        settings=QuadratureSettings(order=6, rel_tol=3e-4, abs_floor=1e-10, max_cells=80_000),
    )


def _cauchy_a(a: int = 1) -> Scenario:
    a = int(a)
    if a < 1:
        raise ScheduleError("cauchy_a needs a >= 1")
    factor = ResidueFactorSpec(
        c=1.0,
        f=HoloPolynomial.monomial(1, (a,)),
        v=SmoothPotential.zero(1),
        mode=ResidueFactorSpec.RESIDUE,
        cutoff=default_cutoff(),
    )
    theta_form = BidegreeForm(1, 1, 0, {((0,), ()): 1.0 / (2.0j * math.pi)})
    oracle = OracleValue(1.0 if a == 1 else 0.0, "Cauchy-Pompeiu")
    return Scenario(
        name="cauchy_a",
        n=1,
        kind=RESIDUE_KIND,
        oracle=oracle,
        residue_factors=(factor,),
        theta_form=theta_form,
        psi=_origin_bump(1, 0.5),
        box=_centered_box(1, 1.0),
        default_schedule=PolynomialSchedule((1,)),
        default_nus=(4.0, 6.0, 9.0),
        settings=QuadratureSettings(order=12, rel_tol=1e-6, abs_floor=1e-12),
    )


def _p1_mass(weight: str = "green") -> Scenario:
    """Two-chart mass scenario; weight is "green" or "flat"."""
    one = HoloPolynomial.constant(1, 1.0)
    coord = HoloPolynomial.coordinate(1, 0)
    fs_drop = SmoothPotential(1, (LogOnePlusSquaresTerm(-1.0, (coord,)),))
    if weight == "green":
        phi0 = QpshFunction(1.0, HoloTuple((coord,)), fs_drop)
        phi1 = QpshFunction(1.0, HoloTuple((one,)), fs_drop)
    elif weight == "flat":
        phi0 = QpshFunction(1.0, HoloTuple((one,)), SmoothPotential.zero(1))
        phi1 = phi0
    else:
        raise ScheduleError(f"unknown p1 weight {weight!r}")
    theta = FubiniStudyOneOneForm(1)
    atlas = ProjectiveLineAtlas(
        chart0=ChartData(phi0, theta),
        chart1=ChartData(phi1, theta),
        smoother=default_smoother(),
    )
    return Scenario(
        name="p1_mass",
        n=1,
        kind=P1_KIND,
        oracle=OracleValue(1.0, "direct integral"),
        atlas=atlas,
        default_schedule=PolynomialSchedule((1,)),
        default_nus=(0.0, 4.0, 8.0, 12.0),
        settings=QuadratureSettings(order=12, rel_tol=1e-7, abs_floor=1e-13),
    )


def _theta_mixed_c2() -> Scenario:
    phi = coordinate_log_weight(2, 0)
    theta = ConstantOneOneForm(np.eye(2))
    rho = default_smoother()
    spec = ProductSpec((FactorSpec(phi=phi, theta=theta, eta=theta, m=2, smoother=rho),))
    radius = 0.9
    i_b = bump_profile_integral()
    value = 2.0 * radius ** 4 * i_b ** 2 + 2.0 * radius ** 2 * i_b
    return Scenario(
        name="theta_mixed_c2",
        n=2,
        kind=PRODUCT_KIND,
        oracle=OracleValue(value, "direct integral"),
        product=spec,
        psi=_origin_bump(2, radius),
        box=_centered_box(2, 1.0),
        default_schedule=PolynomialSchedule((1,)),
        default_nus=(2.0, 3.0, 4.0),
        settings=QuadratureSettings(order=6, rel_tol=1e-3, abs_floor=1e-10, max_cells=100_000),
    )


_BUILDERS: Dict[str, Callable[..., Scenario]] = {
    "lelong_mass_c1": _lelong_mass_c1,
    "dirac_c1": _dirac_c1,
    "coord_planes_c2": _coord_planes_c2,
    "king_c2": _king_c2,
    "noncomm_A": lambda: _noncomm("A"),
    "noncomm_B": lambda: _noncomm("B"),
    "cauchy_a": _cauchy_a,
    "p1_mass": _p1_mass,
    "theta_mixed_c2": _theta_mixed_c2,
}

SCENARIO_NAMES = tuple(sorted(_BUILDERS))


def get_scenario(name: str, **params) -> Scenario:
    if name not in _BUILDERS:
        raise OracleLookupError(f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}")
    return _BUILDERS[name](**params)


def oracle_value(name: str, **params) -> OracleValue:
    """Stored oracle value and derivation tag for a registered scenario."""
    return get_scenario(name, **params).oracle


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def evaluate_scenario(scenario: Scenario, js: Sequence[float],
                      settings: Optional[QuadratureSettings] = None) -> Estimate:
    """One pairing of a scenario at explicit levels js."""
    settings = settings or scenario.settings
    if len(js) != scenario.arity:
        raise ScheduleError(
            f"scenario {scenario.name} has arity {scenario.arity}, got {len(js)} levels"
        )
    if scenario.kind == PRODUCT_KIND:
        return pair_product(scenario.product, js, scenario.psi, scenario.box, settings)
    if scenario.kind == RESIDUE_KIND:
        eps = eps_of_j(js)
        return pair_residue(
            scenario.residue_factors, eps, scenario.theta_form,
            scenario.psi, scenario.box, settings,
        )
    return p1_mass(scenario.atlas, js[0], settings)


def run_scenario(
    name: str,
    schedule: Optional[PathSchedule] = None,
    nus: Optional[Sequence[float]] = None,
    settings: Optional[QuadratureSettings] = None,
    **params,
) -> ConvergenceTable:
    """Convergence table of a named scenario along a path schedule.

    For inadmissible or undetermined schedules the table is still
    produced, with the verdict attached; no convergence is asserted.
    """
    scenario = get_scenario(name, **params)
    schedule = schedule or scenario.default_schedule
    nus = tuple(float(v) for v in (nus if nus is not None else scenario.default_nus))
    if schedule.r != scenario.arity:
        raise ScheduleError(
            f"schedule arity {schedule.r} does not match scenario arity {scenario.arity}"
        )
    if not nus:
        raise ScheduleError("need at least one nu value")
    verdict = check_admissible(schedule)
    rows = []
    for nu in nus:
        js = schedule.js(nu)
        est = evaluate_scenario(scenario, js, settings)
        rows.append(TableRow(nu, tuple(js), est.value, est.error, est.converged))
    return ConvergenceTable(
        scenario=scenario.name,
        schedule=schedule.describe(),
        verdict=verdict,
        oracle=scenario.oracle,
        rows=tuple(rows),
    )
