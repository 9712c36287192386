"""Desk-scale numerical laboratory for regularized mixed Monge-Ampere
products of log-type weights and their residue-kernel counterparts.

The package evaluates smooth one-parameter regularizations of ordered
products

    (eta_r + rho'(phi_r)(theta_r - eta_r) + dd^c(rho_j o phi_r))^{m_r}
        ^ ... ^ (same for slot 1)

for weights phi = c log|f|^2 + v with polynomial tuples f, integrates them
adaptively against compactly supported bumps, and checks the admissible
path limits against closed-form oracles (Lelong-Poincare, King,
Cauchy-Pompeiu, chart mass formulas, hand current calculus).
"""

from .errors import (
    BidegreeError,
    ChartMismatchError,
    ConfigError,
    ConjugateSymmetryError,
    DimensionMismatchError,
    MixedMAError,
    OracleLookupError,
    RangeError,
    ScheduleError,
    SingularityError,
)
from .exterior import (
    BidegreeForm,
    Point,
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
from .potentials import (
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
from .regularizer import (
    ADMISSIBLE,
    INADMISSIBLE,
    UNDETERMINED,
    ConstantOneOneForm,
    FactorSpec,
    FubiniStudyOneOneForm,
    PathSchedule,
    PolynomialSchedule,
    ProductSpec,
    ResidueFactorSpec,
    TableSchedule,
    check_admissible,
    ddc_smoothed,
    eps_of_j,
    product_form,
    regularized_factor,
    residue_factor_form,
    residue_product_form,
    residue_route,
    zero_one_one,
)
from .quadrature import (
    Box,
    ChartData,
    Estimate,
    ProjectiveLineAtlas,
    QuadratureSettings,
    TestFunction,
    gauss_tensor_integral,
    p1_mass,
    pair_partial,
    pair_product,
    pair_residue,
    stokes_check,
)
from .scenarios import (
    ConvergenceTable,
    OracleValue,
    SCENARIO_NAMES,
    Scenario,
    TableRow,
    evaluate_scenario,
    get_scenario,
    oracle_value,
    run_scenario,
)

__version__ = "0.1.0"
