"""Smooth regularized factors, their ordered wedge products, residue-type
kernels, and admissible path schedules.

One regularization level j replaces a weight phi = c log|f|^2 + v by the
smooth function rho_j(phi).  Its dd^c is assembled by the chain rule

    dd^c (rho_j o phi) = (i/2pi) [ rho_j''(phi) del phi ^ delbar phi
                                   + rho_j'(phi) del delbar phi ],

which needs no principalization and works for tuples f.  The full factor
of the mixed product is

    (eta + rho_j'(phi) (theta - eta) + dd^c(rho_j o phi))^m,

a real (m, m)-form, and the ordered product wedges the factors with index
1 rightmost.  Along a path schedule the rightmost slot is driven to
infinity fastest; a polynomial schedule (nu^{d_1}, ..., nu^{d_r}) is
admissible exactly when d_1 > d_2 > ... > d_r >= 1.

The residue kernels chi_eps / f and delbar chi_eps / f from the same
cut-off machinery are provided alongside, together with a second,
algebraically independent route to the factor through the expansion in
powers of the cut-off (used as a cross-check of the chain-rule route).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    RangeError,
    ScheduleError,
    SingularityError,
)
from .exterior import (
    BidegreeForm,
    hermitian_to_form,
    scalar_form,
    wedge,
    wedge_power,
)
from .potentials import (
    Cutoff,
    HoloPolynomial,
    QpshFunction,
    Smoother,
    SmoothPotential,
    as_point_batch,
)

TWO_PI_I = 2.0j * math.pi


# ---------------------------------------------------------------------------
# closed (1,1)-forms used as theta / eta slots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantOneOneForm:
    """Constant-coefficient real (1,1)-form over the chart."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatchError("expected a square matrix")
        if np.max(np.abs(M - M.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(M)))):
            raise DimensionMismatchError("constant (1,1)-forms must be Hermitian")
        object.__setattr__(self, "matrix", M)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrix)

    def hermitian(self, pts: np.ndarray) -> np.ndarray:
        # read-only broadcast view; callers combine, never mutate
        return np.broadcast_to(self.matrix, (pts.shape[0],) + self.matrix.shape)


@dataclass(frozen=True)
class FubiniStudyOneOneForm:
    """The chart form (i/2pi) del delbar log(1 + |z|^2); total mass 1 on a line."""

    n: int

    @property
    def is_zero(self) -> bool:
        return False

    def hermitian(self, pts: np.ndarray) -> np.ndarray:
        u = 1.0 + np.sum((pts * np.conj(pts)).real, axis=-1)
        eye = np.eye(self.n, dtype=complex)
        outer = np.einsum("kp,kq->kpq", np.conj(pts), pts)
        return (u[:, None, None] * eye - outer) / (u ** 2)[:, None, None]


ClosedOneOneForm = Union[ConstantOneOneForm, FubiniStudyOneOneForm]


def zero_one_one(n: int) -> ConstantOneOneForm:
    return ConstantOneOneForm(np.zeros((n, n)))


# ---------------------------------------------------------------------------
# factor and product specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorSpec:
    """One slot of the ordered product: (phi, theta, eta, m, smoother)."""

    phi: QpshFunction
    theta: ClosedOneOneForm
    eta: ClosedOneOneForm
    m: int
    smoother: Smoother

    def __post_init__(self):
        if self.m < 1:
            raise RangeError("factor multiplicity m must be >= 1")
        n = self.phi.n
        for form in (self.theta, self.eta):
            if form.n != n:
                raise DimensionMismatchError("theta/eta ambient dimension mismatch")


@dataclass(frozen=True)
class ProductSpec:
    """Ordered factors; index 0 is the rightmost (innermost) slot.

    Along admissible schedules the rightmost slot regularizes fastest; the
    order of the factors is semantically significant for the limit.
    """

    factors: Tuple[FactorSpec, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ScheduleError("a product needs at least one factor")
        n = factors[0].phi.n
        if any(f.phi.n != n for f in factors):
            raise DimensionMismatchError("factors live on different C^n")
        object.__setattr__(self, "factors", factors)

    @property
    def n(self) -> int:
        return self.factors[0].phi.n

    @property
    def r(self) -> int:
        return len(self.factors)

    @property
    def total_degree(self) -> int:
        return sum(f.m for f in self.factors)


@dataclass(frozen=True)
class ResidueFactorSpec:
    """A principal-value (chi_eps / f) or residue (delbar chi_eps / f) kernel."""

    c: float
    f: HoloPolynomial
    v: SmoothPotential
    mode: str
    cutoff: Cutoff

    PRINCIPAL_VALUE = "principal_value"
    RESIDUE = "residue"

    def __post_init__(self):
        if not (self.c > 0):
            raise RangeError("c must be positive")
        if self.mode not in (self.PRINCIPAL_VALUE, self.RESIDUE):
            raise RangeError(f"unknown residue mode {self.mode!r}")
        if self.f.n != self.v.n:
            raise DimensionMismatchError("f and v live on different C^n")

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def phi(self) -> QpshFunction:
        from .potentials import HoloTuple

        return QpshFunction(self.c, HoloTuple((self.f,)), self.v)


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------

def _smoothed_hessian(phi: QpshFunction, rho: Smoother, j: float, pts: np.ndarray):
    """Hessian of rho_j o phi together with the weight rho_j'(phi).

    The region chi == 0 (argument below the lower threshold, including all
    of {f = 0}) contributes exactly zero; derivatives of phi are only
    evaluated where the guard |f|^{2c} e^{v} e^{j} > a holds.
    """
    n = phi.n
    t = phi.log_value(pts)
    tau = t + j
    chi = rho.chi_log(tau)
    dchi = rho.dchi_log(tau)
    H = np.zeros((pts.shape[0], n, n), dtype=complex)
    active = tau > rho.cutoff.log_a
    if np.any(active):
        grad, hess = phi.derivatives(pts[active])
        H[active] = (
            dchi[active][:, None, None] * np.einsum("kp,kq->kpq", grad, np.conj(grad))
            + chi[active][:, None, None] * hess
        )
    return H, chi


def ddc_smoothed(phi: QpshFunction, rho: Smoother, j: float, z) -> BidegreeForm:
    """dd^c(rho_j o phi) as a real (1,1)-form; smooth on all of C^n."""
    pts, single = as_point_batch(z)
    H, _ = _smoothed_hessian(phi, rho, j, pts)
    if single:
        return hermitian_to_form(H[0])
    return hermitian_to_form(H)


def regularized_factor(spec: FactorSpec, j: float, z) -> BidegreeForm:
    """(eta + rho_j'(phi)(theta - eta) + dd^c(rho_j o phi))^m at z."""
    pts, single = as_point_batch(z)
    H, chi = _smoothed_hessian(spec.phi, spec.smoother, j, pts)
    theta_zero = getattr(spec.theta, "is_zero", False)
    eta_zero = getattr(spec.eta, "is_zero", False)
    if theta_zero and eta_zero:
        base = H
    elif eta_zero:
        base = chi[:, None, None] * spec.theta.hermitian(pts) + H
    elif spec.theta is spec.eta or (
        isinstance(spec.theta, ConstantOneOneForm)
        and isinstance(spec.eta, ConstantOneOneForm)
        and np.array_equal(spec.theta.matrix, spec.eta.matrix)
    ):
        base = spec.eta.hermitian(pts) + H
    else:
        eta_H = spec.eta.hermitian(pts)
        base = eta_H + chi[:, None, None] * (spec.theta.hermitian(pts) - eta_H) + H
    if single:
        base = base[0]
    return wedge_power(hermitian_to_form(base), spec.m)


def product_form(spec: ProductSpec, js: Sequence[float], z) -> BidegreeForm:
    """Ordered wedge of the factors, slot r leftmost, slot 1 rightmost."""
    if len(js) != spec.r:
        raise ScheduleError(f"need {spec.r} levels, got {len(js)}")
    out: Optional[BidegreeForm] = None
    for k in range(spec.r - 1, -1, -1):
        factor = regularized_factor(spec.factors[k], js[k], z)
        out = factor if out is None else wedge(out, factor)
    return out


def residue_route(spec: FactorSpec, j: float, z) -> BidegreeForm:
    """The factor evaluated through its cut-off power expansion.

    For a single polynomial f the factor decomposes (with
    beta = theta - eta + dd^c v and gamma = (c del f / f + del v)/(2 pi i))
    as

        eta^m + sum_l binom(m,l) eta^{m-l}
                ^ (chi^l beta + delbar(chi^l) ^ gamma) ^ beta^{l-1}.

    Algebraically identical to regularized_factor; numerically a fully
    independent route used as a cross-check.  Requires z off {f = 0}.
    """
    if len(spec.phi.f.components) != 1:
        raise DimensionMismatchError("the expansion route needs a single polynomial f")
    pts, single = as_point_batch(z)
    f = spec.phi.f.components[0]
    fval = f.evaluate(pts)
    if np.any(fval == 0):
        raise SingularityError("expansion route evaluated on {f = 0}")
    n = spec.phi.n
    c = spec.phi.c
    rho = spec.smoother

    t = spec.phi.log_value(pts)
    tau = t + j
    chi = rho.chi_log(tau)
    dchi = rho.dchi_log(tau)

    Df = np.stack([f.derivative(k).evaluate(pts) for k in range(n)], axis=-1)
    Dv = spec.phi.v.grad(pts)
    Hv = spec.phi.v.hessian(pts)
    theta_H = spec.theta.hermitian(pts)
    eta_H = spec.eta.hermitian(pts)

    log_grad = c * Df / fval[:, None] + Dv          # del of (c log|f|^2 + v)
    gamma_coeffs = log_grad / TWO_PI_I              # (1,0) part of the kernel
    dbar_coeffs = np.conj(log_grad)                 # delbar of (c log|f|^2 + v)

    beta = hermitian_to_form(theta_H - eta_H + Hv)
    eta_form = hermitian_to_form(eta_H)
    gamma = BidegreeForm(n, 1, 0, {((p,), ()): gamma_coeffs[:, p] for p in range(n)})

    result = wedge_power(eta_form, spec.m)
    for ell in range(1, spec.m + 1):
        chi_ell = chi ** ell
        weight = ell * chi ** (ell - 1) * dchi
        dbar_chi_ell = BidegreeForm(
            n, 0, 1, {((), (q,)): weight * dbar_coeffs[:, q] for q in range(n)}
        )
        middle = beta * chi_ell + wedge(dbar_chi_ell, gamma)
        term = wedge(
            wedge(wedge_power(eta_form, spec.m - ell), middle),
            wedge_power(beta, ell - 1),
        )
        result = result + term * float(math.comb(spec.m, ell))
    if single:
        result = BidegreeForm(
            n, result.p, result.q,
            {k: complex(np.asarray(v).reshape(-1)[0]) for k, v in result.coeffs.items()},
        )
    return result


def residue_factor_form(rs: ResidueFactorSpec, eps: float, z) -> BidegreeForm:
    """One kernel factor at scale eps.

    Principal-value mode gives the (0,0)-form chi_eps / f, residue mode the
    (0,1)-form delbar chi_eps / f, with chi_eps = chi(|f|^{2c} e^{v}/eps).
    Points where the cut-off vanishes (including all of {f = 0}) return
    exact zeros, so the evaluation is total.
    """
    if eps <= 0:
        raise RangeError("eps must be positive")
    pts, single = as_point_batch(z)
    n = rs.n
    f = rs.f
    fval = f.evaluate(pts)
    t = rs.phi.log_value(pts)
    tau = t - math.log(eps)
    la, lb = rs.cutoff.log_a, rs.cutoff.log_b

    if rs.mode == ResidueFactorSpec.PRINCIPAL_VALUE:
        vals = np.zeros(pts.shape[0], dtype=complex)
        act = tau > la
        if np.any(act):
            chi = rs.cutoff.chi_log(tau[act])
            vals[act] = chi / fval[act]
        if single:
            return scalar_form(n, complex(vals[0]))
        return scalar_form(n, vals)

    coeffs: Dict = {}
    act = (tau > la) & (tau < lb)
    weights = np.zeros(pts.shape[0], dtype=float)
    if np.any(act):
        weights[act] = rs.cutoff.dchi_log(tau[act])
    for q in range(n):
        col = np.zeros(pts.shape[0], dtype=complex)
        if np.any(act):
            dfq = f.derivative(q).evaluate(pts[act])
            dvq = rs.v.grad(pts[act])[:, q]
            col[act] = weights[act] * np.conj(rs.c * dfq / fval[act] + dvq) / fval[act]
        coeffs[((), (q,))] = complex(col[0]) if single else col
    return BidegreeForm(n, 0, 1, coeffs)


def residue_product_form(
    factors: Sequence[ResidueFactorSpec],
    eps: Sequence[float],
    theta_form: BidegreeForm,
    z,
) -> BidegreeForm:
    """Ordered kernel product (factor r leftmost) wedged with theta_form."""
    if len(factors) != len(eps):
        raise ScheduleError("need one eps per residue factor")
    out: Optional[BidegreeForm] = None
    for k in range(len(factors) - 1, -1, -1):
        factor = residue_factor_form(factors[k], eps[k], z)
        out = factor if out is None else wedge(out, factor)
    return wedge(out, theta_form)


# ---------------------------------------------------------------------------
# path schedules
# ---------------------------------------------------------------------------

ADMISSIBLE = "admissible"
INADMISSIBLE = "inadmissible"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class PolynomialSchedule:
    """j_k(nu) = scale_k * nu^{d_k}; admissibility decided exactly."""

    exponents: Tuple[int, ...]
    scales: Tuple[float, ...] = ()

    def __post_init__(self):
        exps = tuple(int(d) for d in self.exponents)
        if not exps:
            raise ScheduleError("schedule needs at least one slot")
        if any(d < 0 for d in exps):
            raise ScheduleError("polynomial schedule exponents must be >= 0")
        scales = tuple(float(s) for s in self.scales) or tuple(1.0 for _ in exps)
        if len(scales) != len(exps):
            raise ScheduleError("one scale per exponent required")
        if any(s <= 0 for s in scales):
            raise ScheduleError("polynomial schedule scales must be positive")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "scales", scales)

    @property
    def r(self) -> int:
        return len(self.exponents)

    def js(self, nu: float) -> Tuple[float, ...]:
        return tuple(s * float(nu) ** d for s, d in zip(self.scales, self.exponents))

    def describe(self) -> str:
        return "poly(" + ",".join(str(d) for d in self.exponents) + ")"


@dataclass(frozen=True)
class TableSchedule:
    """Explicit table nu -> (j_1, ..., j_r); admissibility only sampled."""

    rows: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(x) for x in row) for row in self.rows)
        if not rows:
            raise ScheduleError("schedule table is empty")
        r = len(rows[0])
        if r < 1 or any(len(row) != r for row in rows):
            raise ScheduleError("schedule table rows must share a positive arity")
        object.__setattr__(self, "rows", rows)

    @property
    def r(self) -> int:
        return len(self.rows[0])

    def js(self, nu: int) -> Tuple[float, ...]:
        return self.rows[int(nu)]

    def describe(self) -> str:
        return f"table({len(self.rows)} rows)"


PathSchedule = Union[PolynomialSchedule, TableSchedule]

_SAMPLED_Q = (0.0, 1.0, 2.0, 4.0, 8.0)


def check_admissible(schedule: PathSchedule) -> str:
    """Three-valued admissibility verdict.

    Polynomial schedules are decided exactly: the slot degrees must be
    strictly decreasing with the last at least 1.  Tables are only sampled
    over q in {0, 1, 2, 4, 8}; a witnessed decay gives "inadmissible", and
    anything a finite table cannot settle stays "undetermined".
    """
    if isinstance(schedule, PolynomialSchedule):
        exps = schedule.exponents
        if exps[-1] < 1:
            return INADMISSIBLE
        for k in range(len(exps) - 1):
            if exps[k] <= exps[k + 1]:
                return INADMISSIBLE
        return ADMISSIBLE
    rows = schedule.rows
    if len(rows) < 4:
        return UNDETERMINED
    cols = list(zip(*rows))
    half = len(rows) // 2
    last = cols[-1]
    if last[-1] <= last[half - 1]:
        return INADMISSIBLE
    for k in range(len(cols) - 1):
        for q in _SAMPLED_Q:
            seq = [cols[k][i] - q * cols[k + 1][i] for i in range(len(rows))]
            if seq[-1] <= seq[half - 1]:
                return INADMISSIBLE
    return UNDETERMINED


def eps_of_j(js: Sequence[float]) -> Tuple[float, ...]:
    """Map levels to scales, eps_k = e^{-j_k}; admissibility transfers both ways."""
    out = []
    for j in js:
        if j < -700.0:
            raise RangeError(f"eps = e^(-j) overflows for j = {j}")
        out.append(math.exp(-float(j)))
    return tuple(out)
