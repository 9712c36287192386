"""Holomorphic tuples, smooth reference potentials, log-type weights and
their cut-off / smoothing machinery.

The central object is the weight

    phi(z) = c * log |f(z)|^2 + v(z),

with c > 0, f a tuple of polynomials and v a smooth real potential drawn
from a small closed-form grammar (constants, real polynomials in (z, zbar),
and terms w * log(1 + sum |p_i(z)|^2)).  Everything exposes exact first and
second complex derivatives; nothing here is differentiated numerically.

Cut-off functions chi and the associated convex smoothers are parametrized
in the logarithm of their argument.  All transition bookkeeping is done in
log scale, which keeps the evaluation stable deep in the shells where
|f|^2 underflows toward machine zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    RangeError,
    SingularityError,
)
from .exterior import Point

ArrayLike = Union[float, np.ndarray]

_GAUSS_NODES_64 = np.polynomial.legendre.leggauss(64)


def as_point_batch(z) -> Tuple[np.ndarray, bool]:
    """Normalize a Point, an (n,) vector, or an (npts, n) batch.

    Returns the batch of shape (npts, n) and a flag telling whether the
    input was a single point (so results should be squeezed back).
    """
    if isinstance(z, Point):
        return z.coords.reshape(1, -1), True
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 1:
        return arr.reshape(1, -1), True
    if arr.ndim == 2:
        return arr, False
    raise DimensionMismatchError(f"expected a point or a batch of points, got shape {arr.shape}")


# ---------------------------------------------------------------------------
# holomorphic polynomials and tuples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HoloPolynomial:
    """A polynomial in z_1..z_n with complex coefficients.

    Terms map an exponent multi-index (length n) to its coefficient.
    Evaluation and the del/del z_k derivatives are exact.
    """

    n: int
    terms: Mapping[Tuple[int, ...], complex]

    def __post_init__(self):
        clean: Dict[Tuple[int, ...], complex] = {}
        for exps, coeff in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n or any(e < 0 for e in exps):
                raise DimensionMismatchError(f"bad exponent multi-index {exps} for n={self.n}")
            coeff = complex(coeff)
            if coeff != 0:
                clean[exps] = clean.get(exps, 0.0 + 0.0j) + coeff
        object.__setattr__(self, "terms", clean)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "HoloPolynomial":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: complex) -> "HoloPolynomial":
        return cls(n, {tuple([0] * n): value})

    @classmethod
    def coordinate(cls, n: int, k: int) -> "HoloPolynomial":
        exps = [0] * n
        exps[k] = 1
        return cls(n, {tuple(exps): 1.0})

    @classmethod
    def monomial(cls, n: int, exps: Sequence[int], coeff: complex = 1.0) -> "HoloPolynomial":
        return cls(n, {tuple(exps): coeff})

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "HoloPolynomial") -> "HoloPolynomial":
        if self.n != other.n:
            raise DimensionMismatchError("polynomial ambient dimensions differ")
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            out[exps] = out.get(exps, 0.0 + 0.0j) + coeff
        return HoloPolynomial(self.n, out)

    def __mul__(self, other) -> "HoloPolynomial":
        if isinstance(other, HoloPolynomial):
            if self.n != other.n:
                raise DimensionMismatchError("polynomial ambient dimensions differ")
            out: Dict[Tuple[int, ...], complex] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    key = tuple(a + b for a, b in zip(e1, e2))
                    out[key] = out.get(key, 0.0 + 0.0j) + c1 * c2
            return HoloPolynomial(self.n, out)
        return HoloPolynomial(self.n, {e: c * other for e, c in self.terms.items()})

    __rmul__ = __mul__

    # -- evaluation --------------------------------------------------------

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate on an (npts, n) batch; returns (npts,) complex."""
        out = np.zeros(pts.shape[0], dtype=complex)
        for exps, coeff in self.terms.items():
            mono = np.full(pts.shape[0], coeff, dtype=complex)
            for k, e in enumerate(exps):
                if e == 1:
                    mono = mono * pts[:, k]
                elif e > 1:
                    mono = mono * pts[:, k] ** e
            out += mono
        return out

    def derivative(self, k: int) -> "HoloPolynomial":
        out: Dict[Tuple[int, ...], complex] = {}
        for exps, coeff in self.terms.items():
            if exps[k] == 0:
                continue
            new = list(exps)
            new[k] -= 1
            key = tuple(new)
            out[key] = out.get(key, 0.0 + 0.0j) + coeff * exps[k]
        return HoloPolynomial(self.n, out)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    @property
    def is_monomial(self) -> bool:
        return len(self.terms) <= 1

    def abs_interval(self, abs_intervals: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
        """Bounds of |f| over a cell described by per-coordinate |z_k| ranges.

        Exact for monomials; for general polynomials the upper bound is the
        triangle inequality and the lower bound is the trivial 0.
        """
        if not self.terms:
            return (0.0, 0.0)
        if len(self.terms) == 1:
            (exps, coeff), = self.terms.items()
            lo = hi = abs(coeff)
            for k, e in enumerate(exps):
                if e:
                    lo *= abs_intervals[k][0] ** e
                    hi *= abs_intervals[k][1] ** e
            return (lo, hi)
        hi = 0.0
        for exps, coeff in self.terms.items():
            term = abs(coeff)
            for k, e in enumerate(exps):
                if e:
                    term *= abs_intervals[k][1] ** e
            hi += term
        return (0.0, hi)


@dataclass(frozen=True)
class HoloTuple:
    """A nonempty tuple of polynomials sharing the ambient dimension."""

    components: Tuple[HoloPolynomial, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DimensionMismatchError("a holomorphic tuple needs at least one component")
        n = comps[0].n
        if any(c.n != n for c in comps):
            raise DimensionMismatchError("tuple components live on different C^n")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return self.components[0].n

    def values(self, pts: np.ndarray) -> np.ndarray:
        return np.stack([c.evaluate(pts) for c in self.components], axis=-1)

    def sq_norm(self, pts: np.ndarray) -> np.ndarray:
        vals = self.values(pts)
        return np.sum((vals * np.conj(vals)).real, axis=-1)

    def log_sq_norm(self, pts: np.ndarray) -> np.ndarray:
        """log sum |f_i|^2, exactly -inf on the common zero locus.

        The sum is rescaled by its largest term before taking logs so the
        value stays accurate where individual squares approach the
        underflow threshold.
        """
        vals = self.values(pts)
        sq = (vals * np.conj(vals)).real
        mx = np.max(sq, axis=-1)
        out = np.full(mx.shape, -np.inf)
        pos = mx > 0.0
        if np.any(pos):
            ratios = sq[pos] / mx[pos, None]
            out[pos] = np.log(mx[pos]) + np.log(np.sum(ratios, axis=-1))
        return out

    def grad_hess_log(self, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Gradient and complex Hessian of log |f|^2 off the zero locus.

        With S = sum f_i conj(f_i), B_p = sum (d_p f_i) conj(f_i) and
        A_pq = sum (d_p f_i) conj(d_q f_i):

            grad_p = B_p / S,     hess = (A * S - B B*) / S^2.

        The numerator cancellation is exact for a single monomial, which is
        what makes the pluriharmonic scenarios vanish identically off the
        shells.
        """
        vals = self.values(pts)
        S = np.sum((vals * np.conj(vals)).real, axis=-1)
        if np.any(S == 0.0):
            raise SingularityError("derivative of log|f|^2 requested on {f = 0}")
        n = self.n
        D = np.empty(vals.shape + (n,), dtype=complex)
        for i, comp in enumerate(self.components):
            for k in range(n):
                D[:, i, k] = comp.derivative(k).evaluate(pts)
        B = np.einsum("kip,ki->kp", D, np.conj(vals))
        A = np.einsum("kip,kiq->kpq", D, np.conj(D))
        grad = B / S[:, None]
        numer = A * S[:, None, None] - np.einsum("kp,kq->kpq", B, np.conj(B))
        hess = numer / (S ** 2)[:, None, None]
        return grad, hess

    def abs_sq_interval(self, abs_intervals: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
        lo = 0.0
        hi = 0.0
        for comp in self.components:
            clo, chi = comp.abs_interval(abs_intervals)
            lo += clo * clo
            hi += chi * chi
        return (lo, hi)


# ---------------------------------------------------------------------------
# smooth potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantTerm:
    value: float

    def evaluate(self, pts):
        return np.full(pts.shape[0], float(self.value))

    def grad(self, pts, n):
        return np.zeros((pts.shape[0], n), dtype=complex)

    def hessian(self, pts, n):
        return np.zeros((pts.shape[0], n, n), dtype=complex)

    @property
    def hessian_is_zero(self) -> bool:
        return True

    def interval(self, view) -> Tuple[float, float]:
        return (float(self.value), float(self.value))


@dataclass(frozen=True)
class RealPolynomialTerm:
    """A real-valued polynomial sum c_{ab} z^a zbar^b.

    Real-valuedness is enforced through the pairing c_{ba} = conj(c_{ab}).
    """

    n: int
    coeffs: Mapping[Tuple[Tuple[int, ...], Tuple[int, ...]], complex]

    def __post_init__(self):
        clean: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], complex] = {}
        for (a, b), c in self.coeffs.items():
            a = tuple(int(x) for x in a)
            b = tuple(int(x) for x in b)
            if len(a) != self.n or len(b) != self.n:
                raise DimensionMismatchError("exponent length does not match n")
            c = complex(c)
            if c != 0:
                clean[(a, b)] = clean.get((a, b), 0.0 + 0.0j) + c
        for (a, b), c in clean.items():
            mirror = clean.get((b, a), 0.0 + 0.0j)
            if abs(mirror - np.conj(c)) > 1e-13 * max(1.0, abs(c)):
                raise DimensionMismatchError(
                    "real polynomial needs conjugate-paired coefficients"
                )
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def real_part_of(cls, poly: HoloPolynomial) -> "RealPolynomialTerm":
        zero = tuple([0] * poly.n)
        coeffs: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], complex] = {}
        for exps, c in poly.terms.items():
            coeffs[(exps, zero)] = coeffs.get((exps, zero), 0.0 + 0.0j) + c / 2.0
            coeffs[(zero, exps)] = coeffs.get((zero, exps), 0.0 + 0.0j) + np.conj(c) / 2.0
        return cls(poly.n, coeffs)

    def _mono(self, pts, a, b):
        out = np.ones(pts.shape[0], dtype=complex)
        for k, e in enumerate(a):
            if e:
                out = out * pts[:, k] ** e
        for k, e in enumerate(b):
            if e:
                out = out * np.conj(pts[:, k]) ** e
        return out

    def evaluate(self, pts):
        out = np.zeros(pts.shape[0], dtype=complex)
        for (a, b), c in self.coeffs.items():
            out += c * self._mono(pts, a, b)
        return out.real

    def grad(self, pts, n):
        out = np.zeros((pts.shape[0], n), dtype=complex)
        for (a, b), c in self.coeffs.items():
            for p in range(n):
                if a[p] == 0:
                    continue
                aa = list(a)
                aa[p] -= 1
                out[:, p] += c * a[p] * self._mono(pts, tuple(aa), b)
        return out

    def hessian(self, pts, n):
        out = np.zeros((pts.shape[0], n, n), dtype=complex)
        for (a, b), c in self.coeffs.items():
            for p in range(n):
                if a[p] == 0:
                    continue
                for q in range(n):
                    if b[q] == 0:
                        continue
                    aa = list(a)
                    bb = list(b)
                    aa[p] -= 1
                    bb[q] -= 1
                    out[:, p, q] += c * a[p] * b[q] * self._mono(pts, tuple(aa), tuple(bb))
        return out

    @property
    def hessian_is_zero(self) -> bool:
        return all(sum(a) == 0 or sum(b) == 0 for (a, b) in self.coeffs)

    @property
    def is_affine(self) -> bool:
        return all(sum(a) + sum(b) <= 1 for (a, b) in self.coeffs)

    def interval(self, view) -> Tuple[float, float]:
        corners = view.xy_corners()
        vals = self.evaluate(corners)
        lo, hi = float(np.min(vals)), float(np.max(vals))
        if self.is_affine:
            return (lo, hi)
        pad = hi - lo
        return (lo - pad, hi + pad)


@dataclass(frozen=True)
class LogOnePlusSquaresTerm:
    """weight * log(1 + sum |p_i(z)|^2); covers Fubini-Study chart potentials."""

    weight: float
    polys: Tuple[HoloPolynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        if not self.polys:
            raise DimensionMismatchError("log term needs at least one polynomial")

    def _u_and_vals(self, pts):
        vals = np.stack([p.evaluate(pts) for p in self.polys], axis=-1)
        u = 1.0 + np.sum((vals * np.conj(vals)).real, axis=-1)
        return u, vals

    def evaluate(self, pts):
        u, _ = self._u_and_vals(pts)
        return self.weight * np.log(u)

    def grad(self, pts, n):
        u, vals = self._u_and_vals(pts)
        D = np.empty(vals.shape + (n,), dtype=complex)
        for i, poly in enumerate(self.polys):
            for k in range(n):
                D[:, i, k] = poly.derivative(k).evaluate(pts)
        B = np.einsum("kip,ki->kp", D, np.conj(vals))
        return self.weight * B / u[:, None]

    def hessian(self, pts, n):
        u, vals = self._u_and_vals(pts)
        D = np.empty(vals.shape + (n,), dtype=complex)
        for i, poly in enumerate(self.polys):
            for k in range(n):
                D[:, i, k] = poly.derivative(k).evaluate(pts)
        B = np.einsum("kip,ki->kp", D, np.conj(vals))
        A = np.einsum("kip,kiq->kpq", D, np.conj(D))
        numer = A * u[:, None, None] - np.einsum("kp,kq->kpq", B, np.conj(B))
        return self.weight * numer / (u ** 2)[:, None, None]

    @property
    def hessian_is_zero(self) -> bool:
        return self.weight == 0.0

    def interval(self, view) -> Tuple[float, float]:
        lo_sq = 0.0
        hi_sq = 0.0
        for poly in self.polys:
            plo, phi_ = poly.abs_interval(view.abs_intervals)
            lo_sq += plo * plo
            hi_sq += phi_ * phi_
        lo = self.weight * math.log1p(lo_sq)
        hi = self.weight * math.log1p(hi_sq)
        return (min(lo, hi), max(lo, hi))


PotentialTerm = Union[ConstantTerm, RealPolynomialTerm, LogOnePlusSquaresTerm]


@dataclass(frozen=True)
class SmoothPotential:
    """Sum of closed-form real terms with exact complex derivatives."""

    n: int
    atoms: Tuple[PotentialTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @classmethod
    def zero(cls, n: int) -> "SmoothPotential":
        return cls(n, ())

    def evaluate(self, pts):
        out = np.zeros(pts.shape[0])
        for atom in self.atoms:
            out = out + atom.evaluate(pts)
        return out

    def grad(self, pts):
        out = np.zeros((pts.shape[0], self.n), dtype=complex)
        for atom in self.atoms:
            out = out + atom.grad(pts, self.n)
        return out

    def hessian(self, pts):
        out = np.zeros((pts.shape[0], self.n, self.n), dtype=complex)
        for atom in self.atoms:
            out = out + atom.hessian(pts, self.n)
        return out

    @property
    def is_pluriharmonic(self) -> bool:
        """True when del delbar of the potential vanishes structurally."""
        return all(atom.hessian_is_zero for atom in self.atoms)

    def interval(self, view) -> Tuple[float, float]:
        lo = 0.0
        hi = 0.0
        for atom in self.atoms:
            alo, ahi = atom.interval(view)
            lo += alo
            hi += ahi
        return (lo, hi)


# ---------------------------------------------------------------------------
# the weights phi = c log|f|^2 + v
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QpshFunction:
    """The triple (c, f, v) presenting phi = c log|f|^2 + v.

    phi is -inf exactly on the common zero locus of f and finite smooth
    elsewhere.
    """

    c: float
    f: HoloTuple
    v: SmoothPotential

    def __post_init__(self):
        if not (self.c > 0):
            raise RangeError("c must be positive")
        if self.f.n != self.v.n:
            raise DimensionMismatchError("f and v live on different C^n")

    @property
    def n(self) -> int:
        return self.f.n

    def log_value(self, pts: np.ndarray) -> np.ndarray:
        return self.c * self.f.log_sq_norm(pts) + self.v.evaluate(pts)

    def derivatives(self, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(gradient of phi, complex Hessian of phi) off the zero locus."""
        grad_log, hess_log = self.f.grad_hess_log(pts)
        grad = self.c * grad_log + self.v.grad(pts)
        hess = self.c * hess_log + self.v.hessian(pts)
        return grad, hess

    def interval(self, view) -> Tuple[float, float]:
        """Bounds of phi over a quadrature cell (see quadrature.CellView)."""
        slo, shi = self.f.abs_sq_interval(view.abs_intervals)
        vlo, vhi = self.v.interval(view)
        lo = (self.c * math.log(slo) if slo > 0 else -math.inf) + vlo
        hi = (self.c * math.log(shi) if shi > 0 else -math.inf) + vhi
        return (lo, hi)

    @property
    def is_pluriharmonic_off_zero(self) -> bool:
        """True when dd^c phi = 0 away from {f = 0} (single f, harmonic v)."""
        return len(self.f.components) == 1 and self.v.is_pluriharmonic


def eval_phi(phi: QpshFunction, z) -> float:
    """Value of phi at a point; exactly -inf on the unbounded locus."""
    pts, single = as_point_batch(z)
    vals = phi.log_value(pts)
    return float(vals[0]) if single else vals


def phi_derivatives(phi: QpshFunction, z):
    """Gradient (del phi) and Hessian (del delbar phi) at a point off {f=0}."""
    pts, single = as_point_batch(z)
    grad, hess = phi.derivatives(pts)
    if single:
        return grad[0], hess[0]
    return grad, hess


# ---------------------------------------------------------------------------
# cut-off functions and smoothers
# ---------------------------------------------------------------------------

QUINTIC = "quintic"
EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class Cutoff:
    """Cut-off profile: 0 below a, 1 above b, increasing in between.

    The transition is parametrized by s = (log t - log a) / (log b - log a),
    so the quintic profile is the C^2 smoothstep in log scale (value 1/2 at
    t = sqrt(ab)) and the exponential profile is the standard C-infinity
    partition bump.
    """

    a: float
    b: float
    profile: str = QUINTIC

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise RangeError("cutoff thresholds need 0 < a < b")
        if self.profile not in (QUINTIC, EXPONENTIAL):
            raise RangeError(f"unknown cutoff profile {self.profile!r}")

    @property
    def log_a(self) -> float:
        return math.log(self.a)

    @property
    def log_b(self) -> float:
        return math.log(self.b)

    @property
    def log_width(self) -> float:
        return math.log(self.b) - math.log(self.a)

    # -- log-scale core ----------------------------------------------------

    def _s(self, tau: ArrayLike) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        with np.errstate(invalid="ignore"):
            s = np.clip((tau - self.log_a) / self.log_width, 0.0, 1.0)
        return np.where(np.isnan(s), 0.0, s)

    def _exponential_core(self, s: np.ndarray) -> np.ndarray:
        si = np.clip(s, 1e-12, 1.0 - 1e-12)
        expo = np.clip(1.0 / si - 1.0 / (1.0 - si), -745.0, 709.0)
        core = 1.0 / (1.0 + np.exp(expo))
        return np.where(s <= 0.0, 0.0, np.where(s >= 1.0, 1.0, core))

    def chi_log(self, tau: ArrayLike) -> np.ndarray:
        """chi(e^tau); safe for tau = -inf."""
        s = self._s(tau)
        if self.profile == QUINTIC:
            return s ** 3 * (10.0 + s * (6.0 * s - 15.0))
        return self._exponential_core(s)

    def dchi_log(self, tau: ArrayLike) -> np.ndarray:
        """d/dtau of chi(e^tau), i.e. chi'(e^tau) * e^tau; zero off the band."""
        s = self._s(tau)
        if self.profile == QUINTIC:
            return 30.0 * s ** 2 * (1.0 - s) ** 2 / self.log_width
        chi = self._exponential_core(s)
        si = np.clip(s, 1e-12, 1.0 - 1e-12)
        slope = chi * (1.0 - chi) * (1.0 / si ** 2 + 1.0 / (1.0 - si) ** 2) / self.log_width
        return np.where((s <= 0.0) | (s >= 1.0), 0.0, slope)


def cutoff_eval(chi: Cutoff, t: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """(chi(t), chi'(t)) for t > 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise RangeError("cut-off argument must be positive")
    tau = np.log(t)
    value = chi.chi_log(tau)
    derivative = chi.dchi_log(tau) / t
    if value.ndim == 0:
        return float(value), float(derivative)
    return value, derivative


@dataclass(frozen=True)
class Smoother:
    """The convex smoother rho with rho' (tau) = chi(e^tau).

    rho is pinned by rho(tau) = tau for tau >= log b, which makes the
    plateau value rho(log a) = log b - int_{log a}^{log b} chi(e^s) ds;
    for the quintic profile this is the band midpoint (log a + log b)/2.
    The level-j family is rho_j(t) = rho(t + j) - j.
    """

    cutoff: Cutoff

    @property
    def plateau(self) -> float:
        if self.cutoff.profile == QUINTIC:
            return 0.5 * (self.cutoff.log_a + self.cutoff.log_b)
        return self.cutoff.log_b - self._band_integral(np.asarray(self.cutoff.log_b))

    def _band_integral(self, tau_hi: np.ndarray) -> np.ndarray:
        """int_{log a}^{tau_hi} chi(e^s) ds for tau_hi inside the band."""
        x, w = _GAUSS_NODES_64
        lo = self.cutoff.log_a
        half = (tau_hi - lo) / 2.0
        mid = (tau_hi + lo) / 2.0
        nodes = mid[..., None] + half[..., None] * x
        vals = self.cutoff.chi_log(nodes)
        return half * np.sum(w * vals, axis=-1)

    def rho(self, tau: ArrayLike) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        la, lb, L = self.cutoff.log_a, self.cutoff.log_b, self.cutoff.log_width
        if self.cutoff.profile == QUINTIC:
            u = np.clip((tau - la) / L, 0.0, 1.0)
            u = np.where(np.isnan(u), 0.0, u)
            Q = u ** 4 * (u * (u - 3.0) + 2.5)
            interior = lb - L * (0.5 - Q)
            return np.where(tau >= lb, tau, np.where(tau <= la, 0.5 * (la + lb), interior))
        capped = np.clip(tau, la, lb)
        interior = self.plateau + self._band_integral(capped)
        return np.where(tau >= lb, tau, interior)

    def rho_j(self, j: float, t: ArrayLike) -> np.ndarray:
        return self.rho(np.asarray(t, dtype=float) + j) - j

    def chi_log(self, tau: ArrayLike) -> np.ndarray:
        return self.cutoff.chi_log(tau)

    def dchi_log(self, tau: ArrayLike) -> np.ndarray:
        return self.cutoff.dchi_log(tau)


def smoother_eval(rho: Smoother, j: float, t: ArrayLike):
    """(rho_j(t), rho_j'(t), rho_j''(t)); all exact in log-band coordinates."""
    t = np.asarray(t, dtype=float)
    tau = t + j
    value = rho.rho(tau) - j
    first = rho.chi_log(tau)
    second = rho.dchi_log(tau)
    if value.ndim == 0:
        return float(value), float(first), float(second)
    return value, first, second


def cutoff_smoother_consistency(phi: QpshFunction, rho: Smoother, j: float, z) -> float:
    """|rho_j'(phi(z)) - chi(|f|^{2c} e^{v} e^{j})| at a point off {f = 0}.

    The left side goes through the log-scale smoother machinery, the right
    side through a literal evaluation of the cut-off argument, so the
    residual is a genuine consistency check of the two routes.
    """
    pts, single = as_point_batch(z)
    sq = phi.f.sq_norm(pts)
    if np.any(sq == 0.0):
        raise SingularityError("consistency check requested on {f = 0}")
    t = phi.log_value(pts)
    lhs = rho.chi_log(t + j)
    arg = sq ** phi.c * np.exp(phi.v.evaluate(pts)) * math.exp(j)
    rhs, _ = cutoff_eval(rho.cutoff, arg)
    res = np.abs(lhs - rhs)
    return float(res[0]) if single else res
