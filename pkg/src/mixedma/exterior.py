"""Pointwise exterior algebra of complex (p, q)-forms on C^n.

A (p, q)-form at a point is stored sparsely as a map from index pairs
(I, J) to the coefficient of dz_I ^ dzbar_J, where I and J are strictly
increasing tuples of 0-based coordinate indices with |I| = p and |J| = q.
A missing key is a zero coefficient.  Coefficients may be Python complex
scalars or numpy arrays carrying one value per evaluation point, so a
single form object can hold a form field sampled on a whole batch of
points; every operation is elementwise in the array case.

Conventions, fixed once for the whole package:

    dd^c u = (i / 2 pi) * del delbar u
    dz ^ dzbar = -2i dx ^ dy            (per coordinate)

With these normalizations the Laplacian current of log|z|^2 on C has
total mass 1 and (i/2pi) dz ^ dzbar has Lebesgue density 1/pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple, Union

import numpy as np

from .errors import BidegreeError, ConjugateSymmetryError, DimensionMismatchError

Coefficient = Union[complex, np.ndarray]
IndexTuple = Tuple[int, ...]
IndexPair = Tuple[IndexTuple, IndexTuple]

# (i/2pi), the scale that turns a complex Hessian into a dd^c-normalized form.
DDC_SCALE = 1j / (2.0 * math.pi)

COEFF_TOL = 1e-12


@dataclass(frozen=True)
class Point:
    """A point of C^n, held as a 1-d array of finite complex coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=complex)
        if arr.ndim != 1 or arr.size < 1:
            raise DimensionMismatchError("a point needs at least one coordinate")
        if not np.all(np.isfinite(arr)):
            raise DimensionMismatchError("point coordinates must be finite")
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.size


def _is_strictly_increasing(idx: IndexTuple) -> bool:
    return all(idx[i] < idx[i + 1] for i in range(len(idx) - 1))


def _merge_sign(left: IndexTuple, right: IndexTuple) -> int:
    """Sign of the shuffle merging two disjoint increasing index tuples."""
    inversions = 0
    i = 0
    for y in right:
        while i < len(left) and left[i] < y:
            i += 1
        inversions += len(left) - i
    return -1 if inversions & 1 else 1


@dataclass(frozen=True)
class BidegreeForm:
    """A complex (p, q)-form at one point or on a batch of points."""

    n: int
    p: int
    q: int
    coeffs: Mapping[IndexPair, Coefficient]

    def __post_init__(self):
        if self.n < 1 or self.p < 0 or self.q < 0:
            raise BidegreeError("need n >= 1 and p, q >= 0")
        clean: Dict[IndexPair, Coefficient] = {}
        for (I, J), value in self.coeffs.items():
            I = tuple(int(i) for i in I)
            J = tuple(int(j) for j in J)
            if len(I) != self.p or len(J) != self.q:
                raise BidegreeError(f"key {(I, J)} does not match bidegree ({self.p},{self.q})")
            if not (_is_strictly_increasing(I) and _is_strictly_increasing(J)):
                raise BidegreeError(f"key {(I, J)} is not strictly increasing")
            if I and (I[0] < 0 or I[-1] >= self.n) or J and (J[0] < 0 or J[-1] >= self.n):
                raise BidegreeError(f"key {(I, J)} out of range for n={self.n}")
            clean[(I, J)] = value
        object.__setattr__(self, "coeffs", clean)

    # -- basic structure -------------------------------------------------

    @property
    def is_structurally_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, I: IndexTuple, J: IndexTuple) -> Coefficient:
        return self.coeffs.get((tuple(I), tuple(J)), 0.0 + 0.0j)

    def __add__(self, other: "BidegreeForm") -> "BidegreeForm":
        if not isinstance(other, BidegreeForm):
            return NotImplemented
        if (self.n, self.p, self.q) != (other.n, other.p, other.q):
            raise BidegreeError("can only add forms of identical bidegree")
        out: Dict[IndexPair, Coefficient] = dict(self.coeffs)
        for key, value in other.coeffs.items():
            out[key] = out[key] + value if key in out else value
        return BidegreeForm(self.n, self.p, self.q, out)

    def __sub__(self, other: "BidegreeForm") -> "BidegreeForm":
        return self + (other * (-1.0))

    def __mul__(self, scalar) -> "BidegreeForm":
        return BidegreeForm(
            self.n, self.p, self.q, {k: v * scalar for k, v in self.coeffs.items()}
        )

    __rmul__ = __mul__

    # -- predicates -------------------------------------------------------

    def max_abs(self) -> float:
        best = 0.0
        for value in self.coeffs.values():
            best = max(best, float(np.max(np.abs(value))) if np.ndim(value) else abs(value))
        return best

    def is_real(self, tol: float = COEFF_TOL) -> bool:
        """Reality check for (p, p)-forms.

        In the normalized presentation omega = i^{p^2} sum b_IJ dz_I ^ dzbar_J
        the form is real exactly when the coefficient matrix b is
        conjugate-symmetric: b(I, J) = conj(b(J, I)).
        """
        if self.p != self.q:
            raise BidegreeError("reality is defined for (p, p)-forms only")
        scale = 1j ** ((self.p * self.p) % 4)
        keys = set(self.coeffs)
        keys |= {(J, I) for (I, J) in self.coeffs}
        for I, J in keys:
            delta = self.coefficient(I, J) / scale - np.conj(self.coefficient(J, I) / scale)
            if float(np.max(np.abs(delta))) > tol:
                return False
        return True


def scalar_form(n: int, value: Coefficient = 1.0) -> BidegreeForm:
    """The (0, 0)-form with the given value."""
    return BidegreeForm(n, 0, 0, {((), ()): value})


def zero_form(n: int, p: int, q: int) -> BidegreeForm:
    return BidegreeForm(n, p, q, {})


def dz_form(n: int, k: int, coefficient: Coefficient = 1.0) -> BidegreeForm:
    return BidegreeForm(n, 1, 0, {((k,), ()): coefficient})


def dzbar_form(n: int, k: int, coefficient: Coefficient = 1.0) -> BidegreeForm:
    return BidegreeForm(n, 0, 1, {((), (k,)): coefficient})


def wedge(a: BidegreeForm, b: BidegreeForm) -> BidegreeForm:
    """Exterior product a ^ b with exact permutation signs.

    Results whose holomorphic or antiholomorphic degree exceeds n are the
    zero form.  The sign of each coefficient pair is the product of the
    block swap (-1)^(b.p * a.q) with the two merge-shuffle signs.
    """
    if a.n != b.n:
        raise DimensionMismatchError("wedge operands live on different C^n")
    n = a.n
    p, q = a.p + b.p, a.q + b.q
    if p > n or q > n:
        return zero_form(n, p, q)
    out: Dict[IndexPair, Coefficient] = {}
    block_sign = -1 if (b.p * a.q) & 1 else 1
    for (I1, J1), c1 in a.coeffs.items():
        set_I1, set_J1 = set(I1), set(J1)
        for (I2, J2), c2 in b.coeffs.items():
            if set_I1 & set(I2) or set_J1 & set(J2):
                continue
            sign = block_sign * _merge_sign(I1, I2) * _merge_sign(J1, J2)
            key = (tuple(sorted(I1 + I2)), tuple(sorted(J1 + J2)))
            term = (sign * c1) * c2
            out[key] = out[key] + term if key in out else term
    return BidegreeForm(n, p, q, out)


def wedge_power(a: BidegreeForm, m: int) -> BidegreeForm:
    """m-fold wedge power of a (1, 1)-form; m = 0 gives the scalar 1."""
    if m < 0:
        raise BidegreeError("wedge power needs m >= 0")
    if (a.p, a.q) != (1, 1):
        raise BidegreeError("wedge_power expects a (1, 1)-form")
    if m == 0:
        return scalar_form(a.n, 1.0)
    out = a
    for _ in range(m - 1):
        out = wedge(out, a)
    return out


def top_density(a: BidegreeForm, rtol: float = 1e-8):
    """Lebesgue density of an (n, n)-form.

    Returns the real lambda with a = lambda * dV, dV the Lebesgue measure
    of C^n = R^{2n}.  The conversion constant follows from
    dz ^ dzbar = -2i dx ^ dy per coordinate together with the sign of the
    interleaving permutation.  A residual imaginary part above
    rtol * max(1, |density|) raises ConjugateSymmetryError.
    """
    n = a.n
    if (a.p, a.q) != (n, n):
        raise BidegreeError(f"top_density needs an ({n},{n})-form, got ({a.p},{a.q})")
    full = tuple(range(n))
    coeff = a.coefficient(full, full)
    interleave_sign = -1.0 if (n * (n - 1) // 2) & 1 else 1.0
    factor = interleave_sign * (-2.0j) ** n
    dens = coeff * factor
    real = np.real(dens)
    imag = np.imag(dens)
    scale = max(1.0, float(np.max(np.abs(real))) if np.ndim(real) else abs(float(real)))
    worst = float(np.max(np.abs(imag))) if np.ndim(imag) else abs(float(imag))
    if worst > rtol * scale:
        raise ConjugateSymmetryError(
            f"imaginary density residue {worst:.3e} exceeds {rtol:.1e} * {scale:.3e}"
        )
    if np.ndim(real):
        return np.asarray(real, dtype=float)
    return float(real)


def hermitian_to_form(H: np.ndarray) -> BidegreeForm:
    """Package a complex Hessian as the (1, 1)-form (i/2pi) sum H_pq dz_p ^ dzbar_q.

    H may be a single (n, n) matrix or a batch of shape (npts, n, n).
    The output is real exactly when H is Hermitian.
    """
    H = np.asarray(H)
    if H.ndim not in (2, 3) or H.shape[-1] != H.shape[-2]:
        raise DimensionMismatchError("expected an (n, n) matrix or an (npts, n, n) batch")
    n = H.shape[-1]
    coeffs: Dict[IndexPair, Coefficient] = {}
    for p in range(n):
        for q in range(n):
            value = H[..., p, q]
            if H.ndim == 2:
                value = complex(value)
                if value == 0:
                    continue
            coeffs[((p,), (q,))] = DDC_SCALE * value
    return BidegreeForm(n, 1, 1, coeffs)


def forms_allclose(a: BidegreeForm, b: BidegreeForm, tol: float = COEFF_TOL) -> bool:
    """Coefficientwise comparison with absolute tolerance."""
    if (a.n, a.p, a.q) != (b.n, b.p, b.q):
        return False
    return (a - b).max_abs() <= tol
