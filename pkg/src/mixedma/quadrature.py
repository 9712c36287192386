"""Adaptive integration of smooth-form densities over boxes in C^n and over
a two-chart atlas of the projective line.

The integrands produced by the regularized factors concentrate on
transition shells of logarithmic thickness (the region where
a e^{-j} <= |f|^{2c} e^{v} <= b e^{-j}), so a plain error-driven cubature
misses them: a coarse rule samples past the shell, reports a tiny error
and never refines.  The engine therefore combines two refinement drivers:

  * an embedded tensor Gauss-Legendre pair (order 8 with an order 4
    companion by default) whose discrepancy is the per-cell error
    estimate, with the split axis chosen by the size of the top Legendre
    mode along each axis, and
  * band probes, one per factor, carrying interval bounds of
    phi = c log|f|^2 + v over a cell (exact for the monomial-type data of
    the bundled scenarios).  A live cell that straddles an unresolved band
    is split along the axis that shrinks the band interval fastest,
    regardless of its reported error.

Subdivision is binary and anisotropic; slab-shaped supports (a thin shell
in one coordinate crossed with everything else) therefore cost a
logarithmic, not exponential, number of cells.  Cells are kept in a
canonical spatial order and reduced with a fixed pairwise summation, so a
run is bit-reproducible and independent of the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product as iter_product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BidegreeError,
    ChartMismatchError,
    DimensionMismatchError,
    RangeError,
)
from .exterior import BidegreeForm, hermitian_to_form, top_density, wedge
from .potentials import QpshFunction, Smoother
from .regularizer import (
    ClosedOneOneForm,
    ProductSpec,
    ResidueFactorSpec,
    _smoothed_hessian,
    product_form,
    residue_product_form,
)

WORKERS_ENV = "MIXEDMA_WORKERS"

# points per evaluation batch; keeps temporaries of the n = 2 pipeline small
_BATCH_POINTS = 220_000


# ---------------------------------------------------------------------------
# basic containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """An axis-aligned box in C^n = R^{2n}.

    Real axes are interleaved as (Re z_1, Im z_1, ..., Re z_n, Im z_n).
    """

    center: np.ndarray
    half_widths: np.ndarray

    def __post_init__(self):
        center = np.asarray(self.center, dtype=complex).reshape(-1)
        hw = np.asarray(self.half_widths, dtype=float).reshape(-1)
        if hw.size != 2 * center.size:
            raise DimensionMismatchError("need two half-widths per complex coordinate")
        if not np.all(hw > 0):
            raise RangeError("box half-widths must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "half_widths", hw)

    @property
    def n(self) -> int:
        return self.center.size

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        mid = np.empty(2 * self.n)
        mid[0::2] = self.center.real
        mid[1::2] = self.center.imag
        return mid - self.half_widths, mid + self.half_widths


@dataclass(frozen=True)
class QuadratureSettings:
    order: int = 8
    max_depth: int = 14
    rel_tol: float = 1e-7
    abs_floor: float = 1e-12
    shell_refine: bool = True
    max_cells: int = 200_000
    band_resolution: float = 1.0
    workers: Optional[int] = None

    def __post_init__(self):
        if self.order < 2 or self.max_depth < 1 or self.max_cells < 1:
            raise RangeError("order, max_depth and max_cells must be positive")
        if self.rel_tol <= 0 or self.abs_floor <= 0 or self.band_resolution <= 0:
            raise RangeError("tolerances must be positive")


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    cells: int
    evals: int
    converged: bool


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def _bump(u: np.ndarray) -> np.ndarray:
    """C^2 radial profile: 1 at u = 0, 0 for u >= 1."""
    uc = np.clip(u, 0.0, 1.0)
    return 1.0 - uc ** 3 * (10.0 + uc * (6.0 * uc - 15.0))


def _bump_d1(u: np.ndarray) -> np.ndarray:
    uc = np.clip(u, 0.0, 1.0)
    return -30.0 * uc ** 2 * (1.0 - uc) ** 2


def _bump_d2(u: np.ndarray) -> np.ndarray:
    uc = np.clip(u, 0.0, 1.0)
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, -60.0 * uc * (1.0 - uc) * (1.0 - 2.0 * uc), 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Product of radial C^2 bumps, one per coordinate, with exact derivatives."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=complex).reshape(-1)
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if centers.size != radii.size:
            raise DimensionMismatchError("need one radius per center")
        if not np.all(radii > 0):
            raise RangeError("bump radii must be positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @property
    def n(self) -> int:
        return self.centers.size

    def _u(self, pts: np.ndarray) -> np.ndarray:
        d = pts - self.centers
        return (d * np.conj(d)).real / self.radii ** 2

    def value(self, pts: np.ndarray) -> np.ndarray:
        return np.prod(_bump(self._u(pts)), axis=-1)

    def holo_grad(self, pts: np.ndarray) -> np.ndarray:
        u = self._u(pts)
        B = _bump(u)
        out = np.empty((pts.shape[0], self.n), dtype=complex)
        for p in range(self.n):
            rest = np.prod(np.delete(B, p, axis=1), axis=1) if self.n > 1 else 1.0
            out[:, p] = (
                _bump_d1(u[:, p])
                * np.conj(pts[:, p] - self.centers[p])
                / self.radii[p] ** 2
                * rest
            )
        return out

    def hessian(self, pts: np.ndarray) -> np.ndarray:
        u = self._u(pts)
        B = _bump(u)
        d1 = _bump_d1(u)
        d2 = _bump_d2(u)
        diff = pts - self.centers
        out = np.empty((pts.shape[0], self.n, self.n), dtype=complex)
        for p in range(self.n):
            for q in range(self.n):
                if p == q:
                    keep = [k for k in range(self.n) if k != p]
                    rest = np.prod(B[:, keep], axis=1) if keep else 1.0
                    out[:, p, p] = (
                        d2[:, p] * (diff[:, p] * np.conj(diff[:, p])).real / self.radii[p] ** 4
                        + d1[:, p] / self.radii[p] ** 2
                    ) * rest
                else:
                    keep = [k for k in range(self.n) if k not in (p, q)]
                    rest = np.prod(B[:, keep], axis=1) if keep else 1.0
                    out[:, p, q] = (
                        d1[:, p] * np.conj(diff[:, p]) / self.radii[p] ** 2
                        * d1[:, q] * diff[:, q] / self.radii[q] ** 2
                        * rest
                    )
        return out

    def is_supported_in(self, box: Box) -> bool:
        lo, hi = box.bounds()
        for k in range(self.n):
            if (
                self.centers[k].real - self.radii[k] < lo[2 * k]
                or self.centers[k].real + self.radii[k] > hi[2 * k]
                or self.centers[k].imag - self.radii[k] < lo[2 * k + 1]
                or self.centers[k].imag + self.radii[k] > hi[2 * k + 1]
            ):
                return False
        return True


# ---------------------------------------------------------------------------
# integration domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellView:
    """Geometric summary of a cell handed to the band probes."""

    abs_intervals: Tuple[Tuple[float, float], ...]
    corners: np.ndarray  # (ncorners, n) complex candidate extreme points

    def xy_corners(self) -> np.ndarray:
        return self.corners


def _rect_abs_interval(xlo, xhi, ylo, yhi) -> Tuple[float, float]:
    dx = 0.0 if xlo <= 0.0 <= xhi else min(abs(xlo), abs(xhi))
    dy = 0.0 if ylo <= 0.0 <= yhi else min(abs(ylo), abs(yhi))
    mx = max(abs(xlo), abs(xhi))
    my = max(abs(ylo), abs(yhi))
    return (math.hypot(dx, dy), math.hypot(mx, my))


class BoxDomain:
    """Identity chart: integration over a box of R^{2n}."""

    def __init__(self, box: Box):
        self.box = box
        self.n = box.n
        self.dim = 2 * box.n
        self.lo, self.hi = box.bounds()

    def map_points(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        z = u[:, 0::2] + 1j * u[:, 1::2]
        return z, np.ones(u.shape[0])

    def cell_view(self, lo: np.ndarray, hi: np.ndarray) -> CellView:
        ivs = tuple(
            _rect_abs_interval(lo[2 * k], hi[2 * k], lo[2 * k + 1], hi[2 * k + 1])
            for k in range(self.n)
        )
        corners_r = np.array(list(iter_product(*zip(lo, hi))))
        corners = corners_r[:, 0::2] + 1j * corners_r[:, 1::2]
        return CellView(ivs, corners)


class PolarDomain:
    """Polar chart for n = 1: (r, angle) in [0, r_max] x [0, 2 pi], z = r e^{i angle}."""

    def __init__(self, r_max: float = 1.0, center: complex = 0.0):
        if r_max <= 0:
            raise RangeError("polar chart radius must be positive")
        self.n = 1
        self.dim = 2
        self.center = complex(center)
        self.lo = np.array([0.0, 0.0])
        self.hi = np.array([r_max, 2.0 * math.pi])

    def map_points(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        z = self.center + u[:, 0] * np.exp(1j * u[:, 1])
        return z.reshape(-1, 1), u[:, 0].copy()

    def cell_view(self, lo: np.ndarray, hi: np.ndarray) -> CellView:
        r0, r1 = lo[0], hi[0]
        t0, t1 = lo[1], hi[1]
        # |z - center| interval is the radial range; corner candidates catch
        # the x / y extremes (cell endpoints plus cardinal angles inside).
        if self.center == 0.0:
            ivs = ((r0, r1),)
        else:
            ivs = ((0.0, abs(self.center) + r1),)
        angles = [t0, t1]
        k0 = math.ceil(t0 / (math.pi / 2.0))
        while k0 * math.pi / 2.0 <= t1:
            angles.append(k0 * math.pi / 2.0)
            k0 += 1
        pts = [self.center + r * complex(math.cos(t), math.sin(t)) for r in (r0, r1) for t in angles]
        return CellView(ivs, np.array(pts, dtype=complex).reshape(-1, 1))


# ---------------------------------------------------------------------------
# band probes
# ---------------------------------------------------------------------------

ALPHA_KIND = "alpha"
RESIDUE_KIND = "residue"
PV_KIND = "principal_value"


@dataclass(frozen=True)
class BandProbe:
    """Transition-band bookkeeping for one factor of the integrand.

    The band lives in phi units: a cell whose phi interval meets
    [t_lo, t_hi] straddles the factor's shell.  The dead tests identify
    cells where the factor vanishes identically (so no forcing is needed
    anywhere on the cell):

      alpha factors  : below the band with eta = 0, or above it with
                       theta = 0 and dd^c phi = 0 off the zero locus;
      residue kernels: any cell not meeting the band;
      principal value: any cell below the band.
    """

    phi: QpshFunction
    t_lo: float
    t_hi: float
    kind: str = ALPHA_KIND
    eta_zero: bool = True
    theta_zero: bool = True
    pluriharmonic: bool = False

    def interval(self, view: CellView) -> Tuple[float, float]:
        return self.phi.interval(view)

    def status_from_interval(self, iv: Tuple[float, float], band_resolution: float):
        lo, hi = iv
        straddle = (lo <= self.t_hi) and (hi >= self.t_lo)
        width = hi - lo
        unresolved = straddle and (width > band_resolution * (self.t_hi - self.t_lo))
        if self.kind == ALPHA_KIND:
            dead = (hi <= self.t_lo and self.eta_zero) or (
                lo >= self.t_hi and self.theta_zero and self.pluriharmonic
            )
        elif self.kind == RESIDUE_KIND:
            dead = (hi <= self.t_lo) or (lo >= self.t_hi)
        else:
            dead = hi <= self.t_lo
        return straddle, unresolved, dead

    def status(self, view: CellView, band_resolution: float):
        return self.status_from_interval(self.interval(view), band_resolution)


def product_band_probes(spec: ProductSpec, js: Sequence[float]) -> List[BandProbe]:
    probes = []
    for factor, j in zip(spec.factors, js):
        cut = factor.smoother.cutoff
        probes.append(
            BandProbe(
                phi=factor.phi,
                t_lo=cut.log_a - j,
                t_hi=cut.log_b - j,
                kind=ALPHA_KIND,
                eta_zero=factor.eta.is_zero,
                theta_zero=factor.theta.is_zero,
                pluriharmonic=factor.phi.is_pluriharmonic_off_zero,
            )
        )
    return probes


def residue_band_probes(
    factors: Sequence[ResidueFactorSpec], eps: Sequence[float]
) -> List[BandProbe]:
    probes = []
    for factor, e in zip(factors, eps):
        cut = factor.cutoff
        probes.append(
            BandProbe(
                phi=factor.phi,
                t_lo=cut.log_a + math.log(e),
                t_hi=cut.log_b + math.log(e),
                kind=RESIDUE_KIND if factor.mode == ResidueFactorSpec.RESIDUE else PV_KIND,
            )
        )
    return probes


# ---------------------------------------------------------------------------
# tensor rules
# ---------------------------------------------------------------------------

class _TensorRule:
    def __init__(self, dim: int, order: int):
        x, w = np.polynomial.legendre.leggauss(order)
        self.dim = dim
        self.order = order
        grids = np.meshgrid(*([x] * dim), indexing="ij")
        self.nodes = np.stack([g.reshape(-1) for g in grids], axis=-1)
        wgrid = np.meshgrid(*([w] * dim), indexing="ij")
        self.weights = np.prod(np.stack([g.reshape(-1) for g in wgrid], axis=-1), axis=-1)
        self.axis_weight = w
        # top two Legendre modes: one odd, one even, so axis selection does
        # not go blind on symmetry-centered cells
        self.axis_mode_a = w * np.polynomial.legendre.Legendre.basis(order - 1)(x)
        self.axis_mode_b = w * np.polynomial.legendre.Legendre.basis(order - 2)(x)
        self.grid_shape = (order,) * dim


_RULE_CACHE: Dict[Tuple[int, int], _TensorRule] = {}


def _rule(dim: int, order: int) -> _TensorRule:
    key = (dim, order)
    if key not in _RULE_CACHE:
        _RULE_CACHE[key] = _TensorRule(dim, order)
    return _RULE_CACHE[key]


def _axis_roughness(values: np.ndarray, rule: _TensorRule) -> np.ndarray:
    """Size of the two top Legendre modes of the integrand along each axis."""
    grid = values.reshape(rule.grid_shape)
    out = np.empty(rule.dim)
    for axis in range(rule.dim):
        acc = 0.0
        for mode in (rule.axis_mode_a, rule.axis_mode_b):
            t = grid
            for k in range(rule.dim):
                vec = mode if k == axis else rule.axis_weight
                t = np.tensordot(t, vec, axes=([0], [0]))
            acc += abs(float(t))
        out[axis] = acc
    return out


def _pairwise_sum(values: Sequence[float]) -> float:
    m = len(values)
    if m == 0:
        return 0.0
    if m == 1:
        return values[0]
    half = m // 2
    return _pairwise_sum(values[:half]) + _pairwise_sum(values[half:])


# ---------------------------------------------------------------------------
# adaptive engine
# ---------------------------------------------------------------------------

class _Cell:
    __slots__ = (
        "lo", "hi", "depths", "value", "err", "rough",
        "straddle", "unresolved", "dead", "force_candidate", "forced_axis",
    )

    def __init__(self, lo: np.ndarray, hi: np.ndarray, depths: np.ndarray):
        self.lo = lo
        self.hi = hi
        self.depths = depths
        self.value = 0.0
        self.err = 0.0
        self.rough = None
        self.straddle = ()
        self.unresolved = ()
        self.dead = ()
        self.force_candidate = False
        self.forced_axis = None


def _resolve_workers(settings: QuadratureSettings) -> int:
    if settings.workers is not None:
        return max(1, int(settings.workers))
    env = os.environ.get(WORKERS_ENV, "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise RangeError(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return max(1, os.cpu_count() or 1)


def _evaluate_batch(cells, domain, F, rule_hi, rule_lo):
    n_hi = rule_hi.nodes.shape[0]
    n_lo = rule_lo.nodes.shape[0]
    per_cell = n_hi + n_lo
    pts = np.empty((per_cell * len(cells), domain.dim))
    for i, cell in enumerate(cells):
        mid = 0.5 * (cell.lo + cell.hi)
        half = 0.5 * (cell.hi - cell.lo)
        base = i * per_cell
        pts[base:base + n_hi] = mid + rule_hi.nodes * half
        pts[base + n_hi:base + per_cell] = mid + rule_lo.nodes * half
    z, jac = domain.map_points(pts)
    vals = np.asarray(F(z), dtype=float) * jac
    vol_unit = 2.0 ** domain.dim
    for i, cell in enumerate(cells):
        base = i * per_cell
        v_hi = vals[base:base + n_hi]
        v_lo = vals[base + n_hi:base + per_cell]
        scale = float(np.prod(0.5 * (cell.hi - cell.lo)))
        val_hi = scale * float(rule_hi.weights @ v_hi)
        val_lo = scale * float(rule_lo.weights @ v_lo)
        cell.value = val_hi
        # error model of the embedded pair: the raw discrepancy reflects the
        # error of the companion rule, so it is rescaled against the cell's
        # integrand variation with the classic 3/2-power law; unresolved
        # cells keep the full variation as their error
        delta = abs(val_hi - val_lo)
        mean = val_hi / (scale * vol_unit)
        variation = scale * float(rule_hi.weights @ np.abs(v_hi - mean))
        if variation > 0.0 and delta < variation:
            err = variation * min(1.0, (50.0 * delta / variation) ** 1.5)
            cell.err = max(err, delta * 1e-2)
        else:
            cell.err = delta
        cell.rough = _axis_roughness(v_hi, rule_hi)
    return len(cells) * per_cell


def _probe_cell(cell: _Cell, domain, probes, settings):
    if not probes:
        cell.force_candidate = False
        return
    view = domain.cell_view(cell.lo, cell.hi)
    straddle, unresolved, dead = [], [], []
    for probe in probes:
        s, u, d = probe.status(view, settings.band_resolution)
        straddle.append(s)
        unresolved.append(u)
        dead.append(d)
    cell.straddle = tuple(straddle)
    cell.unresolved = tuple(unresolved)
    cell.dead = tuple(dead)
    cell.force_candidate = (not any(dead)) and any(
        s and u for s, u in zip(straddle, unresolved)
    )
    if cell.force_candidate:
        cell.forced_axis = _forced_axis(cell, domain, probes, settings)


def _forced_axis(cell: _Cell, domain, probes, settings) -> Optional[int]:
    """Split axis for a band-straddling cell.

    Prefer the axis whose children leave the fewest unresolved straddles
    of the driving probe, then the axis with the smallest worst-child
    interval width; ties fall back to the shallowest depth and the lowest
    axis index.  This keeps slab-shaped shells from triggering splits in
    the transverse directions.
    """
    driving = None
    for idx, (s, u) in enumerate(zip(cell.straddle, cell.unresolved)):
        if s and u:
            driving = probes[idx]
            break
    if driving is None:
        return None
    best = None
    for axis in range(domain.dim):
        if cell.depths[axis] >= settings.max_depth:
            continue
        mid = 0.5 * (cell.lo[axis] + cell.hi[axis])
        lo1, hi1 = cell.lo.copy(), cell.hi.copy()
        hi1[axis] = mid
        lo2, hi2 = cell.lo.copy(), cell.hi.copy()
        lo2[axis] = mid
        pending = 0
        worst_width = 0.0
        for clo, chi in ((lo1, hi1), (lo2, hi2)):
            iv = driving.interval(domain.cell_view(clo, chi))
            s, u, d = driving.status_from_interval(iv, settings.band_resolution)
            if s and u and not d:
                pending += 1
            worst_width = max(worst_width, iv[1] - iv[0])
        key = (pending, worst_width, int(cell.depths[axis]), axis)
        if best is None or key < best[0]:
            best = (key, axis)
    return None if best is None else best[1]


def _error_axis(cell: _Cell, settings) -> Optional[int]:
    """Best split axis by roughness, or None when no useful axis remains.

    A cell whose dominant-roughness axes are all depth-capped cannot be
    improved by splitting the remaining smooth axes; treating it as
    unrefinable lets the run terminate honestly instead of cascading into
    futile transverse subdivision.
    """
    best = None
    for axis in range(len(cell.depths)):
        if cell.depths[axis] >= settings.max_depth:
            continue
        key = (-float(cell.rough[axis]), int(cell.depths[axis]), axis)
        if best is None or key < best[0]:
            best = (key, axis)
    if best is None:
        return None
    full_max = float(np.max(cell.rough))
    if full_max > 0.0 and float(cell.rough[best[1]]) < 0.05 * full_max:
        return None
    return best[1]


def adaptive_integrate(
    domain,
    F: Callable[[np.ndarray], np.ndarray],
    probes: Sequence[BandProbe],
    settings: QuadratureSettings,
) -> Estimate:
    rule_hi = _rule(domain.dim, settings.order)
    rule_lo = _rule(domain.dim, max(2, settings.order - 1))
    workers = _resolve_workers(settings)
    per_cell = rule_hi.nodes.shape[0] + rule_lo.nodes.shape[0]
    batch_cells = max(1, _BATCH_POINTS // per_cell)

    root = _Cell(domain.lo.copy(), domain.hi.copy(), np.zeros(domain.dim, dtype=int))
    leaves: List[_Cell] = [root]
    pending: List[_Cell] = [root]
    evals = 0
    converged = False

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            # probe first: cells where some factor provably vanishes skip
            # evaluation entirely (their integrand is exactly zero)
            live: List[_Cell] = []
            for cell in pending:
                _probe_cell(cell, domain, probes, settings)
                if cell.dead and any(cell.dead):
                    cell.value = 0.0
                    cell.err = 0.0
                    cell.rough = np.zeros(domain.dim)
                else:
                    live.append(cell)
            batches = [live[i:i + batch_cells] for i in range(0, len(live), batch_cells)]
            if pool is not None and len(batches) > 1:
                counts = pool.map(
                    lambda b: _evaluate_batch(b, domain, F, rule_hi, rule_lo), batches
                )
                evals += sum(counts)
            else:
                for batch in batches:
                    evals += _evaluate_batch(batch, domain, F, rule_hi, rule_lo)
            pending = []

            total = _pairwise_sum([c.value for c in leaves])
            err_total = 0.0
            for c in leaves:
                err_total += c.err
            target = max(settings.rel_tol * abs(total), settings.abs_floor)

            refine: List[Tuple[_Cell, int]] = []
            seen = set()
            if settings.shell_refine:
                for cell in leaves:
                    if cell.force_candidate and cell.forced_axis is not None:
                        refine.append((cell, cell.forced_axis))
                        seen.add(id(cell))
            if err_total > target:
                # depth-capped cells cannot improve; once no shell forcing is
                # pending and their error alone exceeds the target, the run
                # is honestly unconvergeable at this depth
                if not refine:
                    unreachable = 0.0
                    for cell in leaves:
                        if _error_axis(cell, settings) is None:
                            unreachable += cell.err
                    if unreachable > target:
                        converged = False
                        break
                # two gates: the uniform share of the target, and a head gate
                # keeping refinement on the dominant cells (otherwise the
                # long tail cascades into near-uniform subdivision)
                max_err = max(c.err for c in leaves)
                gate = max(target / (2.0 * len(leaves)), 0.1 * max_err)
                for cell in leaves:
                    if id(cell) in seen or cell.err <= gate:
                        continue
                    axis = _error_axis(cell, settings)
                    if axis is not None:
                        refine.append((cell, axis))
                        seen.add(id(cell))
                if not refine:
                    # every cell sits below the uniform threshold yet the sum
                    # still misses the target: push the worst slice
                    candidates = [c for c in leaves if c.err > 0 and id(c) not in seen]
                    candidates.sort(key=lambda c: -c.err)
                    quota = max(1, len(candidates) // 20)
                    for cell in candidates:
                        axis = _error_axis(cell, settings)
                        if axis is not None:
                            refine.append((cell, axis))
                            if len(refine) >= quota:
                                break

            if not refine:
                force_pending = settings.shell_refine and any(
                    c.force_candidate for c in leaves
                )
                converged = (err_total <= target) and not force_pending
                break
            if len(leaves) + len(refine) > settings.max_cells:
                converged = False
                break

            axis_of = {id(c): a for c, a in refine}
            new_leaves: List[_Cell] = []
            for cell in leaves:
                axis = axis_of.get(id(cell))
                if axis is None:
                    new_leaves.append(cell)
                    continue
                mid = 0.5 * (cell.lo[axis] + cell.hi[axis])
                depths = cell.depths.copy()
                depths[axis] += 1
                lo_child = _Cell(cell.lo.copy(), cell.hi.copy(), depths)
                lo_child.hi[axis] = mid
                hi_child = _Cell(cell.lo.copy(), cell.hi.copy(), depths.copy())
                hi_child.lo[axis] = mid
                new_leaves.extend((lo_child, hi_child))
                pending.extend((lo_child, hi_child))
            leaves = new_leaves
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    total = _pairwise_sum([c.value for c in leaves])
    err_total = 0.0
    for c in leaves:
        err_total += c.err
    return Estimate(total, err_total, len(leaves), evals, converged)


# ---------------------------------------------------------------------------
# pairings
# ---------------------------------------------------------------------------

def _density_batchify(raw, npts: int) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 0:
        return np.full(npts, float(arr))
    return arr


def pair_product(
    spec: ProductSpec,
    js: Sequence[float],
    psi: Optional[TestFunction],
    box: Box,
    settings: QuadratureSettings,
) -> Estimate:
    """Integral of psi times the density of the regularized product.

    psi = None integrates the bare density over the box (mass mode); a
    bump must be compactly supported inside the box.
    """
    if spec.total_degree != spec.n:
        raise BidegreeError(
            f"pairing needs total degree n = {spec.n}, got {spec.total_degree}"
        )
    if box.n != spec.n:
        raise DimensionMismatchError("box and product live on different C^n")
    if psi is not None and not psi.is_supported_in(box):
        raise RangeError("test function support must lie inside the box")

    def F(z: np.ndarray) -> np.ndarray:
        dens = _density_batchify(top_density(product_form(spec, js, z)), z.shape[0])
        if psi is not None:
            dens = dens * psi.value(z)
        return dens

    probes = product_band_probes(spec, js)
    return adaptive_integrate(BoxDomain(box), F, probes, settings)


def pair_partial(
    spec: ProductSpec,
    js: Sequence[float],
    tau: BidegreeForm,
    psi: Optional[TestFunction],
    box: Box,
    settings: QuadratureSettings,
) -> Estimate:
    """Pair a (p, p)-product against a constant complementary-degree form."""
    p = spec.total_degree
    if p > spec.n:
        raise BidegreeError("total degree exceeds the ambient dimension")
    if (tau.p, tau.q) != (spec.n - p, spec.n - p):
        raise BidegreeError(
            f"complementary form must have bidegree ({spec.n - p},{spec.n - p})"
        )
    if psi is not None and not psi.is_supported_in(box):
        raise RangeError("test function support must lie inside the box")

    def F(z: np.ndarray) -> np.ndarray:
        dens = _density_batchify(
            top_density(wedge(product_form(spec, js, z), tau)), z.shape[0]
        )
        if psi is not None:
            dens = dens * psi.value(z)
        return dens

    probes = product_band_probes(spec, js)
    return adaptive_integrate(BoxDomain(box), F, probes, settings)


def pair_residue(
    factors: Sequence[ResidueFactorSpec],
    eps: Sequence[float],
    theta_form: BidegreeForm,
    psi: Optional[TestFunction],
    box: Box,
    settings: QuadratureSettings,
) -> Estimate:
    """Integral of psi against the residue kernel product wedged with theta."""
    n = factors[0].n
    deg_p = theta_form.p
    deg_q = theta_form.q + sum(1 for f in factors if f.mode == ResidueFactorSpec.RESIDUE)
    if (deg_p, deg_q) != (n, n):
        raise BidegreeError("residue pairing does not reach top bidegree")
    if psi is not None and not psi.is_supported_in(box):
        raise RangeError("test function support must lie inside the box")

    def F(z: np.ndarray) -> np.ndarray:
        dens = _density_batchify(
            top_density(residue_product_form(factors, eps, theta_form, z)), z.shape[0]
        )
        if psi is not None:
            dens = dens * psi.value(z)
        return dens

    probes = residue_band_probes(factors, eps)
    return adaptive_integrate(BoxDomain(box), F, probes, settings)


def stokes_check(
    phi: QpshFunction,
    rho: Smoother,
    j: float,
    psi: TestFunction,
    box: Box,
    settings: QuadratureSettings,
) -> float:
    """Self-adjointness residual |<dd^c(rho_j o phi), psi> - <rho_j o phi, dd^c psi>|.

    Both pairings are densities of (1,1)-forms, so the check runs on C^1.
    """
    if phi.n != 1:
        raise DimensionMismatchError("the Stokes residual check is a C^1 diagnostic")
    if not psi.is_supported_in(box):
        raise RangeError("test function support must lie inside the box")
    domain = BoxDomain(box)
    cut = rho.cutoff
    probe = BandProbe(
        phi=phi,
        t_lo=cut.log_a - j,
        t_hi=cut.log_b - j,
        kind=ALPHA_KIND,
        eta_zero=True,
        theta_zero=True,
        pluriharmonic=phi.is_pluriharmonic_off_zero,
    )

    def lhs(z: np.ndarray) -> np.ndarray:
        H, _ = _smoothed_hessian(phi, rho, j, z)
        return _density_batchify(top_density(hermitian_to_form(H)), z.shape[0]) * psi.value(z)

    def rhs(z: np.ndarray) -> np.ndarray:
        smooth = rho.rho(phi.log_value(z) + j) - j
        dens = _density_batchify(top_density(hermitian_to_form(psi.hessian(z))), z.shape[0])
        return smooth * dens

    left = adaptive_integrate(domain, lhs, [probe], settings)
    right = adaptive_integrate(domain, rhs, [probe], settings)
    return abs(left.value - right.value)


# ---------------------------------------------------------------------------
# two-chart projective line
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChartData:
    phi: QpshFunction
    theta: ClosedOneOneForm

    def __post_init__(self):
        if self.phi.n != 1:
            raise DimensionMismatchError("projective-line charts are one dimensional")


@dataclass(frozen=True)
class ProjectiveLineAtlas:
    """Per-chart data on |z| <= 1 and |w| <= 1, glued along w = 1/z."""

    chart0: ChartData
    chart1: ChartData
    smoother: Smoother


def _chart_density(chart: ChartData, rho: Smoother, j: float, pts: np.ndarray) -> np.ndarray:
    H, _ = _smoothed_hessian(chart.phi, rho, j, pts)
    theta_H = chart.theta.hermitian(pts)
    return _density_batchify(top_density(hermitian_to_form(theta_H + H)), pts.shape[0])


def p1_mass(atlas: ProjectiveLineAtlas, j: float, settings: QuadratureSettings) -> Estimate:
    """Total mass of theta + dd^c(rho_j o phi) over the two closed chart disks.

    The chart representations are checked for consistency on the overlap
    circle |z| = 1 before integrating; the glued current is globally exact
    plus theta, so the value is the theta mass for every j.
    """
    rho = atlas.smoother
    angles = np.linspace(0.0, 2.0 * math.pi, 9)[:-1] + 0.05
    z0 = np.exp(1j * angles).reshape(-1, 1)
    z1 = 1.0 / z0
    d0 = _chart_density(atlas.chart0, rho, j, z0)
    d1 = _chart_density(atlas.chart1, rho, j, z1)
    worst = float(np.max(np.abs(d0 - d1)))
    scale = max(1.0, float(np.max(np.abs(d0))))
    if worst > 1e-8 * scale:
        raise ChartMismatchError(
            f"chart densities disagree on |z| = 1 by {worst:.3e} (scale {scale:.3e})"
        )

    total_value = 0.0
    total_err = 0.0
    cells = 0
    evals = 0
    ok = True
    for chart in (atlas.chart0, atlas.chart1):
        cut = rho.cutoff
        probe = BandProbe(
            phi=chart.phi,
            t_lo=cut.log_a - j,
            t_hi=cut.log_b - j,
            kind=ALPHA_KIND,
            eta_zero=chart.theta.is_zero,
            theta_zero=chart.theta.is_zero,
            pluriharmonic=chart.phi.is_pluriharmonic_off_zero,
        )

        def F(z: np.ndarray, chart=chart) -> np.ndarray:
            return _chart_density(chart, rho, j, z)

        est = adaptive_integrate(PolarDomain(1.0), F, [probe], settings)
        total_value += est.value
        total_err += est.error
        cells += est.cells
        evals += est.evals
        ok = ok and est.converged
    return Estimate(total_value, total_err, cells, evals, ok)


# ---------------------------------------------------------------------------
# plain tensor rule (reference oracles, exactness tests)
# ---------------------------------------------------------------------------

def gauss_tensor_integral(
    func: Callable[[np.ndarray], np.ndarray], box: Box, order: int = 8
) -> float:
    """Single-cell tensor Gauss-Legendre integral over a box (no adaptivity)."""
    domain = BoxDomain(box)
    rule = _rule(domain.dim, order)
    mid = 0.5 * (domain.lo + domain.hi)
    half = 0.5 * (domain.hi - domain.lo)
    pts = mid + rule.nodes * half
    z, jac = domain.map_points(pts)
    vals = np.asarray(func(z), dtype=float) * jac
    return float(np.prod(half)) * float(rule.weights @ vals)
