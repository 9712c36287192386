"""Run configuration: a versioned JSON schema, strict validation with
field-path diagnostics, and serializers for every object that can appear
in a config.

The schema is documented in the README.  Unknown fields are rejected;
every diagnostic names the offending field path so a bad config fails
before any computation starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .exterior import BidegreeForm
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
)
from .quadrature import Box, QuadratureSettings, TestFunction
from .regularizer import (
    ConstantOneOneForm,
    FactorSpec,
    FubiniStudyOneOneForm,
    PathSchedule,
    PolynomialSchedule,
    ProductSpec,
    TableSchedule,
    zero_one_one,
)

SCHEMA = "mixedma-run/1"
MODES = ("pair", "converge", "verify", "oracle", "residue")


# ---------------------------------------------------------------------------
# validation helpers
# ---------------------------------------------------------------------------

def _expect_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object")
    return value

def _expect_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list")
    return value

def _expect_keys(d: dict, path: str, required: Sequence[str], optional: Sequence[str] = ()):
    for key in required:
        if key not in d:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    allowed = set(required) | set(optional)
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")

def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "expected a number")
    return float(value)

def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "expected an integer")
    return value

def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(path, "expected a string")
    return value

def _boolean(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(path, "expected a boolean")
    return value

def _complex_pair(value, path: str) -> complex:
    pair = _expect_list(value, path)
    if len(pair) != 2:
        raise ConfigError(path, "expected [re, im]")
    return complex(_number(pair[0], f"{path}[0]"), _number(pair[1], f"{path}[1]"))

def _pair(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


# ---------------------------------------------------------------------------
# object (de)serializers
# ---------------------------------------------------------------------------

def poly_to_dict(poly: HoloPolynomial) -> dict:
    terms = [
        {"exps": list(exps), "coeff": _pair(coeff)}
        for exps, coeff in sorted(poly.terms.items())
    ]
    return {"n": poly.n, "terms": terms}

def poly_from_dict(d, path: str) -> HoloPolynomial:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("n", "terms"))
    n = _integer(d["n"], f"{path}.n")
    if n < 1:
        raise ConfigError(f"{path}.n", "ambient dimension must be >= 1")
    terms = {}
    for i, item in enumerate(_expect_list(d["terms"], f"{path}.terms")):
        ipath = f"{path}.terms[{i}]"
        item = _expect_dict(item, ipath)
        _expect_keys(item, ipath, required=("exps", "coeff"))
        exps = tuple(
            _integer(e, f"{ipath}.exps[{k}]")
            for k, e in enumerate(_expect_list(item["exps"], f"{ipath}.exps"))
        )
        if len(exps) != n or any(e < 0 for e in exps):
            raise ConfigError(f"{ipath}.exps", f"expected {n} exponents >= 0")
        coeff = _complex_pair(item["coeff"], f"{ipath}.coeff")
        terms[exps] = terms.get(exps, 0j) + coeff
    return HoloPolynomial(n, terms)

def potential_to_dict(v: SmoothPotential) -> dict:
    atoms = []
    for atom in v.atoms:
        if isinstance(atom, ConstantTerm):
            atoms.append({"kind": "constant", "value": float(atom.value)})
        elif isinstance(atom, RealPolynomialTerm):
            atoms.append({
                "kind": "real_poly",
                "coeffs": [
                    {"z_exps": list(a), "zbar_exps": list(b), "coeff": _pair(c)}
                    for (a, b), c in sorted(atom.coeffs.items())
                ],
            })
        elif isinstance(atom, LogOnePlusSquaresTerm):
            atoms.append({
                "kind": "log_one_plus",
                "weight": float(atom.weight),
                "polys": [poly_to_dict(p) for p in atom.polys],
            })
        else:
            raise ConfigError("potential", f"unserializable atom {type(atom).__name__}")
    return {"n": v.n, "atoms": atoms}

def potential_from_dict(d, path: str) -> SmoothPotential:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("n", "atoms"))
    n = _integer(d["n"], f"{path}.n")
    atoms = []
    for i, item in enumerate(_expect_list(d["atoms"], f"{path}.atoms")):
        ipath = f"{path}.atoms[{i}]"
        item = _expect_dict(item, ipath)
        kind = _string(item.get("kind", ""), f"{ipath}.kind")
        if kind == "constant":
            _expect_keys(item, ipath, required=("kind", "value"))
            atoms.append(ConstantTerm(_number(item["value"], f"{ipath}.value")))
        elif kind == "real_poly":
            _expect_keys(item, ipath, required=("kind", "coeffs"))
            coeffs = {}
            for k, c in enumerate(_expect_list(item["coeffs"], f"{ipath}.coeffs")):
                cpath = f"{ipath}.coeffs[{k}]"
                c = _expect_dict(c, cpath)
                _expect_keys(c, cpath, required=("z_exps", "zbar_exps", "coeff"))
                a = tuple(_integer(e, f"{cpath}.z_exps") for e in _expect_list(c["z_exps"], f"{cpath}.z_exps"))
                b = tuple(_integer(e, f"{cpath}.zbar_exps") for e in _expect_list(c["zbar_exps"], f"{cpath}.zbar_exps"))
                if len(a) != n or len(b) != n:
                    raise ConfigError(cpath, f"exponent lists must have length {n}")
                coeffs[(a, b)] = coeffs.get((a, b), 0j) + _complex_pair(c["coeff"], f"{cpath}.coeff")
            try:
                atoms.append(RealPolynomialTerm(n, coeffs))
            except Exception as exc:
                raise ConfigError(ipath, str(exc))
        elif kind == "log_one_plus":
            _expect_keys(item, ipath, required=("kind", "weight", "polys"))
            polys = tuple(
                poly_from_dict(p, f"{ipath}.polys[{k}]")
                for k, p in enumerate(_expect_list(item["polys"], f"{ipath}.polys"))
            )
            atoms.append(LogOnePlusSquaresTerm(_number(item["weight"], f"{ipath}.weight"), polys))
        else:
            raise ConfigError(f"{ipath}.kind", f"unknown potential atom kind {kind!r}")
    return SmoothPotential(n, tuple(atoms))

def qpsh_to_dict(phi: QpshFunction) -> dict:
    return {
        "c": float(phi.c),
        "f": [poly_to_dict(p) for p in phi.f.components],
        "v": potential_to_dict(phi.v),
    }

def qpsh_from_dict(d, path: str) -> QpshFunction:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("c", "f", "v"))
    c = _number(d["c"], f"{path}.c")
    if c <= 0:
        raise ConfigError(f"{path}.c", "c must be positive")
    comps = tuple(
        poly_from_dict(p, f"{path}.f[{i}]")
        for i, p in enumerate(_expect_list(d["f"], f"{path}.f"))
    )
    if not comps:
        raise ConfigError(f"{path}.f", "need at least one tuple component")
    v = potential_from_dict(d["v"], f"{path}.v")
    try:
        return QpshFunction(c, HoloTuple(comps), v)
    except Exception as exc:
        raise ConfigError(path, str(exc))

def cutoff_to_dict(cut: Cutoff) -> dict:
    return {"a": float(cut.a), "b": float(cut.b), "profile": cut.profile}

def cutoff_from_dict(d, path: str) -> Cutoff:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("a", "b"), optional=("profile",))
    a = _number(d["a"], f"{path}.a")
    b = _number(d["b"], f"{path}.b")
    profile = _string(d.get("profile", "quintic"), f"{path}.profile")
    try:
        return Cutoff(a, b, profile)
    except Exception as exc:
        raise ConfigError(path, str(exc))

def one_one_to_dict(form) -> dict:
    if isinstance(form, FubiniStudyOneOneForm):
        return {"kind": "fubini_study"}
    if isinstance(form, ConstantOneOneForm):
        if form.is_zero:
            return {"kind": "zero"}
        return {
            "kind": "constant",
            "matrix": [[_pair(v) for v in row] for row in form.matrix],
        }
    raise ConfigError("one_one", f"unserializable form {type(form).__name__}")

def one_one_from_dict(d, path: str, n: int):
    d = _expect_dict(d, path)
    kind = _string(d.get("kind", ""), f"{path}.kind")
    if kind == "zero":
        _expect_keys(d, path, required=("kind",))
        return zero_one_one(n)
    if kind == "fubini_study":
        _expect_keys(d, path, required=("kind",))
        return FubiniStudyOneOneForm(n)
    if kind == "constant":
        _expect_keys(d, path, required=("kind", "matrix"))
        rows = _expect_list(d["matrix"], f"{path}.matrix")
        if len(rows) != n:
            raise ConfigError(f"{path}.matrix", f"expected {n} rows")
        M = np.zeros((n, n), dtype=complex)
        for i, row in enumerate(rows):
            row = _expect_list(row, f"{path}.matrix[{i}]")
            if len(row) != n:
                raise ConfigError(f"{path}.matrix[{i}]", f"expected {n} entries")
            for jj, entry in enumerate(row):
                M[i, jj] = _complex_pair(entry, f"{path}.matrix[{i}][{jj}]")
        try:
            return ConstantOneOneForm(M)
        except Exception as exc:
            raise ConfigError(f"{path}.matrix", str(exc))
    raise ConfigError(f"{path}.kind", f"unknown (1,1)-form kind {kind!r}")

def factor_to_dict(factor: FactorSpec) -> dict:
    return {
        "phi": qpsh_to_dict(factor.phi),
        "theta": one_one_to_dict(factor.theta),
        "eta": one_one_to_dict(factor.eta),
        "m": factor.m,
        "cutoff": cutoff_to_dict(factor.smoother.cutoff),
    }

def factor_from_dict(d, path: str) -> FactorSpec:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("phi", "m"), optional=("theta", "eta", "cutoff"))
    phi = qpsh_from_dict(d["phi"], f"{path}.phi")
    n = phi.n
    m = _integer(d["m"], f"{path}.m")
    if m < 1:
        raise ConfigError(f"{path}.m", "multiplicity m must be >= 1")
    theta = one_one_from_dict(d["theta"], f"{path}.theta", n) if "theta" in d else zero_one_one(n)
    eta = one_one_from_dict(d["eta"], f"{path}.eta", n) if "eta" in d else zero_one_one(n)
    cutoff = (
        cutoff_from_dict(d["cutoff"], f"{path}.cutoff")
        if "cutoff" in d
        else Cutoff(math.exp(-1.0), math.e)
    )
    return FactorSpec(phi=phi, theta=theta, eta=eta, m=m, smoother=Smoother(cutoff))

def product_to_dict(spec: ProductSpec) -> dict:
    return {"n": spec.n, "factors": [factor_to_dict(f) for f in spec.factors]}

def product_from_dict(d, path: str) -> ProductSpec:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("n", "factors"))
    n = _integer(d["n"], f"{path}.n")
    factors = tuple(
        factor_from_dict(f, f"{path}.factors[{i}]")
        for i, f in enumerate(_expect_list(d["factors"], f"{path}.factors"))
    )
    if not factors:
        raise ConfigError(f"{path}.factors", "need at least one factor")
    if any(f.phi.n != n for f in factors):
        raise ConfigError(f"{path}.factors", "factor dimension does not match n")
    return ProductSpec(factors)

def box_to_dict(box: Box) -> dict:
    return {
        "center": [_pair(c) for c in box.center],
        "half_widths": [float(w) for w in box.half_widths],
    }

def box_from_dict(d, path: str) -> Box:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("center", "half_widths"))
    center = [
        _complex_pair(c, f"{path}.center[{i}]")
        for i, c in enumerate(_expect_list(d["center"], f"{path}.center"))
    ]
    widths = [
        _number(w, f"{path}.half_widths[{i}]")
        for i, w in enumerate(_expect_list(d["half_widths"], f"{path}.half_widths"))
    ]
    try:
        return Box(np.array(center, dtype=complex), np.array(widths))
    except Exception as exc:
        raise ConfigError(path, str(exc))

def test_function_to_dict(psi: Optional[TestFunction]):
    if psi is None:
        return None
    return {
        "centers": [_pair(c) for c in psi.centers],
        "radii": [float(r) for r in psi.radii],
    }

def test_function_from_dict(d, path: str) -> TestFunction:
    d = _expect_dict(d, path)
    _expect_keys(d, path, required=("centers", "radii"))
    centers = [
        _complex_pair(c, f"{path}.centers[{i}]")
        for i, c in enumerate(_expect_list(d["centers"], f"{path}.centers"))
    ]
    radii = [
        _number(r, f"{path}.radii[{i}]")
        for i, r in enumerate(_expect_list(d["radii"], f"{path}.radii"))
    ]
    try:
        return TestFunction(np.array(centers, dtype=complex), np.array(radii))
    except Exception as exc:
        raise ConfigError(path, str(exc))

def schedule_to_dict(schedule: PathSchedule) -> dict:
    if isinstance(schedule, PolynomialSchedule):
        return {
            "kind": "polynomial",
            "exponents": list(schedule.exponents),
            "scales": list(schedule.scales),
        }
    return {"kind": "table", "rows": [list(r) for r in schedule.rows]}

def schedule_from_dict(d, path: str) -> PathSchedule:
    d = _expect_dict(d, path)
    kind = _string(d.get("kind", ""), f"{path}.kind")
    if kind == "polynomial":
        _expect_keys(d, path, required=("kind", "exponents"), optional=("scales",))
        exps = [
            _integer(e, f"{path}.exponents[{i}]")
            for i, e in enumerate(_expect_list(d["exponents"], f"{path}.exponents"))
        ]
        scales = [
            _number(s, f"{path}.scales[{i}]")
            for i, s in enumerate(_expect_list(d.get("scales", []), f"{path}.scales"))
        ]
        try:
            return PolynomialSchedule(tuple(exps), tuple(scales))
        except Exception as exc:
            raise ConfigError(path, str(exc))
    if kind == "table":
        _expect_keys(d, path, required=("kind", "rows"))
        rows = [
            [_number(x, f"{path}.rows[{i}][{k}]") for k, x in enumerate(_expect_list(r, f"{path}.rows[{i}]"))]
            for i, r in enumerate(_expect_list(d["rows"], f"{path}.rows"))
        ]
        try:
            return TableSchedule(tuple(tuple(r) for r in rows))
        except Exception as exc:
            raise ConfigError(path, str(exc))
    raise ConfigError(f"{path}.kind", f"unknown schedule kind {kind!r}")

def settings_to_dict(s: QuadratureSettings) -> dict:
    return {
        "order": s.order,
        "max_depth": s.max_depth,
        "rel_tol": s.rel_tol,
        "abs_floor": s.abs_floor,
        "shell_refine": s.shell_refine,
        "max_cells": s.max_cells,
        "band_resolution": s.band_resolution,
        "workers": s.workers,
    }

def settings_from_dict(d, path: str) -> QuadratureSettings:
    d = _expect_dict(d, path)
    _expect_keys(
        d, path, required=(),
        optional=(
            "order", "max_depth", "rel_tol", "abs_floor",
            "shell_refine", "max_cells", "band_resolution", "workers",
        ),
    )
    kwargs: Dict[str, Any] = {}
    if "order" in d:
        kwargs["order"] = _integer(d["order"], f"{path}.order")
    if "max_depth" in d:
        kwargs["max_depth"] = _integer(d["max_depth"], f"{path}.max_depth")
    if "rel_tol" in d:
        kwargs["rel_tol"] = _number(d["rel_tol"], f"{path}.rel_tol")
    if "abs_floor" in d:
        kwargs["abs_floor"] = _number(d["abs_floor"], f"{path}.abs_floor")
    if "shell_refine" in d:
        kwargs["shell_refine"] = _boolean(d["shell_refine"], f"{path}.shell_refine")
    if "max_cells" in d:
        kwargs["max_cells"] = _integer(d["max_cells"], f"{path}.max_cells")
    if "band_resolution" in d:
        kwargs["band_resolution"] = _number(d["band_resolution"], f"{path}.band_resolution")
    if "workers" in d and d["workers"] is not None:
        kwargs["workers"] = _integer(d["workers"], f"{path}.workers")
    try:
        return QuadratureSettings(**kwargs)
    except Exception as exc:
        raise ConfigError(path, str(exc))


# ---------------------------------------------------------------------------
# the run config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    mode: str
    scenario: Optional[str] = None
    scenario_params: Dict[str, Any] = field(default_factory=dict)
    product: Optional[ProductSpec] = None
    psi: Optional[TestFunction] = None
    box: Optional[Box] = None
    schedule: Optional[PathSchedule] = None
    nus: Tuple[float, ...] = ()
    js: Tuple[float, ...] = ()
    eps: Tuple[float, ...] = ()
    oracle_name: Optional[str] = None
    settings: Optional[QuadratureSettings] = None
    csv_path: Optional[str] = None
    json_path: Optional[str] = None

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return config_to_dict(self) == config_to_dict(other)


def config_to_dict(config: RunConfig) -> dict:
    out: Dict[str, Any] = {"schema": SCHEMA, "mode": config.mode}
    if config.scenario is not None:
        out["scenario"] = config.scenario
    if config.scenario_params:
        out["params"] = dict(sorted(config.scenario_params.items()))
    if config.product is not None:
        out["product"] = product_to_dict(config.product)
    if config.psi is not None:
        out["test_function"] = test_function_to_dict(config.psi)
    if config.box is not None:
        out["box"] = box_to_dict(config.box)
    if config.schedule is not None:
        out["schedule"] = schedule_to_dict(config.schedule)
    if config.nus:
        out["nu"] = {"start": config.nus[0], "stop": config.nus[-1]} if (
            len(config.nus) > 1
            and all(b - a == 1.0 for a, b in zip(config.nus, config.nus[1:]))
        ) else {"values": list(config.nus)}
    if config.js:
        out["js"] = list(config.js)
    if config.eps:
        out["eps"] = list(config.eps)
    if config.oracle_name is not None:
        out["name"] = config.oracle_name
    if config.settings is not None:
        out["settings"] = settings_to_dict(config.settings)
    output: Dict[str, Any] = {}
    if config.csv_path:
        output["csv"] = config.csv_path
    if config.json_path:
        output["json"] = config.json_path
    if output:
        out["output"] = output
    return out


def serialize_config(config: RunConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True)


def _parse_nu(d, path: str) -> Tuple[float, ...]:
    d = _expect_dict(d, path)
    if "values" in d:
        _expect_keys(d, path, required=("values",))
        return tuple(
            _number(v, f"{path}.values[{i}]")
            for i, v in enumerate(_expect_list(d["values"], f"{path}.values"))
        )
    _expect_keys(d, path, required=("start", "stop"))
    start = _number(d["start"], f"{path}.start")
    stop = _number(d["stop"], f"{path}.stop")
    if stop < start:
        raise ConfigError(path, "stop must be >= start")
    count = int(round(stop - start)) + 1
    return tuple(start + k for k in range(count))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"not valid JSON: {exc}")
    raw = _expect_dict(raw, "<config>")
    _expect_keys(
        raw, "", required=("schema", "mode"),
        optional=(
            "scenario", "params", "product", "test_function", "box",
            "schedule", "nu", "js", "eps", "name", "settings", "output",
        ),
    )
    if _string(raw["schema"], "schema") != SCHEMA:
        raise ConfigError("schema", f"expected {SCHEMA!r}")
    mode = _string(raw["mode"], "mode")
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {', '.join(MODES)}")

    scenario = _string(raw["scenario"], "scenario") if "scenario" in raw else None
    params = dict(_expect_dict(raw.get("params", {}), "params"))
    product = product_from_dict(raw["product"], "product") if "product" in raw else None
    psi = (
        test_function_from_dict(raw["test_function"], "test_function")
        if raw.get("test_function") is not None and "test_function" in raw
        else None
    )
    box = box_from_dict(raw["box"], "box") if "box" in raw else None
    schedule = schedule_from_dict(raw["schedule"], "schedule") if "schedule" in raw else None
    nus = _parse_nu(raw["nu"], "nu") if "nu" in raw else ()
    js = tuple(
        _number(v, f"js[{i}]") for i, v in enumerate(_expect_list(raw["js"], "js"))
    ) if "js" in raw else ()
    eps = tuple(
        _number(v, f"eps[{i}]") for i, v in enumerate(_expect_list(raw["eps"], "eps"))
    ) if "eps" in raw else ()
    for i, e in enumerate(eps):
        if e <= 0:
            raise ConfigError(f"eps[{i}]", "eps must be positive")
    oracle_name = _string(raw["name"], "name") if "name" in raw else None
    settings = settings_from_dict(raw["settings"], "settings") if "settings" in raw else None

    csv_path = json_path = None
    if "output" in raw:
        out = _expect_dict(raw["output"], "output")
        _expect_keys(out, "output", required=(), optional=("csv", "json"))
        if "csv" in out:
            csv_path = _string(out["csv"], "output.csv")
        if "json" in out:
            json_path = _string(out["json"], "output.json")

    # mode-specific requirements
    if mode in ("pair", "converge"):
        if scenario is None and product is None:
            raise ConfigError("scenario", "pair/converge need a scenario or an inline product")
        if scenario is not None and product is not None:
            raise ConfigError("product", "give either a scenario or an inline product, not both")
        if product is not None and box is None:
            raise ConfigError("box", "an inline product needs a box")
    if mode == "pair" and not js:
        raise ConfigError("js", "pair mode needs explicit levels js")
    if mode == "converge":
        if schedule is None:
            raise ConfigError("schedule", "converge mode needs a schedule")
        if not nus:
            raise ConfigError("nu", "converge mode needs a nu range")
    if mode == "oracle" and oracle_name is None:
        raise ConfigError("name", "oracle mode needs a scenario name")
    if mode == "residue":
        if scenario is None:
            raise ConfigError("scenario", "residue mode needs a residue scenario name")
        if not eps:
            raise ConfigError("eps", "residue mode needs explicit eps values")

    return RunConfig(
        mode=mode,
        scenario=scenario,
        scenario_params=params,
        product=product,
        psi=psi,
        box=box,
        schedule=schedule,
        nus=nus,
        js=js,
        eps=eps,
        oracle_name=oracle_name,
        settings=settings,
        csv_path=csv_path,
        json_path=json_path,
    )
