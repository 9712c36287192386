"""Config-driven experiment runner with machine-readable outputs.

Modes:

  pair      one pairing of a scenario (or inline product) at explicit levels
  converge  a convergence table along a path schedule
  verify    the full acceptance battery; exit 1 on any failure
  oracle    print a registered oracle value
  residue   residue-kernel pairing at explicit eps scales

Every data-producing mode emits the same CSV layout

    nu,j_1..j_r,value,quad_error,converged,oracle,abs_dev

with 17 significant digits, so repeated runs of one config are comparable
byte for byte.  Exit codes: 0 success, 1 acceptance failure (verify),
2 config violation, 3 budget exhaustion.
"""

from __future__ import annotations

import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__ as _engine_version
from .config import (
    MODES,
    RunConfig,
    config_to_dict,
    parse_config,
    serialize_config,
)
from .errors import ConfigError, MixedMAError
from .quadrature import Estimate, pair_product
from .regularizer import check_admissible, eps_of_j
from .scenarios import (
    ConvergenceTable,
    TableRow,
    evaluate_scenario,
    get_scenario,
    oracle_value,
    run_scenario,
)

EXIT_OK = 0
EXIT_ACCEPTANCE_FAILURE = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3

# the engine is deterministic end to end; the seed field is kept for
# schema stability and always reads 0
DETERMINISM_SEED = 0


@dataclass
class RunReport:
    config: dict
    mode: str
    rows: List[dict] = field(default_factory=list)
    oracle: Optional[float] = None
    oracle_derivation: Optional[str] = None
    final_abs_dev: Optional[float] = None
    verdict: Optional[str] = None
    criteria: List[dict] = field(default_factory=list)
    wall_time_s: float = 0.0
    engine_version: str = _engine_version
    determinism_seed: int = DETERMINISM_SEED
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "mode": self.mode,
            "rows": self.rows,
            "oracle": self.oracle,
            "oracle_derivation": self.oracle_derivation,
            "final_abs_dev": self.final_abs_dev,
            "verdict": self.verdict,
            "criteria": self.criteria,
            "wall_time_s": self.wall_time_s,
            "engine_version": self.engine_version,
            "determinism_seed": self.determinism_seed,
            "exit_code": self.exit_code,
        }


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def rows_to_csv(rows: Sequence[dict], arity: int) -> str:
    header = ["nu"] + [f"j_{k + 1}" for k in range(arity)] + [
        "value", "quad_error", "converged", "oracle", "abs_dev",
    ]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        parts = [_fmt(row["nu"])]
        parts += [_fmt(j) for j in row["js"]]
        parts.append(_fmt(row["value"]))
        parts.append(_fmt(row["quad_error"]))
        parts.append("true" if row["converged"] else "false")
        parts.append("" if row.get("oracle") is None else _fmt(row["oracle"]))
        parts.append("" if row.get("abs_dev") is None else _fmt(row["abs_dev"]))
        buf.write(",".join(parts) + "\n")
    return buf.getvalue()


def _row_dict(nu: float, js: Sequence[float], est: Estimate, oracle: Optional[float]) -> dict:
    row = {
        "nu": float(nu),
        "js": [float(j) for j in js],
        "value": est.value,
        "quad_error": est.error,
        "converged": est.converged,
        "cells": est.cells,
        "evals": est.evals,
    }
    if oracle is not None:
        row["oracle"] = oracle
        row["abs_dev"] = abs(est.value - oracle)
    return row


def _table_rows(table: ConvergenceTable) -> List[dict]:
    rows = []
    for r in table.rows:
        rows.append({
            "nu": r.nu,
            "js": list(r.js),
            "value": r.value,
            "quad_error": r.error,
            "converged": r.converged,
            "oracle": table.oracle.value,
            "abs_dev": abs(r.value - table.oracle.value),
        })
    return rows


def _write_outputs(config: RunConfig, report: RunReport, arity: int):
    if config.csv_path:
        csv_text = rows_to_csv(report.rows, arity)
        _atomic_write(config.csv_path, csv_text)
    if config.json_path:
        _atomic_write(config.json_path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def _atomic_write(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def run(config: RunConfig) -> RunReport:
    """Execute a validated config; outputs are written, exit code recorded."""
    t0 = time.perf_counter()
    report = RunReport(config=config_to_dict(config), mode=config.mode)
    arity = 1

    if config.mode == "oracle":
        orc = oracle_value(config.oracle_name, **config.scenario_params)
        report.oracle = orc.value
        report.oracle_derivation = orc.derivation
        report.wall_time_s = time.perf_counter() - t0
        _write_outputs(config, report, arity)
        return report

    if config.mode == "verify":
        from .acceptance import run_all

        results = run_all(emit=print)
        report.criteria = [r.to_dict() for r in results]
        if not all(r.passed for r in results):
            report.exit_code = EXIT_ACCEPTANCE_FAILURE
        report.wall_time_s = time.perf_counter() - t0
        _write_outputs(config, report, arity)
        return report

    if config.mode == "converge":
        if config.scenario is not None:
            table = run_scenario(
                config.scenario,
                schedule=config.schedule,
                nus=config.nus,
                settings=config.settings,
                **config.scenario_params,
            )
            arity = len(table.rows[0].js)
            report.rows = _table_rows(table)
            report.oracle = table.oracle.value
            report.oracle_derivation = table.oracle.derivation
            report.final_abs_dev = table.final_abs_dev
            report.verdict = table.verdict
        else:
            arity = config.schedule.r
            report.verdict = check_admissible(config.schedule)
            for nu in config.nus:
                js = config.schedule.js(nu)
                est = pair_product(
                    config.product, js, config.psi, config.box,
                    config.settings or _default_settings(),
                )
                report.rows.append(_row_dict(nu, js, est, None))
        if any(not row["converged"] for row in report.rows):
            report.exit_code = EXIT_BUDGET
        report.wall_time_s = time.perf_counter() - t0
        _write_outputs(config, report, arity)
        return report

    if config.mode == "pair":
        js = config.js
        arity = len(js)
        if config.scenario is not None:
            scenario = get_scenario(config.scenario, **config.scenario_params)
            est = evaluate_scenario(scenario, js, config.settings)
            report.oracle = scenario.oracle.value
            report.oracle_derivation = scenario.oracle.derivation
            report.rows.append(_row_dict(0.0, js, est, scenario.oracle.value))
            report.final_abs_dev = abs(est.value - scenario.oracle.value)
        else:
            est = pair_product(
                config.product, js, config.psi, config.box,
                config.settings or _default_settings(),
            )
            report.rows.append(_row_dict(0.0, js, est, None))
        if not est.converged:
            report.exit_code = EXIT_BUDGET
        report.wall_time_s = time.perf_counter() - t0
        _write_outputs(config, report, arity)
        return report

    # residue mode
    scenario = get_scenario(config.scenario, **config.scenario_params)
    if scenario.kind != "residue":
        raise ConfigError("scenario", f"{config.scenario!r} is not a residue scenario")
    js = tuple(-math.log(e) for e in config.eps)
    arity = len(js)
    est = evaluate_scenario(scenario, js, config.settings)
    report.oracle = scenario.oracle.value
    report.oracle_derivation = scenario.oracle.derivation
    report.rows.append(_row_dict(0.0, js, est, scenario.oracle.value))
    report.final_abs_dev = abs(est.value - scenario.oracle.value)
    if not est.converged:
        report.exit_code = EXIT_BUDGET
    report.wall_time_s = time.perf_counter() - t0
    _write_outputs(config, report, arity)
    return report


def _default_settings():
    from .quadrature import QuadratureSettings

    return QuadratureSettings()


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point: mixedma <mode> <config.json>."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) != 2:
        print(
            "usage: python -m mixedma <mode> <config.json>\n"
            f"modes: {', '.join(MODES)}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    mode, path = argv
    if mode not in MODES:
        print(f"mode: expected one of {', '.join(MODES)}, got {mode!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(text)
        if config.mode != mode:
            raise ConfigError("mode", f"config says {config.mode!r} but command line says {mode!r}")
        report = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MixedMAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if config.mode == "oracle":
        print(json.dumps({
            "name": config.oracle_name,
            "value": report.oracle,
            "derivation": report.oracle_derivation,
        }))
    elif config.mode != "verify":
        for row in report.rows:
            js = ",".join(_fmt(j) for j in row["js"])
            dev = "" if row.get("abs_dev") is None else f" abs_dev={_fmt(row['abs_dev'])}"
            print(
                f"nu={_fmt(row['nu'])} j=[{js}] value={_fmt(row['value'])} "
                f"err={_fmt(row['quad_error'])} converged={row['converged']}{dev}"
            )
        if report.verdict is not None:
            print(f"schedule verdict: {report.verdict}")
    return report.exit_code
