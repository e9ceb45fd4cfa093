#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Scenario runner behind main.py.

Every scenario takes a validated ScenarioConfig and an output directory
and writes report.json, manifest.json and its own artifacts. Check
scenarios end in PASS or FAIL, the others in COMPLETE.

Exit codes: 0 PASS/COMPLETE, 1 FAIL or module error, 2 configuration error.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import numpy as np
from pydantic import ValidationError

from phasefront import __version__
from phasefront.bargmann import (
    bargmann_transform,
    closed_form_magnitude,
    phase_space_mass,
    write_phase_map_binary,
    write_phase_map_csv,
)
from phasefront.errors import ConfigInvalid, PhasefrontError, UnsupportedKind
from phasefront.field_grid import GridSpec1D, SignalSpec, synthesize, write_signal_csv
from phasefront.hamflow import (
    HamiltonianField,
    QuadraticHamiltonian,
    direction_map,
    flow_numeric,
    flow_quadratic,
    symplectic_defect,
)
from phasefront.nonlinearity import by_name
from phasefront.paradiff import (
    decompose,
    flat_decay_slope,
    flat_operator_ratio,
    microlocal_composition_check,
    moser_family,
    moser_ratio,
    seminorm_probe,
    symbol_split,
)
from phasefront.schemas import DEFAULT_GRIDS, DEFAULT_TIMES, HamiltonianSection, RunManifest, ScenarioConfig
from phasefront.schrodinger import EvolutionConfig, propagate_strang
from phasefront.wavefront import compare_to_flow, detect_wavefront

logger = logging.getLogger(__name__)

STATUS_EXIT = {"PASS": 0, "COMPLETE": 0, "FAIL": 1, "ERROR": 1}

FlowProvider = Union[QuadraticHamiltonian, HamiltonianField]


@dataclass
class ScenarioResult:
    status: str
    report: Dict[str, object]
    artifacts: List[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Config helpers
# ---------------------------------------------------------------------------

def load_config(path: Optional[Path], scenario: str, overrides: Optional[Dict[str, object]] = None) -> ScenarioConfig:
    """
    Read a JSON config (optional), apply command-line overrides and validate.

    Raises:
        ConfigInvalid: unreadable file, bad JSON, schema violation, or a
            missing signal file.
    """
    data: Dict[str, object] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigInvalid(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigInvalid(f"config {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigInvalid(f"config {path} must hold a JSON object")
    if data.get("scenario", scenario) != scenario:
        raise ConfigInvalid(f"config names scenario {data['scenario']!r}, command line asked for {scenario!r}")
    data["scenario"] = scenario
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})

    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigInvalid(str(e)) from e
    if config.datum is not None and config.datum.kind == "file" and not Path(config.datum.path).exists():
        raise ConfigInvalid(f"signal file {config.datum.path} does not exist")
    return config


def resolve_grid(config: ScenarioConfig) -> GridSpec1D:
    L, N = DEFAULT_GRIDS[config.scenario]
    try:
        return GridSpec1D(L=config.L if config.L is not None else L, N=config.N if config.N is not None else N)
    except ValidationError as e:
        raise ConfigInvalid(str(e)) from e


def resolve_datum(config: ScenarioConfig) -> SignalSpec:
    if config.datum is not None:
        return config.datum
    if config.scenario in ("evolve", "propagation-check"):
        return SignalSpec(kind="constant", taper=(0.6, 0.85))
    if config.scenario == "anomaly-demo":
        return SignalSpec.model_validate("chirp(1)")
    if config.scenario == "paradiff-probe":
        return SignalSpec.model_validate("lacunary(1.5, 9)")
    return SignalSpec(kind="constant")


def _potential(section: HamiltonianSection) -> Callable[[np.ndarray], np.ndarray]:
    coefficients = np.asarray(section.potential, dtype=float)
    return lambda x: np.polynomial.polynomial.polyval(x, coefficients)


def _time_factor(section: HamiltonianSection) -> Callable[[float], float]:
    rate = section.rate
    return lambda t: 1.0 + rate * t


def flow_provider(section: HamiltonianSection) -> FlowProvider:
    """Exact quadratic Hamiltonian where one exists, else a field for RK4."""
    if section.kind == "harmonic_oscillator":
        return QuadraticHamiltonian.harmonic_oscillator()
    if section.kind == "free":
        return QuadraticHamiltonian.free()
    if section.kind == "quadratic":
        return QuadraticHamiltonian(np.asarray(section.matrix, dtype=float))
    if section.kind == "time_dependent_oscillator":
        return HamiltonianField.from_quadratic(QuadraticHamiltonian.harmonic_oscillator(), _time_factor(section))
    V = _potential(section)
    return HamiltonianField(1, lambda t, x, xi: 0.5 * xi[0] ** 2 + float(V(x[0])), name="potential")


def evolution_config(config: ScenarioConfig, t_final: float, snapshots: List[float]) -> EvolutionConfig:
    section = config.hamiltonian
    kind = "harmonic_oscillator" if section.kind == "time_dependent_oscillator" else section.kind
    try:
        return EvolutionConfig(
            hamiltonian=kind,
            t_final=t_final,
            dt=config.dt or (math.pi / 64 if config.scenario == "propagation-check" else 0.01),
            nonlinearity=by_name(config.F),
            snapshot_times=tuple(snapshots),
            matrix=None if section.matrix is None else np.asarray(section.matrix, dtype=float),
            potential=_potential(section) if section.kind == "potential" else None,
            time_factor=_time_factor(section) if section.kind == "time_dependent_oscillator" else None,
            backend=config.evolution.backend,
            n_modes=config.evolution.n_modes,
            check_nyquist=config.evolution.check_nyquist,
            blowup_factor=config.evolution.blowup_factor,
        )
    except ValueError as e:
        raise ConfigInvalid(f"evolution settings rejected: {e}") from e


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _to_builtin(value):
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, data) -> Path:
    """Sorted keys, fixed indentation: equal inputs give byte-identical files."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(_to_builtin(data), sort_keys=True, indent=2))
        f.write("\n")
    return path


def _banner(title: str) -> None:
    print("\n" + "=" * 70)
    print(title)
    print("=" * 70)


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

def run_bargmann_map(config: ScenarioConfig, out_dir: Path) -> ScenarioResult:
    grid = resolve_grid(config)
    spec = resolve_datum(config)
    u = synthesize(spec, grid)
    pg = config.bargmann.phase_grid()
    pmap = bargmann_transform(u, pg)
    artifacts = [
        write_phase_map_csv(pmap, out_dir / "bargmann_map.csv").name,
        write_phase_map_binary(pmap, out_dir / "bargmann_map.bin").name,
    ]
    report: Dict[str, object] = {
        "datum": spec.label,
        "grid": {"L": grid.L, "N": grid.N},
        "phase_grid": pg.model_dump(),
        "phase_space_mass": phase_space_mass(pmap),
        "l2_norm_squared": u.l2_norm() ** 2,
    }
    X, XI = pg.mesh()
    R = np.hypot(X, XI)
    ring = (R >= config.bargmann.oracle_inner) & (R <= config.bargmann.oracle_outer)
    try:
        oracle = closed_form_magnitude(spec, (X, XI))
        report["oracle_max_error"] = float(np.max(np.abs(pmap.magnitude()[ring] - oracle[ring])))
    except UnsupportedKind:
        report["oracle_max_error"] = None
    return ScenarioResult("COMPLETE", report, artifacts)


def run_wavefront(config: ScenarioConfig, out_dir: Path) -> ScenarioResult:
    grid = resolve_grid(config)
    spec = resolve_datum(config)
    result = detect_wavefront(synthesize(spec, grid), config.wavefront)
    artifacts = [write_json(out_dir / "wavefront.json", result.model_dump()).name]
    report = {
        "datum": spec.label,
        "grid": {"L": grid.L, "N": grid.N},
        "singular_directions": result.singular_directions,
        "clusters": result.clusters,
    }
    return ScenarioResult("COMPLETE", report, artifacts)


def run_flow(config: ScenarioConfig, out_dir: Path) -> ScenarioResult:
    provider = flow_provider(config.hamiltonian)
    t = config.t if config.t is not None else 0.0
    z0 = np.asarray(config.z0, dtype=float)
    report: Dict[str, object] = {"hamiltonian": config.hamiltonian.kind, "t": t, "z0": z0}
    if isinstance(provider, QuadraticHamiltonian):
        result = flow_quadratic(provider, t, z0)
        report["jacobian"] = result.jacobian
        report["symplectic_defect"] = symplectic_defect(result.jacobian)
        endpoint = result.endpoint
    elif t == 0.0:
        endpoint = z0
    else:
        dt = config.dt or abs(t) / 1024.0
        if not 0.0 < dt <= abs(t) / 16.0:
            raise ConfigInvalid(f"dt = {dt} must lie in (0, |t|/16] = (0, {abs(t) / 16.0:.6g}] for t = {t}")
        endpoint = flow_numeric(provider, 0.0, t, z0, dt).endpoint
        report["dt"] = dt
    report["endpoint"] = endpoint
    report["direction_image"] = direction_map(provider, t, math.atan2(z0[1], z0[0]))
    return ScenarioResult("COMPLETE", report)


def run_evolve(config: ScenarioConfig, out_dir: Path) -> ScenarioResult:
    grid = resolve_grid(config)
    spec = resolve_datum(config)
    u0 = synthesize(spec, grid)
    t_final = config.t if config.t is not None else math.pi / 4
    times = sorted(t for t in (config.times or [t_final]) if t <= t_final)
    trace = propagate_strang(u0, evolution_config(config, t_final, times))

    artifacts = []
    for i, (_, snap) in enumerate(trace.snapshots):
        artifacts.append(write_signal_csv(snap, out_dir / f"snapshot_{i}.csv").name)
    diagnostics = trace.diagnostics()
    artifacts.append(write_json(out_dir / "diagnostics.json", diagnostics).name)
    report = {
        "datum": spec.label,
        "grid": {"L": grid.L, "N": grid.N},
        "snapshot_times": diagnostics["snapshot_times"],
        "final_l2_norm": float(trace.norms[-1]),
        "max_relative_norm_drift": diagnostics["max_relative_norm_drift"],
        "max_relative_energy_drift": diagnostics.get("max_relative_energy_drift"),
        "steps": trace.meta["steps"],
    }
    return ScenarioResult("COMPLETE", report, artifacts)


def run_propagation_check(config: ScenarioConfig, out_dir: Path) -> ScenarioResult:
    grid = resolve_grid(config)
    spec = resolve_datum(config)
    u0 = synthesize(spec, grid)
    times = sorted(config.times or DEFAULT_TIMES)
    provider = flow_provider(config.hamiltonian)
    trace = propagate_strang(u0, evolution_config(config, max(times), times))

    params = config.wavefront
    initial = detect_wavefront(u0, params)
    checks = []
    for t, u_t in trace.snapshots:
        later = detect_wavefront(u_t, params)
        match = compare_to_flow(initial, later, lambda theta, t=t: direction_map(provider, t, theta),
                                config.thresholds.bin_tolerance)
        checks.append({
            "t": t,
            "passed": match.passed,
            "singular_directions": later.singular_directions,
            "misses": match.misses,
            "extraneous": match.extraneous,
        })
        print(f"  t = {t:.4f}: {'PASS' if match.passed else 'FAIL'} "
              f"({len(match.misses)} misses, {len(match.extraneous)} extraneous)")
    status = "PASS" if all(c["passed"] for c in checks) else "FAIL"
    report = {
        "datum": spec.label,
        "grid": {"L": grid.L, "N": grid.N},
        "initial_singular_directions": initial.singular_directions,
        "checks": checks,
        "max_relative_norm_drift": trace.diagnostics()["max_relative_norm_drift"],
    }
    return ScenarioResult(status, report)


def run_anomaly_demo(config: ScenarioConfig, out_dir: Path) -> ScenarioResult:
    grid = resolve_grid(config)
    spec = resolve_datum(config)
    if spec.kind != "chirp":
        raise ConfigInvalid(f"anomaly-demo needs a chirp datum, got {spec.label}")
    F = by_name(config.op)
    u = synthesize(spec, grid)
    params = config.wavefront
    report_u = detect_wavefront(u, params)
    report_Fu = detect_wavefront(u.replace(F(u.values)), params)
    match = compare_to_flow(report_u, report_Fu, lambda theta: theta, config.thresholds.bin_tolerance)

    lam = spec.lam
    slope = 2.0 * lam if config.op == "square" else lam
    flagged = set(report_Fu.singular_bins())

    def bins_of(line_slope: float) -> List[int]:
        angle = math.atan(line_slope)
        return [params.bin_index(angle), params.bin_index(angle + math.pi)]

    expected = bins_of(slope)
    checks = {"expected_line_flagged": all(b in flagged for b in expected)}
    if slope != lam:
        checks["original_line_cleared"] = not any(b in flagged for b in bins_of(lam))
    composition = microlocal_composition_check(u, F, config.paradiff.sigma, math.atan(slope), params,
                                               s=config.paradiff.s)
    status = "PASS" if all(checks.values()) else "FAIL"
    report = {
        "datum": spec.label,
        "op": config.op,
        "expected_slope": slope,
        "singular_directions_u": report_u.singular_directions,
        "singular_directions_Fu": report_Fu.singular_directions,
        "anomalous_directions": match.extraneous,
        "checks": checks,
        "composition": composition.model_dump(),
    }
    return ScenarioResult(status, report)


def run_paradiff_probe(config: ScenarioConfig, out_dir: Path) -> ScenarioResult:
    grid = resolve_grid(config)
    spec = resolve_datum(config)
    section = config.paradiff
    thresholds = config.thresholds
    F = by_name(config.op)
    u = synthesize(spec, grid)
    decomposition = decompose(u, F, K=section.K, delta=section.delta)

    residual = decomposition.telescoping_residual(u)
    truncation = decomposition.truncation_error(u)
    checks: Dict[str, bool] = {
        "telescoping": abs(residual - truncation) <= thresholds.telescoping_tolerance,
    }
    slope = flat_decay_slope(decomposition)
    report: Dict[str, object] = {
        "datum": spec.label,
        "op": config.op,
        "grid": {"L": grid.L, "N": grid.N},
        "decomposition": decomposition.summary(),
        "telescoping_residual": residual,
        "truncation_error": truncation,
        "moser_ratio": moser_ratio(u, F, section.s),
        "moser_family": moser_family(grid, F, section.s, config.seed),
    }

    if spec.kind == "lacunary":
        r = spec.r
        bound = -section.delta * r + thresholds.decay_margin
        checks["flat_decay"] = slope is not None and slope <= bound
        report["flat_decay_bound"] = bound
        report["flat_operator_ratio"] = {
            f"{eps:g}": flat_operator_ratio(decomposition, u, section.s, eps, r) for eps in section.eps_values
        }

        symbol_grid = GridSpec1D(L=grid.L, N=section.symbol_N)
        top = int(math.floor(math.log2(0.8 * symbol_grid.nyquist)))
        small_spec = spec.model_copy(update={"levels": min(spec.levels, top)})
        small = decompose(synthesize(small_spec, symbol_grid), F, delta=section.delta)
        M_sharp, M_flat = symbol_split(small.coeffs, delta=section.delta)
        # the low annuli of M_sharp ramp up while 2^{k delta} passes the datum's first frequencies
        tail = (small.levels // 2, small.levels - 1)
        sharp = seminorm_probe(M_sharp, m=0.0, rho=1.0, delta=section.delta, fit_levels=tail)
        flat = seminorm_probe(M_flat, m=-section.delta * r, rho=1.0, delta=section.delta)
        checks["sharp_bounded"] = sharp.slope is None or sharp.slope <= thresholds.sharp_slope
        checks["flat_bounded"] = flat.slope is None or flat.slope <= thresholds.flat_slope
        report["seminorm_sharp"] = sharp.model_dump()
        report["seminorm_flat"] = flat.model_dump()

    report["checks"] = checks
    status = "PASS" if all(checks.values()) else "FAIL"
    return ScenarioResult(status, report)


RUNNERS: Dict[str, Callable[[ScenarioConfig, Path], ScenarioResult]] = {
    "bargmann-map": run_bargmann_map,
    "wavefront": run_wavefront,
    "flow": run_flow,
    "evolve": run_evolve,
    "propagation-check": run_propagation_check,
    "anomaly-demo": run_anomaly_demo,
    "paradiff-probe": run_paradiff_probe,
}


def run(config: ScenarioConfig, out_dir: Path) -> int:
    """
    Run one scenario and write report.json and manifest.json into out_dir.

    Returns:
        Process exit code.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _banner(f"SCENARIO: {config.scenario.upper()}")

    try:
        result = RUNNERS[config.scenario](config, out_dir)
        exit_code = STATUS_EXIT[result.status]
    except ConfigInvalid as e:
        logger.error(f"Configuration error: {e}")
        result = ScenarioResult("ERROR", {"error": type(e).__name__, "message": str(e)})
        exit_code = 2
    except PhasefrontError as e:
        logger.error(f"{config.scenario} failed: {type(e).__name__}: {e}")
        result = ScenarioResult("ERROR", {"error": type(e).__name__, "message": str(e)})
        exit_code = 1

    report = {"scenario": config.scenario, "status": result.status, **result.report}
    artifacts = sorted(result.artifacts + ["report.json"])
    write_json(out_dir / "report.json", report)
    manifest = RunManifest(
        scenario=config.scenario,
        status=result.status,
        exit_code=exit_code,
        version=__version__,
        config=config.model_dump(mode="json"),
        artifacts=artifacts,
    )
    write_json(out_dir / "manifest.json", manifest.model_dump())

    _banner(f"{config.scenario}: {result.status}")
    print(f"Artifacts in {out_dir}: {', '.join(artifacts + ['manifest.json'])}")
    logger.info(f"{config.scenario} finished with status {result.status} (exit {exit_code})")
    return exit_code
