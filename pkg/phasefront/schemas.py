"""Pydantic schemas for scenario configuration and run manifests."""

import math
from typing import Dict, List, Literal, Optional, Tuple, get_args

from pydantic import BaseModel, ConfigDict, Field, model_validator

from phasefront.bargmann import PhaseGrid
from phasefront.config import settings
from phasefront.field_grid import SignalSpec
from phasefront.wavefront import WavefrontParams

ScenarioName = Literal[
    "bargmann-map", "wavefront", "flow", "evolve",
    "propagation-check", "anomaly-demo", "paradiff-probe",
]
SCENARIOS: Tuple[str, ...] = get_args(ScenarioName)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HamiltonianSection(_Section):
    """Linear symbol; potential holds polynomial coefficients c_k of V(x) = sum c_k x^k."""
    kind: Literal["harmonic_oscillator", "free", "quadratic", "potential",
                  "time_dependent_oscillator"] = "harmonic_oscillator"
    matrix: Optional[List[List[float]]] = None
    potential: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.5])
    rate: float = 1.0  # time_dependent_oscillator: a = (1 + rate t)(x^2 + xi^2)/2

    @model_validator(mode="after")
    def _matrix(self) -> "HamiltonianSection":
        if self.kind == "quadratic":
            if self.matrix is None or len(self.matrix) != 2 or any(len(row) != 2 for row in self.matrix):
                raise ValueError("quadratic Hamiltonians need a 2x2 matrix")
            if abs(self.matrix[0][1] - self.matrix[1][0]) > 1e-12:
                raise ValueError("quadratic Hamiltonian matrix must be symmetric")
        return self


class EvolutionSection(_Section):
    """Solver options for evolve and propagation-check."""
    backend: Literal["metaplectic", "hermite"] = "metaplectic"
    n_modes: Optional[int] = Field(default=None, ge=1)
    check_nyquist: bool = True
    blowup_factor: float = Field(default_factory=lambda: settings.BLOWUP_FACTOR, gt=1)


class BargmannSection(_Section):
    """Phase grid of bargmann-map: an explicit grid, or a square of the given radius."""
    grid: Optional[PhaseGrid] = None
    radius: float = Field(default=17.0, gt=0)
    count: int = Field(default_factory=lambda: settings.PHASE_GRID_COUNT, ge=16)
    oracle_inner: float = 4.0
    oracle_outer: float = 16.0

    def phase_grid(self) -> PhaseGrid:
        return self.grid or PhaseGrid.square(self.radius, self.count)


class ParadiffSection(_Section):
    K: Optional[int] = Field(default=None, ge=1)
    delta: float = Field(default=0.7, gt=0, lt=1)
    s: float = 1.0
    eps_values: List[float] = Field(default_factory=lambda: [0.1, 0.3])
    sigma: float = 1.0
    symbol_N: int = 1024


class ThresholdSection(_Section):
    """PASS/FAIL limits of the check scenarios."""
    bin_tolerance: Optional[float] = None  # radians; None means one angular bin
    telescoping_tolerance: float = 1e-10
    decay_margin: float = 0.3
    sharp_slope: float = 0.1
    flat_slope: float = 0.3


class ScenarioConfig(_Section):
    """One JSON document describing a run; unset grid and datum take scenario defaults."""
    scenario: ScenarioName
    seed: int = 0
    L: Optional[float] = Field(default=None, gt=0)
    N: Optional[int] = None
    datum: Optional[SignalSpec] = None
    hamiltonian: HamiltonianSection = Field(default_factory=HamiltonianSection)
    t: Optional[float] = None
    dt: Optional[float] = Field(default=None, gt=0)
    z0: Tuple[float, float] = (1.0, 0.0)
    times: Optional[List[float]] = None
    F: Literal["zero", "identity", "square", "gauge"] = "zero"
    op: Literal["identity", "square", "gauge"] = "square"
    wavefront: WavefrontParams = Field(default_factory=WavefrontParams)
    evolution: EvolutionSection = Field(default_factory=EvolutionSection)
    bargmann: BargmannSection = Field(default_factory=BargmannSection)
    paradiff: ParadiffSection = Field(default_factory=ParadiffSection)
    thresholds: ThresholdSection = Field(default_factory=ThresholdSection)

    @model_validator(mode="after")
    def _times(self) -> "ScenarioConfig":
        if self.times is not None and any(t < 0 for t in self.times):
            raise ValueError("times must be nonnegative")
        return self


class RunManifest(BaseModel):
    """Written next to every report; lists all artifacts of the run."""
    scenario: str
    status: Literal["PASS", "FAIL", "COMPLETE", "ERROR"]
    exit_code: int
    version: str
    config: Dict
    artifacts: List[str]


# Scenario grid defaults (L, N)
DEFAULT_GRIDS: Dict[str, Tuple[float, int]] = {
    "bargmann-map": (settings.DETECTION_L, settings.DETECTION_N),
    "wavefront": (settings.DETECTION_L, settings.DETECTION_N),
    "anomaly-demo": (settings.DETECTION_L, settings.DETECTION_N),
    "flow": (settings.DETECTION_L, settings.DETECTION_N),
    "evolve": (settings.EVOLUTION_L, settings.EVOLUTION_N),
    "propagation-check": (settings.EVOLUTION_L, settings.EVOLUTION_N),
    "paradiff-probe": (8.0, 4096),
}

DEFAULT_TIMES = [math.pi / 8, math.pi / 4, 3 * math.pi / 8]
