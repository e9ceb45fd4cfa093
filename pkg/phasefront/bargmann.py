#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Bargmann transform on phase-space grids and at single points.

    Tu(x, xi) = 2^{-1/2} pi^{-3/4} int e^{-i y xi} e^{-(x-y)^2/2} u(y) dy

Rows of a PhaseMap are computed by windowing u around x (W standard
deviations) and evaluating the windowed DFT at the requested xi with a
chirp-z transform. bargmann_point is the direct quadrature of the same
integral and serves as the independent check.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import czt

from phasefront.config import settings
from phasefront.errors import NyquistViolation, UnsupportedKind, WindowOverrun
from phasefront.field_grid import SampledField, SignalSpec

logger = logging.getLogger(__name__)

PREFACTOR = 2.0 ** -0.5 * math.pi ** -0.75

ArrayLike = Union[float, np.ndarray]


class PhaseGrid(BaseModel):
    """Rectangular (x, xi) grid given by two closed uniform ranges."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    x_min: float = Field(allow_inf_nan=False)
    x_max: float = Field(allow_inf_nan=False)
    x_count: int = Field(ge=16)
    xi_min: float = Field(allow_inf_nan=False)
    xi_max: float = Field(allow_inf_nan=False)
    xi_count: int = Field(ge=16)

    @model_validator(mode="after")
    def _increasing(self) -> "PhaseGrid":
        if not (self.x_max > self.x_min and self.xi_max > self.xi_min):
            raise ValueError("phase grid ranges must be strictly increasing")
        return self

    @classmethod
    def square(cls, radius: float, count: int) -> "PhaseGrid":
        """Centered square [-radius, radius]^2 with count nodes per side."""
        return cls(x_min=-radius, x_max=radius, x_count=count,
                   xi_min=-radius, xi_max=radius, xi_count=count)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.x_count)

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.xi_count)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.x_count - 1)

    @property
    def dxi(self) -> float:
        return (self.xi_max - self.xi_min) / (self.xi_count - 1)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(X, XI) arrays indexed [x index, xi index]."""
        return np.meshgrid(self.x, self.xi, indexing="ij")


@dataclass(frozen=True)
class PhaseMap:
    """Values of Tu (or a symbol) on a PhaseGrid, indexed [x index, xi index]."""
    grid: PhaseGrid
    values: np.ndarray
    provenance: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.x_count, self.grid.xi_count):
            raise ValueError(
                f"phase map values have shape {values.shape}, grid needs "
                f"({self.grid.x_count}, {self.grid.xi_count})"
            )
        object.__setattr__(self, "values", values)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def polar(self) -> Tuple[np.ndarray, np.ndarray]:
        """Radius and angle in [0, 2pi) of every node."""
        X, XI = self.grid.mesh()
        return np.hypot(X, XI), np.mod(np.arctan2(XI, X), 2.0 * math.pi)


def _check_window(u: SampledField, x_lo: float, x_hi: float, window: float) -> None:
    grid = u.grid
    if x_lo - window < -grid.L or x_hi + window > grid.L - grid.h:
        raise WindowOverrun(
            f"x range [{x_lo}, {x_hi}] with window {window} leaves the field domain "
            f"[{-grid.L}, {grid.L - grid.h}]"
        )


def _check_band(u: SampledField, xi_lo: float, xi_hi: float) -> None:
    band = u.grid.nyquist
    if max(abs(xi_lo), abs(xi_hi)) > band:
        raise NyquistViolation(f"xi range [{xi_lo}, {xi_hi}] exceeds the band {band:.4f}")


def bargmann_transform(u: SampledField, pg: PhaseGrid, window: Optional[float] = None) -> PhaseMap:
    """
    Tu on every node of pg.

    Each row fixes x, multiplies u by the Gaussian window on the M grid
    points nearest to |y - x| <= window and evaluates the DFT of that
    window at pg.xi in one chirp-z pass.

    Raises:
        WindowOverrun: x range plus window leaves u's domain.
        NyquistViolation: xi range leaves u's band.
    """
    window = settings.BARGMANN_WINDOW if window is None else window
    grid = u.grid
    _check_window(u, pg.x_min, pg.x_max, window)
    _check_band(u, pg.xi_min, pg.xi_max)

    h = grid.h
    span = int(math.ceil(2.0 * window / h)) + 2
    xs, xis = pg.x, pg.xi
    starts = np.floor((xs - window + grid.L) / h).astype(int)
    starts = np.clip(starts, 0, grid.N - span)
    offsets = np.arange(span)
    base_phase = np.exp(-1j * offsets * h * pg.xi_min)
    ratio = np.exp(-1j * h * pg.dxi)

    values = np.empty((pg.x_count, pg.xi_count), dtype=np.complex128)
    batch = settings.BARGMANN_ROW_BATCH
    for lo in range(0, pg.x_count, batch):
        rows = slice(lo, min(lo + batch, pg.x_count))
        index = starts[rows, None] + offsets[None, :]
        y = grid.x[index]
        windowed = np.exp(-0.5 * (xs[rows, None] - y) ** 2) * u.values[index]
        sums = czt(windowed * base_phase, m=pg.xi_count, w=ratio, a=1.0, axis=-1)
        y0 = grid.x[starts[rows]]
        values[rows] = PREFACTOR * h * np.exp(-1j * np.outer(y0, xis)) * sums

    logger.debug(f"Bargmann map {pg.x_count}x{pg.xi_count} from N={grid.N}, window span {span}")
    return PhaseMap(pg, values, {"source_L": grid.L, "source_N": grid.N, "window": window})


def bargmann_point(u: SampledField, z: Tuple[float, float], window: Optional[float] = None) -> complex:
    """Direct trapezoid quadrature of Tu at a single phase point."""
    window = settings.BARGMANN_WINDOW if window is None else window
    x0, xi0 = float(z[0]), float(z[1])
    _check_window(u, x0, x0, window)
    _check_band(u, xi0, xi0)

    y = u.grid.x
    mask = np.abs(y - x0) <= window
    y = y[mask]
    integrand = np.exp(-1j * y * xi0 - 0.5 * (x0 - y) ** 2) * u.values[mask]
    return complex(PREFACTOR * u.grid.h * np.sum(integrand))


def closed_form_magnitude(spec: SignalSpec, z: Tuple[ArrayLike, ArrayLike]) -> np.ndarray:
    """
    |Tu(z)| for signals with a known Gaussian integral.

    Supported: constant, chirp, gaussian, hermite(n), delta_approx (the
    normalized Gaussian; sigma -> 0 gives the delta), plane_wave. Tapers
    are ignored, so the value holds where the taper equals one.
    """
    x = np.asarray(z[0], dtype=float)
    xi = np.asarray(z[1], dtype=float)
    kind = spec.kind

    if kind == "constant":
        return math.pi ** -0.25 * np.exp(-0.5 * xi ** 2) + 0.0 * x
    if kind == "plane_wave":
        return math.pi ** -0.25 * np.exp(-0.5 * (xi - spec.eta) ** 2) + 0.0 * x
    if kind == "chirp":
        spread = 1.0 + spec.lam ** 2
        return math.pi ** -0.25 * spread ** -0.25 * np.exp(-((xi - spec.lam * x) ** 2) / (2.0 * spread))
    if kind == "gaussian":
        s2 = spec.sigma ** 2
        return (math.pi ** -0.25 * spec.sigma / math.sqrt(1.0 + s2)
                * np.exp(-(x ** 2 + s2 * xi ** 2) / (2.0 * (1.0 + s2))))
    if kind == "delta_approx":
        s2 = spec.sigma ** 2
        return PREFACTOR / math.sqrt(1.0 + s2) * np.exp(-(x ** 2 + s2 * xi ** 2) / (2.0 * (1.0 + s2)))
    if kind == "hermite":
        n = spec.n
        r2 = x ** 2 + xi ** 2
        return ((2.0 * math.pi) ** -0.5 * (0.5 * r2) ** (0.5 * n) / math.sqrt(math.factorial(n))
                * np.exp(-0.25 * r2))
    raise UnsupportedKind(f"no closed-form Bargmann magnitude for {spec.kind}")


def delta_magnitude(z: Tuple[ArrayLike, ArrayLike]) -> np.ndarray:
    """|T delta|(z) = 2^{-1/2} pi^{-3/4} e^{-x^2/2}, independent of xi."""
    x = np.asarray(z[0], dtype=float)
    return PREFACTOR * np.exp(-0.5 * x ** 2) + 0.0 * np.asarray(z[1], dtype=float)


def phase_space_mass(pmap: PhaseMap) -> float:
    """Riemann sum of |Tu|^2 over the phase grid."""
    return float(np.sum(np.abs(pmap.values) ** 2) * pmap.grid.dx * pmap.grid.dxi)


def write_phase_map_csv(pmap: PhaseMap, path: Path) -> Path:
    """Rows of (x, xi, |Tu|, arg Tu)."""
    path = Path(path)
    X, XI = pmap.grid.mesh()
    table = np.column_stack([
        X.ravel(), XI.ravel(), np.abs(pmap.values).ravel(), np.angle(pmap.values).ravel(),
    ])
    np.savetxt(path, table, delimiter=",", header="x,xi,abs,arg", comments="", fmt="%.17g")
    return path


def write_phase_map_binary(pmap: PhaseMap, path: Path) -> Path:
    """
    Little-endian block: 7 float64 header values (x_count, xi_count, x_min,
    x_max, xi_min, xi_max, is_complex) followed by row-major values as
    float64 or complex128.
    """
    path = Path(path)
    g = pmap.grid
    is_complex = bool(np.iscomplexobj(pmap.values))
    header = np.array(
        [g.x_count, g.xi_count, g.x_min, g.x_max, g.xi_min, g.xi_max, float(is_complex)],
        dtype="<f8",
    )
    body = np.ascontiguousarray(pmap.values, dtype="<c16" if is_complex else "<f8")
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(body.tobytes())
    return path


def read_phase_map_binary(path: Path) -> PhaseMap:
    raw = Path(path).read_bytes()
    header = np.frombuffer(raw[:56], dtype="<f8")
    x_count, xi_count = int(header[0]), int(header[1])
    grid = PhaseGrid(x_min=header[2], x_max=header[3], x_count=x_count,
                     xi_min=header[4], xi_max=header[5], xi_count=xi_count)
    dtype = "<c16" if header[6] else "<f8"
    values = np.frombuffer(raw[56:], dtype=dtype).reshape(x_count, xi_count).copy()
    return PhaseMap(grid, values, {"source": str(path)})
