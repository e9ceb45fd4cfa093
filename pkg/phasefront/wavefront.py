#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Wave front detection from Bargmann data.

A direction theta is regular when |Tu| decays fast inside the truncated
cone around theta. The detector fits the radial decay of sup|Tu| over
log-spaced shells of every angular bin and flags the bins whose slope is
shallower than -N_threshold. The Sobolev variant integrates |z|^{2s}|Tu|^2
over the sector and judges divergence by how the integral grows with the
outer radius.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from phasefront.bargmann import PhaseGrid, PhaseMap, bargmann_transform
from phasefront.config import settings
from phasefront.errors import BinningMismatch, InsufficientCoverage
from phasefront.field_grid import SampledField

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_LOG_FLOOR = 1e-300


def circular_distance(a, b) -> np.ndarray:
    """Unsigned angular distance in [0, pi]."""
    return np.abs(np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi)


class ConicSector(BaseModel):
    """{z : |angle(z) - direction| < half_width, inner_radius <= |z| < outer_radius}."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    direction: float
    half_width: float = Field(gt=0, lt=math.pi / 4)
    inner_radius: float = Field(gt=0)
    outer_radius: float

    @field_validator("direction")
    @classmethod
    def _wrap(cls, value: float) -> float:
        return float(np.mod(value, TWO_PI))

    @model_validator(mode="after")
    def _radii(self) -> "ConicSector":
        if not self.outer_radius > self.inner_radius:
            raise ValueError(
                f"outer radius {self.outer_radius} must exceed inner radius {self.inner_radius}"
            )
        return self

    def with_outer(self, outer_radius: float) -> "ConicSector":
        return self.model_copy(update={"outer_radius": outer_radius})


class WavefrontParams(BaseModel):
    """Detection thresholds; defaults come from settings."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    bins: int = Field(default_factory=lambda: settings.ANGULAR_BINS, ge=8)
    width_factor: float = Field(default_factory=lambda: settings.SECTOR_WIDTH_FACTOR, gt=0)
    r0: float = Field(default_factory=lambda: settings.PROBE_R0, gt=0)
    r1: float = Field(default_factory=lambda: settings.PROBE_R1, gt=0)
    shells: int = Field(default_factory=lambda: settings.RADIAL_SHELLS)
    n_max: float = Field(default_factory=lambda: settings.DECAY_N_MAX)
    n_threshold: float = Field(default_factory=lambda: settings.DECAY_N_THRESHOLD)
    s_values: List[float] = Field(default_factory=list)
    nested_r1: List[float] = Field(default_factory=lambda: list(settings.SOBOLEV_NESTED_R1))
    growth_threshold: float = Field(default_factory=lambda: settings.SOBOLEV_GROWTH_THRESHOLD)
    grid_count: int = Field(default_factory=lambda: settings.PHASE_GRID_COUNT, ge=16)
    margin: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def _consistent(self) -> "WavefrontParams":
        if not self.r1 > self.r0:
            raise ValueError(f"r1 ({self.r1}) must exceed r0 ({self.r0})")
        if self.n_max < self.n_threshold:
            raise ValueError(f"n_max ({self.n_max}) must be at least n_threshold ({self.n_threshold})")
        if self.s_values and len(self.nested_r1) < 2:
            raise ValueError("Sobolev growth needs at least two nested outer radii")
        if self.nested_r1 and min(self.nested_r1) <= self.r0:
            raise ValueError("nested outer radii must exceed r0")
        return self

    @property
    def bin_width(self) -> float:
        return TWO_PI / self.bins

    @property
    def half_width(self) -> float:
        return self.width_factor * self.bin_width / 2.0

    @property
    def probe_radius(self) -> float:
        """Half side of the square phase grid the detector builds."""
        outer = max([self.r1] + list(self.nested_r1 if self.s_values else []))
        return outer + self.margin

    def centers(self) -> np.ndarray:
        return (np.arange(self.bins) + 0.5) * self.bin_width

    def bin_index(self, theta: float) -> int:
        """Bin [k*width, (k+1)*width) holding theta; boundaries go to the lower index."""
        position = float(np.mod(theta, TWO_PI)) / self.bin_width
        index = int(math.floor(position))
        if index > 0 and math.isclose(position, index, rel_tol=0.0, abs_tol=1e-9):
            index -= 1
        return index % self.bins


class AngularBin(BaseModel):
    center: float
    exponent: float
    residual: float
    singular: bool
    schwartz: bool = False
    sobolev_scores: Dict[str, float] = Field(default_factory=dict)
    sobolev_growth: Dict[str, float] = Field(default_factory=dict)
    sobolev_singular: Dict[str, bool] = Field(default_factory=dict)


class WavefrontReport(BaseModel):
    """Per-bin decay fits plus the flagged directions."""
    angular_bins: List[AngularBin]
    singular_directions: List[float]
    clusters: List[float]
    params: WavefrontParams

    def singular_bins(self) -> List[int]:
        return [i for i, b in enumerate(self.angular_bins) if b.singular]


class DirectionMatch(BaseModel):
    source: float
    expected: float
    found: Optional[float] = None


class MatchResult(BaseModel):
    """Outcome of comparing two reports through a flow."""
    matches: List[DirectionMatch]
    misses: List[float]
    extraneous: List[float]
    tolerance: float
    passed: bool


def _covers(pmap: PhaseMap, sector: ConicSector) -> bool:
    g = pmap.grid
    arc = sector.direction + np.linspace(-sector.half_width, sector.half_width, 9)
    x = sector.outer_radius * np.cos(arc)
    xi = sector.outer_radius * np.sin(arc)
    slack = 1e-9
    return bool(
        np.all(x >= g.x_min - slack) and np.all(x <= g.x_max + slack)
        and np.all(xi >= g.xi_min - slack) and np.all(xi <= g.xi_max + slack)
    )


def _sector_mask(radius: np.ndarray, angle: np.ndarray, sector: ConicSector) -> np.ndarray:
    return (
        (circular_distance(angle, sector.direction) < sector.half_width)
        & (radius >= sector.inner_radius)
        & (radius < sector.outer_radius)
    )


def _shell_sups(magnitude: np.ndarray, radius: np.ndarray, angle: np.ndarray,
                sector: ConicSector, shells: int) -> Tuple[np.ndarray, np.ndarray]:
    edges = np.geomspace(sector.inner_radius, sector.outer_radius, shells + 1)
    in_cone = circular_distance(angle, sector.direction) < sector.half_width
    sups = np.empty(shells)
    for i in range(shells):
        mask = in_cone & (radius >= edges[i]) & (radius < edges[i + 1])
        if not mask.any():
            raise InsufficientCoverage(
                f"shell [{edges[i]:.3f}, {edges[i + 1]:.3f}) of sector at {sector.direction:.4f} "
                f"holds no grid node; refine the phase grid"
            )
        sups[i] = magnitude[mask].max()
    return np.sqrt(edges[:-1] * edges[1:]), sups


def directional_decay(pmap: PhaseMap, sector: ConicSector,
                      shells: Optional[int] = None) -> Tuple[float, float]:
    """
    Least-squares slope of log sup|Tu| against log r over the sector.

    Args:
        pmap: Bargmann data.
        sector: Truncated cone to probe.
        shells: Number of log-spaced radial shells (default RADIAL_SHELLS).

    Returns:
        (slope, RMS residual of the fit)

    Raises:
        InsufficientCoverage: fewer than 8 shells, or the sector leaves the grid.
    """
    shells = settings.RADIAL_SHELLS if shells is None else shells
    if shells < 8:
        raise InsufficientCoverage(f"need at least 8 radial shells, got {shells}")
    if not _covers(pmap, sector):
        raise InsufficientCoverage(
            f"sector at {sector.direction:.4f} with outer radius {sector.outer_radius} leaves the phase grid"
        )
    radius, angle = pmap.polar()
    return _fit_decay(pmap.magnitude(), radius, angle, sector, shells)


def _fit_decay(magnitude, radius, angle, sector: ConicSector, shells: int) -> Tuple[float, float]:
    mids, sups = _shell_sups(magnitude, radius, angle, sector, shells)
    log_r = np.log(mids)
    log_sup = np.log(np.maximum(sups, _LOG_FLOOR))
    slope, intercept = np.polyfit(log_r, log_sup, 1)
    residual = float(np.sqrt(np.mean((log_sup - (slope * log_r + intercept)) ** 2)))
    return float(slope), residual


def sobolev_score(pmap: PhaseMap, sector: ConicSector, s: float) -> float:
    """Riemann sum of |z|^{2s}|Tu|^2 over the sector."""
    if not _covers(pmap, sector):
        raise InsufficientCoverage(
            f"sector at {sector.direction:.4f} with outer radius {sector.outer_radius} leaves the phase grid"
        )
    radius, angle = pmap.polar()
    return _score(pmap, radius, angle, sector, s)


def _score(pmap: PhaseMap, radius, angle, sector: ConicSector, s: float) -> float:
    mask = _sector_mask(radius, angle, sector)
    weight = radius[mask] ** (2.0 * s)
    return float(np.sum(weight * np.abs(pmap.values[mask]) ** 2) * pmap.grid.dx * pmap.grid.dxi)


def sobolev_growth(pmap: PhaseMap, sector: ConicSector, s: float,
                   nested_r1: Optional[Sequence[float]] = None) -> Tuple[float, List[float]]:
    """
    Log-log slope of sobolev_score across nested outer radii.

    Returns:
        (growth exponent, scores per outer radius)
    """
    nested_r1 = list(settings.SOBOLEV_NESTED_R1 if nested_r1 is None else nested_r1)
    if len(nested_r1) < 2:
        raise ValueError("need at least two nested outer radii")
    scores = [sobolev_score(pmap, sector.with_outer(r1), s) for r1 in nested_r1]
    log_scores = np.log(np.maximum(scores, _LOG_FLOOR))
    growth = float(np.polyfit(np.log(nested_r1), log_scores, 1)[0])
    return growth, scores


def _clusters(centers: np.ndarray, flags: np.ndarray) -> List[float]:
    """Circular mean of each contiguous run of flagged bins."""
    count = len(flags)
    if not flags.any():
        return []
    if flags.all():
        return []
    # start scanning right after an unflagged bin so no run is split at index 0
    start = int(np.argmin(flags)) + 1
    runs: List[List[int]] = []
    current: List[int] = []
    for step in range(count):
        i = (start + step) % count
        if flags[i]:
            current.append(i)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    means = []
    for run in runs:
        angles = centers[run]
        mean = math.atan2(np.sin(angles).sum(), np.cos(angles).sum())
        means.append(float(np.mod(mean, TWO_PI)))
    return sorted(means)


def detect_from_map(pmap: PhaseMap, params: Optional[WavefrontParams] = None) -> WavefrontReport:
    """Run the per-bin decay fit (and Sobolev growth for params.s_values) on existing data."""
    params = params or WavefrontParams()
    if params.shells < 8:
        raise InsufficientCoverage(f"need at least 8 radial shells, got {params.shells}")
    radius, angle = pmap.polar()
    magnitude = pmap.magnitude()
    centers = params.centers()

    bins: List[AngularBin] = []
    for center in centers:
        sector = ConicSector(direction=center, half_width=params.half_width,
                             inner_radius=params.r0, outer_radius=params.r1)
        if not _covers(pmap, sector):
            raise InsufficientCoverage(f"probe radius {params.r1} leaves the phase grid")
        exponent, residual = _fit_decay(magnitude, radius, angle, sector, params.shells)
        scores: Dict[str, float] = {}
        growths: Dict[str, float] = {}
        flags: Dict[str, bool] = {}
        for s in params.s_values:
            key = f"{s:g}"
            growth, nested = sobolev_growth(pmap, sector, s, params.nested_r1)
            scores[key] = nested[-1]
            growths[key] = growth
            flags[key] = growth > params.growth_threshold
        bins.append(AngularBin(
            center=float(center), exponent=exponent, residual=residual,
            singular=exponent > -params.n_threshold,
            schwartz=exponent <= -params.n_max,
            sobolev_scores=scores, sobolev_growth=growths, sobolev_singular=flags,
        ))
        logger.debug(f"bin {center:.4f}: exponent {exponent:.3f} residual {residual:.3f}")

    flagged = np.array([b.singular for b in bins])
    singular = [b.center for b in bins if b.singular]
    report = WavefrontReport(
        angular_bins=bins,
        singular_directions=singular,
        clusters=_clusters(centers, flagged),
        params=params,
    )
    logger.info(f"Wave front: {len(singular)}/{params.bins} bins singular, clusters {report.clusters}")
    return report


def detect_wavefront(u: SampledField, params: Optional[WavefrontParams] = None) -> WavefrontReport:
    """Bargmann-transform u on a square grid covering the probe radius and run the detector."""
    params = params or WavefrontParams()
    pg = PhaseGrid.square(params.probe_radius, params.grid_count)
    pmap = bargmann_transform(u, pg)
    return detect_from_map(pmap, params)


def compare_to_flow(report_0: WavefrontReport, report_t: WavefrontReport,
                    flow_dir: Callable[[float], float],
                    tol: Optional[float] = None) -> MatchResult:
    """
    Check that the flow carries every singular direction of report_0 onto
    a singular direction of report_t, and list what report_t has extra.

    Raises:
        BinningMismatch: the reports use different bin counts.
    """
    if report_0.params.bins != report_t.params.bins:
        raise BinningMismatch(
            f"reports use {report_0.params.bins} and {report_t.params.bins} angular bins"
        )
    tol = report_0.params.bin_width + 1e-9 if tol is None else tol
    later = np.asarray(report_t.singular_directions, dtype=float)

    matches: List[DirectionMatch] = []
    misses: List[float] = []
    images: List[float] = []
    for theta in report_0.singular_directions:
        expected = float(np.mod(flow_dir(theta), TWO_PI))
        images.append(expected)
        found = None
        if later.size:
            gaps = circular_distance(later, expected)
            best = int(np.argmin(gaps))
            if gaps[best] <= tol:
                found = float(later[best])
        if found is None:
            misses.append(theta)
        matches.append(DirectionMatch(source=theta, expected=expected, found=found))

    image_array = np.asarray(images, dtype=float)
    extraneous = [
        float(theta) for theta in later
        if image_array.size == 0 or circular_distance(image_array, theta).min() > tol
    ]
    passed = not misses and not extraneous
    logger.info(f"Flow comparison: {len(misses)} misses, {len(extraneous)} extraneous")
    return MatchResult(matches=matches, misses=misses, extraneous=extraneous,
                       tolerance=tol, passed=passed)
