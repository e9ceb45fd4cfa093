#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Dyadic analysis on the grid: Littlewood-Paley partitions in frequency and
in phase space, Kohn-Nirenberg quantization of grid symbols, Q^s and
Zygmund norms, and the localization probes built on them.

Every cutoff derives from one bump, psi_0(xi) = g(2 - |xi|), where g is the
C-infinity step of field_grid.smooth_step. psi_0 is 1 on |xi| <= 1 and 0
on |xi| >= 2, so psi_k = psi_0(2^-k .) - psi_0(2^{1-k} .) lives on
2^{k-1} <= |xi| <= 2^{k+1}.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from phasefront.bargmann import PhaseGrid, PhaseMap
from phasefront.config import settings
from phasefront.errors import DimensionMismatch, LevelOutOfBand
from phasefront.field_grid import GridSpec1D, SampledField, forward_transform, fourier_multiply, smooth_step

logger = logging.getLogger(__name__)

RadialProfile = Callable[[np.ndarray], np.ndarray]


def bump(xi) -> np.ndarray:
    """psi_0: 1 on |xi| <= 1, 0 on |xi| >= 2."""
    return smooth_step(2.0 - np.abs(np.asarray(xi, dtype=float)))


def _level(k: int, t: np.ndarray) -> np.ndarray:
    if k == 0:
        return bump(t)
    return bump(t / 2.0 ** k) - bump(t / 2.0 ** (k - 1))


def annulus(k: int) -> Tuple[float, float]:
    """Closed radial support of level k (k = 0 is the ball of radius 2)."""
    if k == 0:
        return 0.0, 2.0
    return 2.0 ** (k - 1), 2.0 ** (k + 1)


@dataclass(frozen=True)
class DyadicPartition:
    """psi_0..psi_K in frequency; Psi_K = psi_0(2^-K .) is their sum."""
    levels: int

    def __post_init__(self):
        if self.levels < 0:
            raise ValueError(f"level count must be nonnegative, got {self.levels}")

    @classmethod
    def for_grid(cls, grid: GridSpec1D) -> "DyadicPartition":
        """All levels whose annulus meets the band of the grid."""
        top = 0
        while 2.0 ** top < grid.nyquist:
            top += 1
        return cls(top)

    def psi(self, k: int, xi) -> np.ndarray:
        return _level(k, np.asarray(xi, dtype=float))

    def cumulative(self, xi) -> np.ndarray:
        return bump(np.asarray(xi, dtype=float) / 2.0 ** self.levels)

    def lowpass(self, xi, cutoff: float) -> np.ndarray:
        """psi_0(xi / cutoff): 1 on |xi| <= cutoff, 0 beyond 2 cutoff."""
        return self.psi(0, np.asarray(xi, dtype=float) / cutoff)

    def check_level(self, k: int, grid: GridSpec1D) -> None:
        if k < 0 or k > self.levels:
            raise LevelOutOfBand(f"level {k} outside 0..{self.levels}")
        if k >= 1 and 2.0 ** (k - 1) >= grid.nyquist:
            raise LevelOutOfBand(
                f"level {k} starts at |xi| = {2.0 ** (k - 1):g}, beyond the band {grid.nyquist:.4f}"
            )

    def admitted(self, grid: GridSpec1D) -> List[int]:
        return [k for k in range(self.levels + 1) if k == 0 or 2.0 ** (k - 1) < grid.nyquist]


@dataclass(frozen=True)
class PhasePartition:
    """phi_k(x, xi) = psi_k(|(x, xi)|); radial, hence even in xi."""
    levels: int

    def phi(self, k: int, x, xi) -> np.ndarray:
        return _level(k, np.hypot(x, xi))

    def cumulative(self, x, xi) -> np.ndarray:
        return bump(np.hypot(x, xi) / 2.0 ** self.levels)

    def profile(self, k: int) -> RadialProfile:
        return lambda r: _level(k, r)

    def cumulative_profile(self, k: int) -> RadialProfile:
        return lambda r: bump(r / 2.0 ** k)

    def symbol(self, k: int, grid: GridSpec1D) -> "GridSymbol":
        return GridSymbol.from_function(grid, lambda X, XI: self.phi(k, X, XI), {"origin": "phi", "level": k})


@dataclass(frozen=True)
class GridSymbol:
    """p(x_j, xi_m) on the space x frequency grid of a GridSpec1D, indexed [j, m]."""
    grid: GridSpec1D
    values: np.ndarray
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.N, self.grid.N):
            raise DimensionMismatch(
                f"symbol has shape {values.shape}, grid needs ({self.grid.N}, {self.grid.N})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("symbol values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: GridSpec1D, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                      meta: Optional[Dict[str, object]] = None) -> "GridSymbol":
        X, XI = np.meshgrid(grid.x, grid.xi, indexing="ij")
        values = np.broadcast_to(fn(X, XI), X.shape).copy()
        return cls(grid, values, dict(meta or {}))

    def to_phase_map(self) -> PhaseMap:
        g = self.grid
        pg = PhaseGrid(x_min=-g.L, x_max=g.L - g.h, x_count=g.N,
                       xi_min=-g.nyquist, xi_max=g.nyquist - g.dxi, xi_count=g.N)
        return PhaseMap(pg, self.values, dict(self.meta))


# ---------------------------------------------------------------------------
# Kohn-Nirenberg quantization
# ---------------------------------------------------------------------------

def _phase_rows(grid: GridSpec1D, rows: np.ndarray) -> np.ndarray:
    """e^{i x_j xi_m} = (-1)^{j+m} w^{jm}, w = e^{2 pi i/N}, for j in rows."""
    N = grid.N
    m = np.arange(N)
    roots = np.exp(2j * math.pi * np.arange(N) / N)
    signs = np.where((rows[:, None] + m[None, :]) % 2 == 0, 1.0, -1.0)
    return signs * roots[(rows[:, None] * m[None, :]) % N]


def _quantize_rows(f: SampledField, count: int,
                   symbol_rows: Callable[[np.ndarray], List[np.ndarray]]) -> List[SampledField]:
    grid = f.grid
    f_hat = forward_transform(f).values
    outputs = [np.empty(grid.N, dtype=np.complex128) for _ in range(count)]
    batch = settings.KN_ROW_BATCH
    for lo in range(0, grid.N, batch):
        rows = np.arange(lo, min(lo + batch, grid.N))
        weighted = _phase_rows(grid, rows) * f_hat[None, :]
        for out, p in zip(outputs, symbol_rows(rows)):
            out[rows] = np.sum(p * weighted, axis=1) / (2.0 * grid.L)
    return [SampledField(grid, out) for out in outputs]


def _check_grid(p: GridSymbol, f: SampledField) -> None:
    if p.grid.N != f.grid.N or not math.isclose(p.grid.L, f.grid.L, rel_tol=1e-12):
        raise DimensionMismatch(
            f"symbol grid (L={p.grid.L}, N={p.grid.N}) differs from field grid (L={f.grid.L}, N={f.grid.N})"
        )


def kn_quantize(p: GridSymbol, f: SampledField) -> SampledField:
    """p(x, D)f = (2 pi)^-1 int e^{i x xi} p(x, xi) f^(xi) d xi, by the grid quadrature."""
    return kn_quantize_many([p], f)[0]


def kn_quantize_many(symbols: Sequence[GridSymbol], f: SampledField) -> List[SampledField]:
    """Quantize several symbols against one field, sharing the phase factors."""
    for p in symbols:
        _check_grid(p, f)
    return _quantize_rows(f, len(symbols), lambda rows: [p.values[rows] for p in symbols])


def kn_quantize_radial(profiles: Sequence[RadialProfile], f: SampledField) -> List[SampledField]:
    """
    Quantize symbols p(x, xi) = profile(|(x, xi)|) without storing N x N arrays.
    """
    x, xi = f.grid.x, f.grid.xi

    def rows_of(rows: np.ndarray) -> List[np.ndarray]:
        r = np.hypot(x[rows][:, None], xi[None, :])
        return [profile(r) for profile in profiles]

    return _quantize_rows(f, len(profiles), rows_of)


def kn_dense_matrix(p: GridSymbol) -> np.ndarray:
    """Explicit N x N kernel K with kn_quantize(p, f).values == K @ f.values."""
    g = p.grid
    E = np.exp(1j * np.outer(g.x, g.xi))
    return ((p.values * E) @ E.conj().T) * g.h / (2.0 * g.L)


# ---------------------------------------------------------------------------
# Frequency projections and norms
# ---------------------------------------------------------------------------

def lp_project(f: SampledField, part: DyadicPartition, k: int) -> SampledField:
    """psi_k(D) f."""
    part.check_level(k, f.grid)
    return fourier_multiply(f, part.psi(k, f.grid.xi))


def level_masses(f: SampledField, part: DyadicPartition) -> Dict[int, float]:
    """Re <psi_k(D) f, f> / ||f||^2 per admitted level; they sum to the Psi_K share of f."""
    f_hat = forward_transform(f).values
    power = np.abs(f_hat) ** 2
    total = power.sum()
    xi = f.grid.xi
    return {k: float(np.sum(part.psi(k, xi) * power) / total) for k in part.admitted(f.grid)}


def qs_norm(f: SampledField, s: float) -> float:
    """max(||<D>^s f||, ||<x>^s f||) with <t> = (1 + t^2)^{1/2}."""
    if not -10.0 <= s <= 10.0:
        raise ValueError(f"s must lie in [-10, 10], got {s}")
    grid = f.grid
    f_hat = forward_transform(f).values
    frequency = math.sqrt(np.sum((1.0 + grid.xi ** 2) ** s * np.abs(f_hat) ** 2) * grid.dxi / (2.0 * math.pi))
    space = math.sqrt(np.sum((1.0 + grid.x ** 2) ** s * np.abs(f.values) ** 2) * grid.h)
    return max(frequency, space)


def zygmund_norm(f: SampledField, r: float, part: Optional[DyadicPartition] = None) -> float:
    """sup_j 2^{rj} ||psi_j(D) f||_inf over the admitted levels."""
    if not r > 0:
        raise ValueError(f"Zygmund order must be positive, got {r}")
    part = part or DyadicPartition.for_grid(f.grid)
    values = [2.0 ** (r * k) * lp_project(f, part, k).sup_norm() for k in part.admitted(f.grid)]
    return float(max(values))


def resolvable_phase_levels(grid: GridSpec1D, levels: Optional[int] = None) -> List[int]:
    """Levels j with 2^j <= min(L, pi/h)/2, optionally capped at levels."""
    cap = min(grid.L, grid.nyquist) / 2.0
    out = [j for j in range(64) if 2.0 ** j <= cap]
    if levels is not None:
        out = [j for j in out if j <= levels]
    return out


def lp_sum_ratio(f: SampledField, s: float, part: Optional[PhasePartition] = None) -> float:
    """
    sum_j 2^{2js} ||phi_j(x, D) f||^2 / ||f||_{Q^s}^2 over the resolvable levels.

    Levels beyond the resolvable range are left out and logged.
    """
    requested = part.levels if part is not None else None
    levels = resolvable_phase_levels(f.grid, requested)
    part = part or PhasePartition(levels[-1])
    excluded = [j for j in range(part.levels + 1) if j not in levels]
    if excluded:
        logger.warning(f"phase levels {excluded} exceed min(L, pi/h)/2 on L={f.grid.L}, N={f.grid.N}; excluded")
    pieces = kn_quantize_radial([part.profile(j) for j in levels], f)
    total = sum(2.0 ** (2 * j * s) * piece.l2_norm() ** 2 for j, piece in zip(levels, pieces))
    return float(total / qs_norm(f, s) ** 2)


# ---------------------------------------------------------------------------
# Localization probes
# ---------------------------------------------------------------------------

def lowpass_linf_gain(f: SampledField, eps: float) -> float:
    """||psi_0(eps D) f||_inf / ||f||_inf."""
    low = fourier_multiply(f, bump(eps * f.grid.xi))
    return low.sup_norm() / f.sup_norm()


def highpass_remainder(f: SampledField, eps: float) -> float:
    """||(I - psi_0(eps D)) f||_inf."""
    return fourier_multiply(f, 1.0 - bump(eps * f.grid.xi)).sup_norm()


def holder_remainder_slope(f: SampledField, eps_values: Optional[Sequence[float]] = None) -> Tuple[float, List[float]]:
    """
    Slope of log highpass_remainder against log eps.

    For f in C^r_* the remainder is O(eps^r), so the slope estimates r.
    """
    eps_values = list(eps_values or [2.0 ** -k for k in range(1, 7)])
    remainders = [highpass_remainder(f, eps) for eps in eps_values]
    slope = float(np.polyfit(np.log(eps_values), np.log(remainders), 1)[0])
    return slope, remainders


def phase_cutoff_linf_gain(u: SampledField, eps: float) -> float:
    """||phi_0(eps x, eps D) u||_inf / ||u||_inf."""
    cut = kn_quantize_radial([lambda r: bump(eps * r)], u)[0]
    return cut.sup_norm() / u.sup_norm()
