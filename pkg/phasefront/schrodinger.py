#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Time evolution of D_t u + a(t, x, D) u + b(t) u = F(u) + f(t) in one dimension.

Sign convention: D_t = -i d/dt, so the linear semigroup is e^{-i t a^w} and
the harmonic-oscillator eigenfunction h_0 evolves as e^{-it/2} h_0.

Linear steps come from one of two backends:
    hermite      spectral projection on h_0..h_{n-1}, exact on that span
    metaplectic  chirp-multiply, Fourier chirp multiplier, chirp-multiply;
                 exact for every quadratic symbol on grids with pi/h >= L
Nonlinear steps integrate v' = i(F(v) + f(t) - b(t)v) pointwise with RK4 and
are combined with the linear step by Strang splitting.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from phasefront.config import settings
from phasefront.errors import BlowUp, NyquistViolation, SignalError, SingularTime, TruncationWarning
from phasefront.field_grid import (
    GridSpec1D,
    SampledField,
    forward_transform,
    hermite_functions,
    inverse_transform,
    plateau,
)
from phasefront.hamflow import symplectic_form
from phasefront.nonlinearity import ZERO, Nonlinearity

logger = logging.getLogger(__name__)

HamiltonianKind = Literal["harmonic_oscillator", "free", "quadratic", "potential"]
Backend = Literal["metaplectic", "hermite"]
TimeFactor = Callable[[float], float]
Forcing = Callable[[float], np.ndarray]
Perturbation = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EvolutionConfig:
    """
    Everything a run needs besides the initial datum.

    matrix is the 2x2 symmetric Q of a = z^T Q z / 2 (quadratic kind).
    potential is V(x) for a = xi^2/2 + V(x) (potential kind).
    time_factor multiplies the whole linear symbol. forcing is the
    inhomogeneity f(t) and perturbation returns b(t)v for a field v.
    """
    hamiltonian: HamiltonianKind = "harmonic_oscillator"
    t_final: float = 1.0
    dt: float = 0.01
    nonlinearity: Nonlinearity = ZERO
    snapshot_times: Tuple[float, ...] = ()
    matrix: Optional[np.ndarray] = None
    potential: Optional[Callable[[np.ndarray], np.ndarray]] = None
    time_factor: Optional[TimeFactor] = None
    forcing: Optional[Forcing] = None
    perturbation: Optional[Perturbation] = None
    backend: Backend = "metaplectic"
    n_modes: Optional[int] = None
    check_nyquist: bool = True
    blowup_factor: float = field(default_factory=lambda: settings.BLOWUP_FACTOR)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ValueError(f"t_final must be nonnegative, got {self.t_final}")
        times = tuple(sorted(float(t) for t in self.snapshot_times))
        if any(t < 0 or t > self.t_final + 1e-12 for t in times):
            raise ValueError(f"snapshot times {times} must lie in [0, {self.t_final}]")
        object.__setattr__(self, "snapshot_times", times)
        self.nonlinearity.check_vanishes_at_zero()
        if self.hamiltonian == "quadratic":
            if self.matrix is None:
                raise ValueError("quadratic Hamiltonians need a 2x2 matrix")
            Q = np.asarray(self.matrix, dtype=float)
            if Q.shape != (2, 2) or abs(Q[0, 1] - Q[1, 0]) > 1e-12:
                raise ValueError(f"quadratic Hamiltonian matrix must be symmetric 2x2, got {Q.tolist()}")
        if self.hamiltonian == "potential" and self.potential is None:
            raise ValueError("potential Hamiltonians need V(x)")
        if self.backend == "hermite" and self.hamiltonian != "harmonic_oscillator":
            raise ValueError("the hermite backend only propagates the harmonic oscillator")

    def quadratic_matrix(self) -> Optional[np.ndarray]:
        """Q of the symbol, or None for the potential kind."""
        if self.hamiltonian == "harmonic_oscillator":
            return np.eye(2)
        if self.hamiltonian == "free":
            return np.diag([0.0, 1.0])
        if self.hamiltonian == "quadratic":
            return np.asarray(self.matrix, dtype=float)
        return None

    def factor(self, t: float) -> float:
        return 1.0 if self.time_factor is None else float(self.time_factor(t))


@dataclass(frozen=True)
class EvolutionTrace:
    snapshots: List[Tuple[float, SampledField]]
    times: np.ndarray
    norms: np.ndarray
    energies: Optional[np.ndarray] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def final(self) -> SampledField:
        return self.snapshots[-1][1]

    def diagnostics(self) -> Dict[str, object]:
        """JSON-ready per-step diagnostics."""
        out: Dict[str, object] = {
            "times": [float(t) for t in self.times],
            "l2_norm": [float(n) for n in self.norms],
            "max_relative_norm_drift": float(np.max(np.abs(self.norms / self.norms[0] - 1.0))),
            "snapshot_times": [float(t) for t, _ in self.snapshots],
        }
        if self.energies is not None:
            out["energy"] = [float(e) for e in self.energies]
            scale = max(abs(float(self.energies[0])), 1e-300)
            out["max_relative_energy_drift"] = float(np.max(np.abs(self.energies - self.energies[0])) / scale)
        out.update(self.meta)
        return out


# ---------------------------------------------------------------------------
# Hermite backend
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _hermite_basis(grid: GridSpec1D, n_modes: int) -> np.ndarray:
    basis = hermite_functions(grid.x, n_modes - 1)
    basis.setflags(write=False)
    return basis


def _check_modes(grid: GridSpec1D, n_modes: int) -> None:
    if not 1 <= n_modes <= grid.N // 4:
        raise SignalError(f"n_modes must lie in [1, N/4 = {grid.N // 4}], got {n_modes}")


def hermite_coefficients(u: SampledField, n_modes: int) -> Tuple[np.ndarray, float]:
    """
    Coefficients <u, h_n> for n < n_modes and the relative projection residual.
    """
    _check_modes(u.grid, n_modes)
    basis = _hermite_basis(u.grid, n_modes)
    coeffs = u.grid.h * (basis @ u.values)
    projection = basis.T @ coeffs
    norm = np.linalg.norm(u.values)
    residual = float(np.linalg.norm(u.values - projection) / norm) if norm > 0 else 0.0
    return coeffs, residual


def _hermite_step(u: SampledField, t: float, n_modes: int) -> SampledField:
    basis = _hermite_basis(u.grid, n_modes)
    coeffs = u.grid.h * (basis @ u.values)
    phases = np.exp(-1j * t * (np.arange(n_modes) + 0.5))
    return u.replace(basis.T @ (phases * coeffs))


def propagate_linear_ho(u0: SampledField, t: float, n_modes: Optional[int] = None) -> Tuple[SampledField, float]:
    """
    e^{-itH} u0 for H = (-d^2/dx^2 + x^2)/2 by Hermite expansion.

    Args:
        u0: Space-domain datum.
        t: Time (any real).
        n_modes: Number of Hermite functions (default N/4).

    Returns:
        (evolved field, relative residual of the projection of u0)
    """
    n_modes = u0.grid.N // 4 if n_modes is None else n_modes
    _, residual = hermite_coefficients(u0, n_modes)
    if residual > settings.TRUNCATION_TOLERANCE:
        message = f"Hermite truncation residual {residual:.3e} with {n_modes} modes"
        logger.warning(message)
        warnings.warn(message, TruncationWarning, stacklevel=2)
    return _hermite_step(u0, t, n_modes), residual


# ---------------------------------------------------------------------------
# Metaplectic backend
# ---------------------------------------------------------------------------

def _chirp(x: np.ndarray, slope: float) -> np.ndarray:
    return np.exp(0.5j * slope * x ** 2)


def _kinetic(u: SampledField, tau: float) -> SampledField:
    """e^{-i tau D^2 / 2}."""
    u_hat = forward_transform(u)
    xi = u.grid.xi
    return inverse_transform(u_hat.replace(u_hat.values * np.exp(-0.5j * tau * xi ** 2)))


def _metaplectic_piece(u: SampledField, S: np.ndarray) -> SampledField:
    A, B = S[0, 0], S[0, 1]
    C, D = S[1, 0], S[1, 1]
    x = u.grid.x
    if abs(B) < 1e-14:
        if abs(A - 1.0) > 1e-12 or abs(D - 1.0) > 1e-12:
            raise ValueError(f"flow matrix {S.tolist()} has B = 0 with a dilation; not supported")
        return u.replace(u.values * _chirp(x, C))
    v = u.replace(u.values * _chirp(x, (A - 1.0) / B))
    v = _kinetic(v, B)
    return v.replace(v.values * _chirp(x, (D - 1.0) / B))


def propagate_quadratic(u0: SampledField, Q: np.ndarray, t: float) -> SampledField:
    """
    e^{-i t a^w} u0 for a = z^T Q z / 2 through the flow matrix expm(t Omega Q).

    The time is cut into pieces no longer than MAX_ROTATION_STEP; each piece
    is a chirp multiplication, a Fourier chirp multiplier and another chirp
    multiplication.
    """
    if t == 0.0:
        return u0
    pieces = max(1, int(math.ceil(abs(t) / settings.MAX_ROTATION_STEP - 1e-12)))
    S = expm((t / pieces) * symplectic_form(1) @ np.asarray(Q, dtype=float))
    u = u0
    for _ in range(pieces):
        u = _metaplectic_piece(u, S)
    return u


def _potential_step(u: SampledField, V: np.ndarray, tau: float) -> SampledField:
    half = np.exp(-0.5j * tau * V)
    v = _kinetic(u.replace(u.values * half), tau)
    return v.replace(v.values * half)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def spectral_edge_fraction(u: SampledField) -> float:
    """Share of spectral mass with |xi| >= (1 - NYQUIST_EDGE_FRACTION) pi/h."""
    u_hat = forward_transform(u)
    power = np.abs(u_hat.values) ** 2
    total = power.sum()
    if total == 0:
        return 0.0
    edge = np.abs(u.grid.xi) >= (1.0 - settings.NYQUIST_EDGE_FRACTION) * u.grid.nyquist
    return float(power[edge].sum() / total)


def _derivative_norm_sq(u: SampledField) -> float:
    u_hat = forward_transform(u)
    return float(np.sum(u.grid.xi ** 2 * np.abs(u_hat.values) ** 2) * u.grid.dxi / (2.0 * math.pi))


def energy(u: SampledField, cfg: EvolutionConfig, t: float = 0.0) -> Optional[float]:
    """
    <a^w u, u> minus ||u||_4^4 / 2 for the gauge nonlinearity; None when no
    conserved energy is attached to the configured nonlinearity.
    """
    if cfg.nonlinearity.name not in ("zero", "gauge"):
        return None
    h = u.grid.h
    x = u.grid.x
    values = u.values
    Q = cfg.quadratic_matrix()
    if Q is None:
        V = np.asarray(cfg.potential(x), dtype=float)
        linear = 0.5 * _derivative_norm_sq(u) + h * float(np.sum(V * np.abs(values) ** 2))
    else:
        x_norm_sq = h * float(np.sum(x ** 2 * np.abs(values) ** 2))
        linear = 0.5 * Q[0, 0] * x_norm_sq + 0.5 * Q[1, 1] * _derivative_norm_sq(u)
        if Q[0, 1] != 0.0:
            u_hat = forward_transform(u)
            Du = inverse_transform(u_hat.replace(u_hat.values * u.grid.xi))
            cross = h * float(np.real(np.sum(x * values * np.conj(Du.values))))
            linear += Q[0, 1] * cross
    linear *= cfg.factor(t)
    if cfg.nonlinearity.name == "gauge":
        linear -= 0.5 * h * float(np.sum(np.abs(values) ** 4))
    return linear


# ---------------------------------------------------------------------------
# Strang splitting
# ---------------------------------------------------------------------------

def _nonlinear_rhs(cfg: EvolutionConfig, t: float, v: np.ndarray) -> np.ndarray:
    rhs = cfg.nonlinearity(v)
    if cfg.forcing is not None:
        rhs = rhs + cfg.forcing(t)
    if cfg.perturbation is not None:
        rhs = rhs - cfg.perturbation(t, v)
    return 1j * rhs


def _nonlinear_step(u: SampledField, cfg: EvolutionConfig, t: float, tau: float) -> SampledField:
    if cfg.nonlinearity.name == "zero" and cfg.forcing is None and cfg.perturbation is None:
        return u
    v = u.values
    k1 = _nonlinear_rhs(cfg, t, v)
    k2 = _nonlinear_rhs(cfg, t + 0.5 * tau, v + 0.5 * tau * k1)
    k3 = _nonlinear_rhs(cfg, t + 0.5 * tau, v + 0.5 * tau * k2)
    k4 = _nonlinear_rhs(cfg, t + tau, v + tau * k3)
    return u.replace(v + tau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _linear_step(u: SampledField, cfg: EvolutionConfig, t: float, tau: float, n_modes: int) -> SampledField:
    scaled = cfg.factor(t + 0.5 * tau) * tau
    if cfg.backend == "hermite":
        return _hermite_step(u, scaled, n_modes)
    Q = cfg.quadratic_matrix()
    if Q is None:
        return _potential_step(u, np.asarray(cfg.potential(u.grid.x), dtype=float), scaled)
    return propagate_quadratic(u, Q, scaled)


def _stops(cfg: EvolutionConfig) -> List[float]:
    stops = sorted(set([t for t in cfg.snapshot_times if t > 0.0] + [cfg.t_final]))
    return [t for t in stops if t > 0.0]


def propagate_strang(u0: SampledField, cfg: EvolutionConfig) -> EvolutionTrace:
    """
    Second-order splitting: half nonlinear step, full linear step, half nonlinear step.

    The run is cut at every snapshot time; inside each segment the step is
    the largest value <= cfg.dt that divides the segment evenly. Without
    snapshot times only the final state is recorded.

    Raises:
        BlowUp: the L2 norm exceeds blowup_factor times its initial value.
        NyquistViolation: spectral mass near the band edge above tolerance.
    """
    grid = u0.grid
    n_modes = grid.N // 4 if cfg.n_modes is None else cfg.n_modes
    if cfg.backend == "hermite":
        _, residual = hermite_coefficients(u0, n_modes)
        if residual > settings.TRUNCATION_TOLERANCE:
            message = f"Hermite truncation residual {residual:.3e} with {n_modes} modes"
            logger.warning(message)
            warnings.warn(message, TruncationWarning, stacklevel=2)

    norm0 = u0.l2_norm()
    limit = cfg.blowup_factor * max(norm0, 1e-300)
    times: List[float] = [0.0]
    norms: List[float] = [norm0]
    e0 = energy(u0, cfg, 0.0)
    energies: Optional[List[float]] = None if e0 is None else [e0]
    snapshots: List[Tuple[float, SampledField]] = []
    if 0.0 in cfg.snapshot_times:
        snapshots.append((0.0, u0))

    u, t = u0, 0.0
    total_steps = 0
    for stop in _stops(cfg):
        steps = max(1, int(math.ceil((stop - t) / cfg.dt - 1e-9)))
        tau = (stop - t) / steps
        start = t
        for n in range(steps):
            u = _nonlinear_step(u, cfg, t, 0.5 * tau)
            u = _linear_step(u, cfg, t, tau, n_modes)
            u = _nonlinear_step(u, cfg, t + 0.5 * tau, 0.5 * tau)
            t = start + (n + 1) * tau
            norm = u.l2_norm()
            if not math.isfinite(norm) or norm > limit:
                raise BlowUp(f"L2 norm {norm:.3e} exceeds {cfg.blowup_factor:g} x initial {norm0:.3e} at t = {t:.6g}")
            if cfg.check_nyquist:
                edge = spectral_edge_fraction(u)
                if edge > settings.NYQUIST_MASS_TOLERANCE:
                    raise NyquistViolation(
                        f"spectral mass fraction {edge:.3e} near the band edge at t = {t:.6g}"
                    )
            times.append(t)
            norms.append(norm)
            if energies is not None:
                energies.append(energy(u, cfg, t))
        total_steps += steps
        if stop in cfg.snapshot_times or not cfg.snapshot_times:
            snapshots.append((stop, u))

    if not snapshots:
        snapshots.append((t, u))
    logger.info(
        f"Strang run: {total_steps} steps to t={cfg.t_final}, backend {cfg.backend}, "
        f"F={cfg.nonlinearity.name}, final norm {norms[-1]:.6g}"
    )
    return EvolutionTrace(
        snapshots=snapshots,
        times=np.asarray(times),
        norms=np.asarray(norms),
        energies=None if energies is None else np.asarray(energies),
        meta={"steps": total_steps, "backend": cfg.backend, "nonlinearity": cfg.nonlinearity.name},
    )


# ---------------------------------------------------------------------------
# Closed-form chirp solution
# ---------------------------------------------------------------------------

def _check_regular_time(t: float) -> None:
    if abs(math.cos(t)) < 1e-12:
        raise SingularTime(f"t = {t} is an odd multiple of pi/2; the solution is a multiple of delta there")


def chirp_phase(t: float, grid: GridSpec1D, n_modes: Optional[int] = None) -> float:
    """
    arg c(t), read off a Hermite evolution of a tapered constant at x = 0.

    The taper keeps the datum inside the span of the first n_modes Hermite
    functions: it is 1 on |x| <= r/2 and 0 beyond r = 0.75 min(L, sqrt(2 n_modes)).
    """
    _check_regular_time(t)
    n_modes = grid.N // 4 if n_modes is None else n_modes
    r_max = 0.75 * min(grid.L, math.sqrt(2.0 * n_modes))
    datum = SampledField(grid, plateau(grid.x, 0.5 * r_max, r_max))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        evolved, residual = propagate_linear_ho(datum, t, n_modes)
    value = evolved.values[grid.N // 2]
    logger.debug(f"chirp phase at t={t}: {np.angle(value):.6f} (residual {residual:.2e})")
    return float(np.angle(value))


def chirp_solution(t: float, grid: GridSpec1D) -> SampledField:
    """
    u(t) = c(t) e^{-i tan(t) x^2/2} with |c(t)| = |cos t|^{-1/2}, u(0) = 1.

    Raises:
        SingularTime: cos t = 0.
    """
    _check_regular_time(t)
    if t == 0.0:
        return SampledField(grid, np.ones(grid.N))
    magnitude = abs(math.cos(t)) ** -0.5
    phase = chirp_phase(t, grid)
    values = magnitude * np.exp(1j * phase) * np.exp(-0.5j * math.tan(t) * grid.x ** 2)
    return SampledField(grid, values)
